import numpy as np
import pytest
from scipy.integrate import solve_ivp

from bracketflow.integrate import FlowConfig, IntegrationAborted, integrate


def _collect(rhs, y0, cfg, **kw):
    ts, ys = [], []

    def on_sample(t, y):
        ts.append(t)
        ys.append(np.array(y))
        return False

    status = integrate(rhs, np.asarray(y0, dtype=complex), cfg, on_sample, **kw)
    return status, np.array(ts), np.array(ys)


def test_config_validation():
    with pytest.raises(ValueError):
        FlowConfig(integrator="euler")
    with pytest.raises(ValueError):
        FlowConfig(t_end=0.0)
    with pytest.raises(ValueError):
        FlowConfig(record_stride=-1.0)


def test_sample_times():
    assert len(FlowConfig(t_end=10, record_stride=0.1).sample_times()) == 101
    assert len(FlowConfig(t_end=1, record_stride=0.3).sample_times()) == 4


def test_samples_land_on_the_grid():
    cfg = FlowConfig(t_end=2.0, record_stride=0.25)
    status, ts, _ = _collect(lambda t, y: -y, [1.0], cfg)
    assert status == "completed"
    assert np.allclose(ts, np.arange(9) * 0.25, atol=0)


@pytest.mark.parametrize("integrator", ["dp45", "rk4"])
def test_cubic_decay_closed_form(integrator):
    # c' = -c^3 gives c^2 = 1 / (1 + 2t)
    cfg = FlowConfig(t_end=20.0, record_stride=0.5, integrator=integrator, step=1e-2)
    _, ts, ys = _collect(lambda t, y: -y**3, [1.0], cfg)
    exact = 1 / (1 + 2 * ts)
    assert np.max(np.abs(np.abs(ys[:, 0]) ** 2 - exact) / exact) < 1e-8


def test_against_scipy_on_complex_linear_system(rng):
    A = (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))) * 0.5
    A -= 2 * np.eye(4)  # stable
    y0 = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    cfg = FlowConfig(t_end=5.0, record_stride=0.5)
    _, ts, ys = _collect(lambda t, y: A @ y, y0, cfg)
    ref = solve_ivp(lambda t, y: A @ y, (0, 5), y0, t_eval=ts, rtol=1e-12, atol=1e-14,
                    method="DOP853")
    assert np.max(np.abs(ys - ref.y.T)) < 1e-8


def test_rk4_is_fourth_order():
    def err(h):
        cfg = FlowConfig(t_end=1.0, record_stride=1.0, integrator="rk4", step=h)
        _, _, ys = _collect(lambda t, y: 1j * y, [1.0], cfg)
        return abs(ys[-1, 0] - np.exp(1j))
    ratio = err(0.1) / err(0.05)
    assert 12 < ratio < 20


def test_stop_request():
    cfg = FlowConfig(t_end=10.0, record_stride=1.0)
    seen = []
    status = integrate(lambda t, y: -y, np.ones(1, complex), cfg,
                       lambda t, y: seen.append(t) or t >= 3.0)
    assert status == "stopped" and seen[-1] == 3.0


def test_blow_up_aborts():
    # y' = y^2 from 1 explodes at t = 1
    cfg = FlowConfig(t_end=2.0, record_stride=0.25)
    seen = []
    with pytest.raises(IntegrationAborted):
        integrate(lambda t, y: y**2, np.ones(1, complex), cfg,
                  lambda t, y: seen.append(t) or False)
    assert seen[-1] < 1.0


def test_projection_is_applied():
    cfg = FlowConfig(t_end=3.0, record_stride=0.5)
    rot = np.array([[0, -1], [1, 0]], dtype=complex)
    _, _, ys = _collect(lambda t, y: rot @ y + 0.1 * y, [1.0, 0.0], cfg,
                        project=lambda y: y / np.linalg.norm(y))
    assert np.allclose(np.linalg.norm(ys, axis=1), 1.0, atol=1e-15)
