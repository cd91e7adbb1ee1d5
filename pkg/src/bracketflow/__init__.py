"""Bracket flows on complex Lie algebras and almost-abelian soliton classification."""
