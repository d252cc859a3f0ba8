"""Exact Poisson enveloping algebras of Lie-Rinehart algebras."""

__version__ = "0.1.0"
