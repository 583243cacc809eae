"""Exact local-factor computations for tamely ramified parameters of Sp(2n)."""

__version__ = "0.1.0"
