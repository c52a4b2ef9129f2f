"""Reflection of presheaves into product-preserving presheaves, as closed-term
algebras with a working equality engine."""

__version__ = "0.1.0"
