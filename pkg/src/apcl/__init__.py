"""Almost-periodic scalar conservation laws on exact frequency lattices."""

__version__ = "0.1.0"
