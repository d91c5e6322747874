"""Ramanujan bigraphs from arithmetic lattices in unitary groups."""

__version__ = "0.1.0"
