"""Generalized Collatz maps, their generating functions, and numerical
certification of the recurrences and functional equations they satisfy."""

__version__ = "0.1.0"
