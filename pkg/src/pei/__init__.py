"""Optimal identification of a single faulty device among N identical quantum devices."""

__version__ = "0.1.0"
