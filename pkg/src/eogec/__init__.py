"""Esperanto grammatical error correction toolkit."""

__version__ = "0.1.0"
