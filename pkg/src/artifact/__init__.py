"""Phonon-induced heating of atoms trapped near an optical nanofiber."""

__version__ = "0.1.0"
