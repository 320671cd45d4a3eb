"""Chiral-ring data of toric Gorenstein pairs: faces, Artinian quotients, Koszul spaces, the B-complex."""

__version__ = "0.1.0"
