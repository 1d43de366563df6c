"""
Julia-set gaskets of z^n + lambda/z^m: graph approximations, invariant
energy forms, renormalization and Laplacian spectra.
"""

__version__ = "1.0.0"
