"""Cubic moment lab: exact Z[w] arithmetic, cubic residue symbols and Gauss
sums, Hecke L-values at the central point, and desk-scale moment experiments
over the family of cubic characters with squarefree modulus = 1 mod 9.
"""

from .eisenstein import EisInt, LAMBDA, OMEGA, ONE, UNITS, ZERO

__version__ = "0.1.0"

__all__ = ["EisInt", "LAMBDA", "OMEGA", "ONE", "UNITS", "ZERO", "__version__"]
