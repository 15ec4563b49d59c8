"""Bernstein polynomials and spectra of reductive linear free divisors.

Everything is computed in exact rational arithmetic.  The two independent
routes to the Bernstein polynomial (residue of the saturated logarithmic
Brieskorn lattice, and the functional equation of the dual operator) live
in `brieskorn` and `bfunctional`; `cli` orchestrates them and cross-checks.
"""

__version__ = "0.1.0"

from .exactalg import BPoly, MPoly, QMatrix, QPolyUnivariate, Rational  # noqa: F401
