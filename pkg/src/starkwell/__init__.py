"""Decay of a bound state in a 1D attractive delta well after a static field quench.

Dimensionless units throughout: hbar = m = 1, well strength 1, so the
unperturbed bound state is exp(-|x|) with energy -1/2.  The field f enters
through the linear potential -f*x switched on at t = 0.
"""

__version__ = "0.1.0"
