"""Extremal functions of sharp Sobolev trace inequalities on the unit ball
and the upper half-space, together with the numerical machinery used to
verify them: conformal chart transfer, closed-form solution families,
finite-difference operators, deterministic quadrature, inequality deficits,
PDE residuals, Poisson-type kernels and an independent spectral solver.
"""

__version__ = "0.1.0"
