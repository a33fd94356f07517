"""Numerical verification lab for the 4D clamped bilaplacian problem.

The target problem is the fourth-order analogue of the classical
Lane-Emden concentration problem on the unit ball of R^4,

    Lap^2 u = (u+)^p   in B,        u = du/dnu = 0   on dB,

studied in the limit of large exponent p.  The package provides the
pieces needed to verify, at desk scale, the constants and identities
that govern single-point concentration:

- ``numerics``: quadrature (line rules, improper radial integrals, S^3
  product rules) and 4th-order radial finite-difference operators.
- ``bubble``: the entire radial profile Z with Lap^2 Z = e^Z, its
  moments, and the first-order correction eta0 solved by shooting.
- ``greenball``: the explicit clamped Green function of the unit ball,
  its regular part, the Robin function, and the interaction functional
  with critical-point search.
- ``pohozaev``: sphere-supported quadratic forms P and Q, their value
  table on Green functions, and identity residuals for solutions.
- ``solver``: radial Newton/continuation solver for the target problem
  with concentration diagnostics.
- ``spectrum``: mode-decomposed linearized operators, kernel residuals,
  eigenvalue tracking along the continuation branch.
- ``cli``: batch verification front end (``bilap4d <subcommand>``).
"""

__version__ = "0.1.0"

__all__ = [
    "numerics",
    "bubble",
    "greenball",
    "pohozaev",
    "solver",
    "spectrum",
]
