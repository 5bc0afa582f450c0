"""Numerical toolkit for time-fractional stochastic heat equations.

Evaluates the Mittag-Leffler kernels p, q_{alpha,beta}, P through their
Fourier symbols on periodic grids, provides discrete fractional calculus,
Littlewood-Paley/Besov norms, exact mild-solution simulation under compound
Poisson and Wiener noise, and Monte-Carlo checks of the regularity
estimates that govern these equations.
"""

__version__ = "0.1.0"
