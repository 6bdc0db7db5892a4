"""Recurrence coefficients of exponential-weight orthogonal polynomials via
numerical Riemann-Hilbert analysis, plus Gaussian quadrature built on them."""

__version__ = "0.1.0"
