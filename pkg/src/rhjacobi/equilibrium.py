"""Equilibrium measures with external field on a single interval.

The density on the support [a, b] is represented as

    psi(m(t)) = sqrt(1 - t^2) * sum_{k>=1} d_k U_{k-1}(t),

with m the affine map from [-1,1].  Writing the scaled field derivative as a
Chebyshev-T series, ratio*V'(m(t)) = sum c_k T_k(t), the airfoil identity
PV int sqrt(1-s^2) U_{k-1}(s)/(t-s) ds = pi T_k(t) turns the variational
condition into c_k = 2 pi d_k, and the support endpoints are fixed by the two
scalar equations

    c_0(a, b) = 0,        c_1(a, b) = 8/(b - a),

the second being unit mass.  Newton's method on (a, b) solves them.

The log potential g(z) = int log(z - x) dmu(x) then has the closed form

    g(m(zeta)) = pi (b-a)/2 * sum_k d_k A_k(zeta) + log((b-a)/4),
    A_1 = rho^2/4 - log(rho)/2,
    A_k = rho^{k+1}/(2(k+1)) - rho^{k-1}/(2(k-1)),   k >= 2,

in the inverse Joukowski variable rho(zeta) = zeta - sqrt(zeta-1)sqrt(zeta+1),
evaluated stably as 1/(zeta + sqrt(zeta-1)sqrt(zeta+1)).
"""

import math
from dataclasses import dataclass

import numpy as np

from .chebyshev import ChebSeries, adaptive_coeffs
from .errors import (
    InvalidDomainError,
    MultiIntervalSupportError,
    SideRequiredError,
    SupportSolveError,
)

NEWTON_MAX_ITER = 50
NEWTON_FTOL = 1e-13


@dataclass(frozen=True)
class AnalyticField:
    """External field V with derivative, both evaluable at complex arguments."""

    value: object
    deriv: object


@dataclass(frozen=True)
class EquilibriumMeasure:
    a: float
    b: float
    density_coeffs: np.ndarray  # d_{k+1} at index k (U-basis with sqrt weight)
    ell: float
    g1: complex
    ratio: float
    vprime_coeffs: ChebSeries
    field: AnalyticField
    newton_iterations: int = 0

    @property
    def support(self):
        return (self.a, self.b)

    def unmap(self, z):
        return (2.0 * np.asarray(z) - (self.a + self.b)) / (self.b - self.a)


def _u_series_eval(d, t):
    """sum_k d[k] U_k(t) by forward recurrence (stable on [-1, 1])."""
    t = np.asarray(t, dtype=float)
    u_prev = np.ones_like(t)
    u = 2.0 * t
    total = d[0] * u_prev
    for k in range(1, d.size):
        total = total + d[k] * u
        u, u_prev = 2.0 * t * u - u_prev, u
    return total


def _field_coeffs(field, ratio, a, b):
    """Chebyshev-T coefficients of ratio*V' on [a, b], adaptively truncated."""
    series = adaptive_coeffs(lambda x: ratio * field.deriv(x), (a, b))
    c = series.coefficients
    if np.abs(c.imag).max() > 1e-10 * max(1.0, np.abs(c).max()):
        raise SupportSolveError("field derivative is not real on the real axis")
    c = c.real.astype(float)
    if c.size < 2:
        c = np.concatenate([c, np.zeros(2 - c.size)])
    return c


def _support_residual(field, ratio, a, b):
    c = _field_coeffs(field, ratio, a, b)
    return np.array([c[0], c[1] - 8.0 / (b - a)]), c


def compute_equilibrium(field, ratio=1.0, initial_support=(-1.0, 1.0)):
    """Equilibrium measure of the field ratio*V, supported on one interval.

    Newton iteration on the endpoints from `initial_support`; raises
    SupportSolveError on non-convergence and MultiIntervalSupportError when
    the resulting density is negative somewhere.
    """
    if ratio <= 0:
        raise ValueError(f"ratio must be positive, got {ratio}")
    a, b = float(initial_support[0]), float(initial_support[1])
    if not a < b:
        raise InvalidDomainError("initial support must have a < b")
    F, c = _support_residual(field, ratio, a, b)
    scale = max(1.0, abs(c[1]))
    it = 0
    while np.abs(F).max() > NEWTON_FTOL * scale:
        if it >= NEWTON_MAX_ITER:
            raise SupportSolveError(
                f"support Newton stalled after {it} iterations, |F|={np.abs(F).max():.2e}"
            )
        h = 1e-7 * max(1.0, abs(a), abs(b))
        J = np.empty((2, 2))
        J[:, 0] = (_support_residual(field, ratio, a + h, b)[0]
                   - _support_residual(field, ratio, a - h, b)[0]) / (2 * h)
        J[:, 1] = (_support_residual(field, ratio, a, b + h)[0]
                   - _support_residual(field, ratio, a, b - h)[0]) / (2 * h)
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError as e:
            raise SupportSolveError(f"singular support Jacobian: {e}") from e
        lam = 1.0
        f0 = np.abs(F).max()
        for _ in range(8):
            na, nb = a + lam * step[0], b + lam * step[1]
            if nb - na > 1e-10:
                Fn, cn = _support_residual(field, ratio, na, nb)
                if np.abs(Fn).max() < f0:
                    break
            lam /= 2.0
        else:
            raise SupportSolveError("damped Newton failed to reduce the residual")
        a, b, F, c = na, nb, Fn, cn
        scale = max(1.0, abs(c[1]))
        it += 1

    d = c[1:] / (2.0 * math.pi)
    d[0] = 4.0 / (math.pi * (b - a))  # unit mass, exact
    # positivity on a dense grid; failure signals multi-interval support
    t = np.linspace(-1.0, 1.0, 2001)
    psi_t = np.sqrt(1.0 - t**2) * _u_series_eval(d, t)
    if psi_t.min() < -1e-12 * max(1.0, psi_t.max()):
        raise MultiIntervalSupportError(
            f"density negative (min {psi_t.min():.2e}); single-interval ansatz invalid"
        )
    d2 = d[1] if d.size > 1 else 0.0
    g1 = -((a + b) / 2.0 + math.pi * (b - a) ** 2 * d2 / 16.0)
    measure = EquilibriumMeasure(
        a=a, b=b, density_coeffs=d, ell=0.0, g1=g1, ratio=ratio,
        vprime_coeffs=ChebSeries(c, (a, b)), field=field, newton_iterations=it,
    )
    # Lagrange constant from the right endpoint, where g is continuous:
    # the variational identity g+ + g- = ratio*V - ell gives ell = V - 2g there
    gb = _g_raw(measure, np.array([1.0 + 0j]))[0].real
    ell = ratio * float(np.real(field.value(b))) - 2.0 * gb
    object.__setattr__(measure, "ell", ell)
    return measure


def _rho_from_zeta(zeta):
    zeta = zeta + 0j  # canonicalize -0.0 imag: z+1 would flip it, z-1 not
    R = np.sqrt(zeta - 1.0) * np.sqrt(zeta + 1.0)
    return 1.0 / (zeta + R)


def _g_raw(measure, zeta, rho=None, log_rho=None):
    """g in the mapped variable; caller supplies one-sided rho/log(rho) on cuts."""
    if rho is None:
        rho = _rho_from_zeta(zeta)
    if log_rho is None:
        log_rho = np.log(rho)
    d = measure.density_coeffs
    total = d[0] * (rho**2 / 4.0 - log_rho / 2.0)
    rk = rho.copy()  # rho^{k-1} at k=2
    for k in range(2, d.size + 1):
        dk = d[k - 1]
        total = total + dk * (rk * rho**2 / (2.0 * (k + 1)) - rk / (2.0 * (k - 1)))
        rk = rk * rho
    ba = measure.b - measure.a
    return math.pi * ba / 2.0 * total + math.log(ba / 4.0)


def g_eval(measure, z, side=None):
    """g(z) = int log(z - x) dmu(x); one-sided on the cut (-inf, b]."""
    za = np.asarray(z, dtype=complex)
    scalar = za.ndim == 0
    zeta = measure.unmap(za.reshape(-1))
    on_axis = np.abs(zeta.imag) < 5e-15
    on_cut = on_axis & (zeta.real <= 1.0 + 1e-14)
    if on_cut.any() and side not in (+1, -1):
        raise SideRequiredError("z on the cut (-inf, b]; a side (+1/-1) is required")
    rho = np.empty_like(zeta)
    log_rho = np.empty_like(zeta)
    free = ~on_cut
    if free.any():
        rho[free] = _rho_from_zeta(zeta[free])
        log_rho[free] = np.log(rho[free])
    if on_cut.any():
        t = zeta[on_cut].real
        band = t >= -1.0
        tb = np.clip(t, -1.0, 1.0)
        rb = tb - 1j * side * np.sqrt(1.0 - tb**2)
        rc = np.where(band, rb, 0j)
        left = ~band
        if left.any():
            tl = t[left]
            rl = 1.0 / (tl - np.sqrt(tl * tl - 1.0))  # real, in (-1, 0)
            rc[left] = rl
        lr = np.where(
            band,
            np.log(np.where(band, rc, 1.0)),
            np.log(np.abs(rc)) - 1j * side * math.pi,
        )
        rho[on_cut] = rc
        log_rho[on_cut] = lr
    out = _g_raw(measure, zeta, rho, log_rho)
    return out[0] if scalar else out.reshape(za.shape)


def phase(measure, z, side=None):
    """phi(z) = ratio*V(z) - ell - 2 g(z): the exponential-decay phase."""
    g = g_eval(measure, z, side)
    return measure.ratio * measure.field.value(z) - measure.ell - 2.0 * g


def density(measure, x):
    """Equilibrium density psi(x) on the support."""
    xa = np.asarray(x, dtype=float)
    t = measure.unmap(xa)
    if (np.abs(t) > 1.0 + 1e-12).any():
        raise InvalidDomainError(f"x={x} outside the support [{measure.a}, {measure.b}]")
    t = np.clip(t, -1.0, 1.0)
    out = np.sqrt(1.0 - t**2) * _u_series_eval(measure.density_coeffs, t)
    return float(out) if xa.ndim == 0 else out


def phase_coefficient(measure, which="b"):
    """|c| in phi ~ c (z - endpoint)^{3/2}, from a one-point fit just outside.

    Only Re(phi) enters: left of the support the one-sided phi carries a
    constant -2 pi i from the winding of g, which e^{n phi} cannot see at
    integer n.
    """
    a, b = measure.support
    delta = 1e-3 * (b - a)
    x = b + delta if which == "b" else a - delta
    return abs(phase(measure, x, +1).real) / delta**1.5


def endpoint_exponent(measure, which="b", tol=1e-8):
    """Detected contour-scaling exponent at an endpoint: 2/(3+4*lambda).

    Fits phi ~ c (z-b)^{(3+4 lambda)/2} at decreasing lambda-orders; the first
    order with a non-vanishing coefficient wins.  Generic (soft) endpoints
    return 2/3.
    """
    a, b = measure.support
    delta = 1e-3 * (b - a)
    x = b + delta if which == "b" else a - delta
    p = abs(phase(measure, x, +1).real)  # mod the 2 pi i winding constant
    scale = max(abs(measure.ell), 1.0)
    for lam in range(0, 3):
        c = p / delta ** ((3.0 + 4.0 * lam) / 2.0)
        if c > tol * scale:
            return 2.0 / (3.0 + 4.0 * lam)
    return 2.0 / (3.0 + 4.0 * 3)
