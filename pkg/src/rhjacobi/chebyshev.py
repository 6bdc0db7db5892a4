"""Chebyshev series on affine domains: transforms, evaluation, calculus.

All grids are second-kind (extrema) points so endpoint values are available
for contour matching.  Coefficients are in the Chebyshev-T basis on the
parameter interval [-1, 1]; a domain (p, q) is the affine image
m(t) = alpha*t + beta with alpha = (q-p)/2, beta = (q+p)/2.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.fft import dct

from .errors import EvaluationError, InvalidDomainError

TRUNCATION_RTOL = 1e-14  # drop trailing coefficients below this, relative to max


def _is_pow2_plus_1(m):
    return m >= 3 and (m - 1) & (m - 2) == 0


@dataclass(frozen=True)
class ChebSeries:
    """Chebyshev-T coefficients living on an affine domain (p, q)."""

    coefficients: np.ndarray
    domain: tuple = (-1.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "coefficients", np.asarray(self.coefficients))
        if self.coefficients.size == 0:
            raise ValueError("empty coefficient sequence")

    @property
    def alpha(self):
        p, q = self.domain
        return (q - p) / 2.0

    @property
    def beta(self):
        p, q = self.domain
        return (q + p) / 2.0

    def unmap(self, z):
        if self.alpha == 0:
            raise InvalidDomainError("degenerate domain")
        return (z - self.beta) / self.alpha


def cheb_points(count, domain=(-1.0, 1.0)):
    """Second-kind Chebyshev points mapped to `domain`, ascending in parameter."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    p, q = domain
    if p == q:
        raise InvalidDomainError(f"degenerate interval ({p}, {q})")
    if count == 1:
        t = np.array([0.0])
    else:
        t = -np.cos(np.pi * np.arange(count) / (count - 1))
        t[0], t[-1] = -1.0, 1.0
    return (q - p) / 2.0 * t + (q + p) / 2.0


def vals_to_coeffs(values, domain=(-1.0, 1.0)):
    """Interpolate values on the second-kind grid; inverse of coeffs_to_vals."""
    v = np.asarray(values)
    if v.size == 0:
        raise ValueError("empty value sequence")
    m = v.shape[0]
    if m == 1:
        return ChebSeries(v.copy(), domain)
    vd = v[::-1]  # DCT-I wants the descending (cos-ordered) grid
    if _is_pow2_plus_1(m):
        if np.iscomplexobj(vd):
            c = dct(vd.real, type=1, axis=0) + 1j * dct(vd.imag, type=1, axis=0)
        else:
            c = dct(vd, type=1, axis=0)
        c = c / (m - 1)
    else:
        j = np.arange(m)
        M = np.cos(np.pi * np.outer(j, j) / (m - 1))
        w = np.ones(m)
        w[0] = w[-1] = 0.5
        c = 2.0 / (m - 1) * (M @ (vd * w))
    c[0] /= 2.0
    c[-1] /= 2.0
    return ChebSeries(c, domain)


def coeffs_to_vals(series):
    """Values of the series at its matching second-kind grid (ascending)."""
    c = series.coefficients
    m = c.shape[0]
    if m == 1:
        return c.copy()
    j = np.arange(m)
    M = np.cos(np.pi * np.outer(j, j) / (m - 1))
    vd = M @ c
    return vd[::-1]


def eval_series(series, z):
    """Clenshaw evaluation at (possibly complex) z; polynomial extension off-domain."""
    za = np.asarray(z)
    t = series.unmap(za)
    c = series.coefficients
    b1 = np.zeros_like(t, dtype=np.result_type(c.dtype, t.dtype, float))
    b2 = b1.copy()
    for k in range(c.shape[0] - 1, 0, -1):
        b1, b2 = 2.0 * t * b1 - b2 + c[k], b1
    out = t * b1 - b2 + c[0]
    return out.item() if za.ndim == 0 else out


def diff_series(series):
    """Coefficients of the derivative, with the 1/alpha chain-rule factor."""
    c = series.coefficients
    m = c.shape[0]
    if m == 1:
        return ChebSeries(np.zeros(1, dtype=c.dtype), series.domain)
    d = np.zeros(m - 1, dtype=np.result_type(c.dtype, float))
    d[m - 2] = 2.0 * (m - 1) * c[m - 1]
    if m >= 3:
        d[m - 3] = 2.0 * (m - 2) * c[m - 2]
    for k in range(m - 4, -1, -1):
        d[k] = d[k + 2] + 2.0 * (k + 1) * c[k + 1]
    d[0] /= 2.0
    return ChebSeries(d / series.alpha, series.domain)


def int_series(series):
    """Antiderivative with zero constant term (used by property tests)."""
    c = series.coefficients
    m = c.shape[0]
    out = np.zeros(m + 1, dtype=np.result_type(c.dtype, float))
    if m == 1:
        out[1] = c[0]
    else:
        c2 = c.copy()
        c2[0] *= 2.0
        for k in range(1, m + 1):
            hi = c[k + 1] if k + 1 < m else 0.0
            out[k] = (c2[k - 1] - hi) / (2.0 * k)
    return ChebSeries(out * series.alpha, series.domain)


@lru_cache(maxsize=512)
def _cc_weights_cached(count):
    if count == 1:
        return np.array([2.0])
    k = np.arange(count)
    moments = np.zeros(count)
    moments[::2] = 2.0 / (1.0 - k[::2] ** 2)  # int T_k over [-1,1], even k
    half = np.ones(count)
    half[0] = half[-1] = 0.5
    x = moments * half
    # w_j = half_j * (2/(count-1)) * sum_k x_k cos(pi k j/(count-1))
    if count > 600:  # O(n log n); the dense cosine matrix would be O(n^2)
        d = dct(x, type=1)
        s = (d + x[0] + np.where(k % 2 == 0, 1.0, -1.0) * x[-1]) / 2.0
    else:
        s = np.cos(np.pi * np.outer(k, k) / (count - 1)) @ x
    w = half * s * (2.0 / (count - 1))
    w = w[::-1].copy()
    w.flags.writeable = False
    return w


def cc_weights(count):
    """Clenshaw-Curtis weights on the second-kind grid of [-1, 1], ascending."""
    return _cc_weights_cached(count)


def clenshaw_curtis(f, domain, count):
    """Clenshaw-Curtis approximation of the integral of f over `domain`.

    Exact for polynomials of degree < count.
    """
    pts = cheb_points(count, domain)
    vals = np.asarray([f(x) for x in pts], dtype=float)
    bad = ~np.isfinite(vals)
    if bad.any():
        where = pts[bad][0]
        raise EvaluationError(f"non-finite sample at x={where}", point=where)
    p, q = domain
    return (q - p) / 2.0 * float(cc_weights(count) @ vals)


def adaptive_coeffs(f, domain, k0=16, kmax=2**14, rtol=TRUNCATION_RTOL):
    """Expand f on `domain`, doubling the grid until trailing coefficients
    fall below rtol relative to the largest; returns the truncated series."""
    m = k0 + 1
    while True:
        pts = cheb_points(m, domain)
        series = vals_to_coeffs(np.asarray([f(x) for x in pts]), domain)
        c = series.coefficients
        biggest = np.abs(c).max()
        if biggest == 0.0:
            return ChebSeries(c[:1], domain)
        if np.abs(c[-2:]).max() <= rtol * biggest:
            keep = np.nonzero(np.abs(c) > rtol * biggest)[0]
            last = keep[-1] + 1 if keep.size else 1
            return ChebSeries(c[:last], domain)
        if m - 1 >= kmax:
            raise EvaluationError(f"no coefficient decay at k={kmax} on {domain}")
        m = 2 * (m - 1) + 1
