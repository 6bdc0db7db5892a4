"""Recurrence-coefficient extraction and the row drivers.

The deformed problem for degree n yields Phi_1(n); with the parametrix moment
N_1, the g-function moment g_1 and the Lagrange constant ell,

    Y_1(n) = E (Phi_1(n) + N_1 + diag(-n g_1, n g_1)) E^{-1},
    E = diag(e^{n ell/2}, e^{-n ell/2}),

and the monic recurrence entries of the scaled weight are

    a_{n,N} = (Y_1(n))_11 - (Y_1(n+1))_11,
    b_{n,N} = (Y_1(n))_12 (Y_1(n))_21.

Both are conjugation-invariant, so the exponentials never materialize; only
the normalization constants gamma need them and are handled in log space.

The driver sets N = n row by row (which keeps b_{n,N} ~ 1/2-sized), and the
first n_min rows come from the Stieltjes baseline, a discretized modified
Gram-Schmidt recursion over a trapezoidal discretization of the line.
"""

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .deform import DeformationParams, build_phi_rhp, parametrix_moment
from .equilibrium import compute_equilibrium
from .errors import (
    AssemblyOverflowError,
    ExtractionInconsistencyError,
    RowComputationError,
)
from .rhp import first_moment, solve
from .scaling import scale_entire, scale_polynomial, unscale_rows

N_MIN = 8  # first row computed by the deformed solver
STIELTJES_BASELINE_M = 4000


@dataclass(frozen=True)
class YMoment:
    """Y_1(n) in conjugation-free (log-space) form."""

    core: np.ndarray  # Phi_1 + N_1 + diag(-n g1, n g1)
    n: int
    ell: float

    def y1(self):
        """Materialized Y_1(n); overflows for |n*ell/2| beyond ~700.

        The conjugation is E core E^{-1} with E = diag(e^{-n ell/2},
        e^{n ell/2}); this is the orientation consistent with the
        normalization transform, and it is the one the gamma-product
        identity validates.
        """
        s = self.n * self.ell / 2.0
        if abs(s) > 700.0:
            raise AssemblyOverflowError(
                f"exp({s:.1f}) overflows; use the log-space core"
            )
        e = math.exp(s)
        out = self.core.copy()
        out[0, 1] /= e * e
        out[1, 0] *= e * e
        return out

    def log_gamma_scaled(self):
        """log gamma_{n-1,N} = log(-(Y_1)_21/(2 pi i)) in stable form."""
        val = self.core[1, 0] * 1j / (2.0 * math.pi)
        if not (val.real > 0 and abs(val.imag) <= 1e-8 * val.real):
            raise ExtractionInconsistencyError(
                f"gamma candidate {val} is not positive real"
            )
        return math.log(val.real) + self.n * self.ell


def assemble_y1(phi1, n1, g1, ell, n):
    """Y_1(n) from the solved-problem moment and the parametrix data.

    With T = e^{n ell sigma3/2} Y e^{-n g sigma3} e^{-n ell sigma3/2} (the
    normalization whose band jump is exactly [[0,1],[-1,0]]-factorable and
    whose T(inf) = I), expanding at infinity gives

        Y_1 = E (Phi_1 + N_1) E^{-1} + diag(+n g1, -n g1),
        E = diag(e^{-n ell/2}, e^{n ell/2}),

    where g = log z + g1/z + O(1/z^2).  The diagonal term feeds straight into
    a_{n,N}; the shifted-Gaussian closed form (a_n = shift, exactly) pins its
    sign.
    """
    core = np.asarray(phi1, dtype=complex) + np.asarray(n1, dtype=complex)
    core = core + np.diag([n * g1, -n * g1])
    if not np.isfinite(core).all():
        raise AssemblyOverflowError("non-finite entries in the moment assembly")
    return YMoment(core=core, n=n, ell=float(ell))


def extract_coeffs(y1_n, y1_np1):
    """Monic recurrence entries of the scaled weight from two moments."""
    if y1_np1.n != y1_n.n + 1:
        raise ValueError("moments must belong to consecutive degrees")
    a_c = y1_n.core[0, 0] - y1_np1.core[0, 0]
    b_c = y1_n.core[0, 1] * y1_n.core[1, 0]
    tol = 1e-8
    if abs(a_c.imag) > tol * (1.0 + abs(a_c)) or abs(b_c.imag) > tol * (1.0 + abs(b_c)):
        raise ExtractionInconsistencyError(
            f"imaginary residue in extraction: a={a_c}, b={b_c}"
        )
    if b_c.real <= 0.0:
        raise ExtractionInconsistencyError(f"nonpositive b = {b_c.real}")
    return float(a_c.real), float(b_c.real)


def _scaling_for(weight, N, warm=None):
    if weight.kind == "poly":
        return scale_polynomial(weight, N)
    return scale_entire(weight, N, warm=warm)


def _y_moment(measure, degree, params):
    cs, ev = build_phi_rhp(measure, degree, params=params)
    sol = solve(cs, ev)
    phi1 = first_moment(sol)
    n1 = parametrix_moment(*measure.support)
    return assemble_y1(phi1, n1, measure.g1, measure.ell, degree)


def _compute_row(weight, n, N, params, warm_scaling=None):
    """Full pipeline for one row at explicit N; returns scaled and unscaled
    entries plus the two normalization constants this row determines."""
    scaling = _scaling_for(weight, N, warm=warm_scaling)
    fld = scaling.scaled_field()
    m_n = compute_equilibrium(fld, N / n)
    m_np1 = compute_equilibrium(fld, N / (n + 1), initial_support=m_n.support)
    y_n = _y_moment(m_n, n, params)
    y_np1 = _y_moment(m_np1, n + 1, params)
    a_s, b_s = extract_coeffs(y_n, y_np1)
    a, b = unscale_rows(a_s, b_s, scaling)
    al = scaling.alpha
    log_gammas = {}
    for y, j in ((y_n, n - 1), (y_np1, n)):
        try:
            log_gammas[j] = y.log_gamma_scaled() - (2 * j + 1) * math.log(al)
        except ExtractionInconsistencyError:
            log_gammas[j] = None
    return a, b, a_s, b_s, log_gammas, scaling


def row(weight, n, params=None):
    """(a_n, b_n, gamma_{n-1}) by the deformed-problem pipeline with N = n."""
    params = params or DeformationParams()
    if n < N_MIN:
        raise ValueError(f"row n={n} below n_min={N_MIN}; use stieltjes_rows")
    try:
        a, b, _, _, log_gammas, _ = _compute_row(weight, n, n, params)
    except Exception as e:
        raise RowComputationError(n, e) from e
    lg = log_gammas.get(n - 1)
    gamma = math.exp(lg) if lg is not None and lg < 709.0 else math.inf
    return a, b, gamma


@dataclass
class JacobiRows:
    """Recurrence entries a_0..a_{count-1}, b_1..b_{count-1} (monic)."""

    a: np.ndarray
    b: np.ndarray  # b[0] is not defined and stored as nan
    weight: object
    gamma: np.ndarray = None
    log_gamma: np.ndarray = None
    provenance: list = field(default_factory=list)
    row_seconds: np.ndarray = None
    failures: dict = field(default_factory=dict)
    accuracy_warning: bool = False

    @property
    def count(self):
        return self.a.size


def rows(weight, count, params=None, threads=1):
    """First `count` rows: Stieltjes baseline below n_min, the deformed
    solver (with N = n) from n_min on.  Rows are independent; `threads`
    parallelizes them with deterministic, index-ordered output."""
    params = params or DeformationParams()
    if count < 1:
        raise ValueError("count must be positive")
    base_n = min(count, N_MIN)
    base = stieltjes_rows(weight, base_n, STIELTJES_BASELINE_M)
    a = np.full(count, np.nan)
    b = np.full(count, np.nan)
    log_gamma = np.full(count, np.nan)
    seconds = np.full(count, np.nan)
    provenance = ["stieltjes-baseline"] * base_n + ["rh-solver"] * (count - base_n)
    a[:base_n] = base.a
    b[:base_n] = base.b[:base_n]
    log_gamma[:base_n] = base.log_gamma
    seconds[:base_n] = base.row_seconds
    failures = {}

    warm = {}

    def compute(n):
        t0 = time.perf_counter()
        out = _compute_row(weight, n, n, params, warm_scaling=warm.get(n - 1))
        return time.perf_counter() - t0, out

    ns = list(range(base_n, count))
    results = {}
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for n, res in zip(ns, pool.map(lambda n: _safe(compute, n), ns)):
                results[n] = res
    else:
        for n in ns:
            results[n] = _safe(compute, n)
            if not isinstance(results[n], Exception):
                warm[n] = results[n][1][5]

    for n in ns:
        res = results[n]
        if isinstance(res, Exception):
            failures[n] = RowComputationError(n, res)
            continue
        dt, (an, bn, _, _, lgs, _) = res
        a[n], b[n], seconds[n] = an, bn, dt
        if lgs.get(n) is not None:
            log_gamma[n] = lgs[n]
        if n - 1 >= 0 and np.isnan(log_gamma[n - 1]) and lgs.get(n - 1) is not None:
            log_gamma[n - 1] = lgs[n - 1]
    with np.errstate(over="ignore"):
        gamma = np.exp(log_gamma)
    return JacobiRows(
        a=a, b=b, weight=weight, gamma=gamma, log_gamma=log_gamma,
        provenance=provenance, row_seconds=seconds, failures=failures,
        accuracy_warning=base.accuracy_warning,
    )


def _safe(fn, n):
    try:
        return fn(n)
    except Exception as e:  # collected; partial results are still returned
        return e


def stieltjes_rows(weight, count, M):
    """Discretized Gram-Schmidt recursion over an M-point trapezoidal rule on
    the Mobius-type image x = L t/(1-t^2) of (-1, 1).

    M below ~2*count degrades accuracy; the result is flagged, not rejected.
    """
    if count < 1 or M < 2:
        raise ValueError("count and M must be positive (M >= 2)")
    t = -1.0 + 2.0 * np.arange(1, M + 1) / (M + 1)
    L = 1.0
    for _ in range(60):
        x_end = L * t[-1] / (1.0 - t[-1] ** 2)
        jac_end = L * (1.0 + t[-1] ** 2) / (1.0 - t[-1] ** 2) ** 2
        with np.errstate(over="ignore"):
            tail = math.exp(-min(float(weight.Q(x_end)), 745.0)) * jac_end
        if tail < np.finfo(float).eps:
            break
        L *= 2.0
    x = L * t / (1.0 - t**2)
    jac = L * (1.0 + t**2) / (1.0 - t**2) ** 2
    with np.errstate(over="ignore"):
        qx = np.asarray(weight.Q(x), dtype=float)
    log_w = -qx + np.log(jac) + math.log(2.0 / (M + 1))
    # clip the ends: points negligible for the x^{2k}-weighted mass at every
    # degree k <= count would otherwise dominate the recursion's dynamic
    # range (p_n ~ x^n at the far samples, where the weight has underflowed)
    log_x = np.log(np.maximum(np.abs(x), 1.0))
    keep = np.zeros(x.size, dtype=bool)
    for k in {0, count // 4, count // 2, (3 * count) // 4, count}:
        reach = log_w + 2.0 * k * log_x
        keep |= reach >= reach.max() - 160.0
    keep[keep.argmax() : x.size - keep[::-1].argmax()] = True  # ends only
    x, log_w = x[keep], log_w[keep]
    w = np.exp(np.clip(log_w, -745.0, 709.0))

    a = np.full(count, np.nan)
    b = np.full(count, np.nan)
    log_gamma = np.full(count, np.nan)
    times = np.zeros(count)
    p_prev = np.zeros(x.size)
    p = np.ones(x.size)
    b_inner_prev = None
    log_scale = 0.0  # accumulated log of the renormalizations of p
    t0 = time.perf_counter()
    for n in range(count):
        b_inner = float(w @ (p * p))
        if not np.isfinite(b_inner) or b_inner <= 0.0:
            break
        a[n] = float(w @ (x * p * p)) / b_inner
        if n >= 1:
            b[n] = b_inner / b_inner_prev
        log_gamma[n] = -(math.log(b_inner) + 2.0 * log_scale)
        p_next = (x - a[n]) * p - (b[n] if n >= 1 else 0.0) * p_prev
        p_prev, p = p, p_next
        scale = np.abs(p).max()
        if scale > 1e100:
            p = p / scale
            p_prev = p_prev / scale
            b_inner = b_inner / scale**2
            log_scale += math.log(scale)
        b_inner_prev = b_inner
        times[n] = time.perf_counter() - t0
        t0 = time.perf_counter()
    with np.errstate(over="ignore"):
        gamma = np.exp(log_gamma)
    return JacobiRows(
        a=a, b=b, weight=weight, gamma=gamma, log_gamma=log_gamma,
        provenance=["stieltjes"] * count, row_seconds=times,
        accuracy_warning=M < 2 * count,
    )


def eval_orthopoly(rows_, n, x):
    """Monic pi_n(x) by the forward three-term recurrence."""
    if n >= rows_.count and n > 0:
        raise ValueError(f"need {n} rows, have {rows_.count}")
    p_prev, p = 0.0, 1.0
    for k in range(n):
        bk = rows_.b[k] if k >= 1 else 0.0
        p_prev, p = p, (x - rows_.a[k]) * p - bk * p_prev
    return p
