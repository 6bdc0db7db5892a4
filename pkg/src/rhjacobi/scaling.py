"""Weight scaling: map a fixed weight e^{-Q(x)} to the varying form
e^{-N V_N(x)} with V_N(x) = Q(alpha_N x + beta_N)/N, and map recurrence
coefficients back.

Polynomial Q of even degree m uses the exact scaling alpha = N^{1/m}.  For
entire non-polynomial Q the constants are found numerically so that the
equilibrium measure of V_N (ratio 1) has support [-1, 1]: a 1-D
bisection-safeguarded secant on alpha when Q is symmetric, otherwise damped
Newton on (alpha, beta) with a finite-difference Jacobian, warm-started from
the previous N.
"""

import math
from dataclasses import dataclass

import numpy as np

from .equilibrium import AnalyticField, compute_equilibrium
from .errors import NonNormalizableWeightError, ScalingFailureError


@dataclass(frozen=True)
class WeightSpec:
    """A weight e^{-Q(x)} given by polynomial coefficients or an entire pair."""

    kind: str  # "poly" | "entire"
    coeffs: tuple = None  # ascending Q coefficients (poly only)
    name: str = ""
    q: object = None
    dq: object = None
    symmetric: bool = False

    def Q(self, x):
        if self.kind == "poly":
            return np.polyval(self.coeffs[::-1], x)
        return self.q(x)

    def dQ(self, x):
        if self.kind == "poly":
            dc = tuple(k * c for k, c in enumerate(self.coeffs))[1:]
            return np.polyval(dc[::-1], x) if dc else 0.0 * x
        return self.dq(x)

    @property
    def degree(self):
        return len(self.coeffs) - 1 if self.kind == "poly" else None

    def label(self):
        if self.name:
            return self.name
        return "poly:" + ",".join(repr(float(c)) for c in self.coeffs)


def poly_weight(coeffs, name=""):
    c = tuple(float(x) for x in coeffs)
    while len(c) > 1 and c[-1] == 0.0:
        c = c[:-1]
    symmetric = all(v == 0.0 for v in c[1::2])
    return WeightSpec(kind="poly", coeffs=c, name=name, symmetric=symmetric)


def entire_weight(q, dq, symmetric, name=""):
    return WeightSpec(kind="entire", q=q, dq=dq, symmetric=symmetric, name=name)


WEIGHT_REGISTRY = {
    "hermite": lambda: poly_weight((0.0, 0.0, 1.0), name="hermite"),
    "cosh": lambda: entire_weight(np.cosh, np.sinh, True, name="cosh"),
    "x2sin": lambda: entire_weight(
        lambda x: x * x + np.sin(x), lambda x: 2.0 * x + np.cos(x), False, name="x2sin"
    ),
}


def weight_from_text(text):
    """Parse the CLI weight grammar: hermite | cosh | x2sin | poly:c0,c1,..."""
    if text in WEIGHT_REGISTRY:
        return WEIGHT_REGISTRY[text]()
    if text.startswith("poly:"):
        return poly_weight([float(v) for v in text[5:].split(",")])
    raise ValueError(f"unknown weight {text!r}")


@dataclass(frozen=True)
class ScalingParams:
    """The change of variables x -> alpha*x + beta at a given N."""

    N: int
    alpha: float
    beta: float
    weight: WeightSpec
    m_diag: float = float("nan")  # log(N)/log(alpha), diagnostic only

    def scaled_field(self):
        """V_N = Q(alpha x + beta)/N as an analytic field."""
        w, al, be, N = self.weight, self.alpha, self.beta, self.N
        return AnalyticField(
            value=lambda x: w.Q(al * x + be) / N,
            deriv=lambda x: al * w.dQ(al * x + be) / N,
        )


def scale_polynomial(weight, N):
    """alpha = N^(1/deg Q), beta = 0: exact normalization for polynomial Q."""
    if weight.kind != "poly":
        raise ValueError("scale_polynomial requires a polynomial weight")
    if N < 1:
        raise ValueError(f"N must be positive, got {N}")
    m = weight.degree
    if m < 2 or m % 2 == 1 or weight.coeffs[-1] <= 0:
        raise NonNormalizableWeightError(
            f"Q must have even degree >= 2 and positive leading coefficient "
            f"(degree {m}, leading {weight.coeffs[-1]})"
        )
    alpha = float(N) ** (1.0 / m)
    m_diag = math.log(N) / math.log(alpha) if N > 1 else 1.0
    return ScalingParams(N=N, alpha=alpha, beta=0.0, weight=weight, m_diag=m_diag)


def _support_of(weight, N, alpha, beta, guess):
    field = AnalyticField(
        value=lambda x: weight.Q(alpha * x + beta) / N,
        deriv=lambda x: alpha * weight.dQ(alpha * x + beta) / N,
    )
    em = compute_equilibrium(field, 1.0, guess)
    return em.a, em.b


def _initial_alpha(weight, N):
    # crude seed: Q(alpha) ~ 2N located by doubling plus bisection
    lo, hi = 1e-8, 1.0
    while weight.Q(hi) < 2.0 * N and hi < 1e8:
        hi *= 2.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if weight.Q(mid) < 2.0 * N:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def scale_entire(weight, N, warm=None, tol=1e-10):
    """Find (alpha, beta) so the equilibrium support of V_N is [-1, 1].

    `warm` may carry a previous ScalingParams for an adjacent N.
    """
    if weight.kind == "poly":
        raise ValueError("polynomial weights are routed to scale_polynomial")
    if N < 1:
        raise ValueError(f"N must be positive, got {N}")
    alpha = warm.alpha if warm is not None else _initial_alpha(weight, N)
    beta = warm.beta if warm is not None else 0.0
    guess = (-1.0, 1.0)

    if weight.symmetric:
        alpha, guess = _solve_symmetric(weight, N, alpha, guess, tol)
        beta = 0.0
    else:
        alpha, beta, guess = _solve_asymmetric(weight, N, alpha, beta, guess, tol)
    m_diag = math.log(N) / math.log(alpha) if N > 1 and alpha not in (0.0, 1.0) else 1.0
    return ScalingParams(N=N, alpha=alpha, beta=beta, weight=weight, m_diag=m_diag)


def _solve_symmetric(weight, N, alpha, guess, tol):
    def resid(al, g):
        a, b = _support_of(weight, N, al, 0.0, g)
        return b - 1.0, (a, b)

    r0, guess = resid(alpha, guess)
    if abs(r0) <= tol:
        return alpha, guess
    # bracket: residual decreases with alpha (larger alpha compresses support)
    lo, hi, rlo, rhi = alpha, alpha, r0, r0
    k = 0
    while rlo < 0.0:
        lo /= 2.0
        rlo, guess = resid(lo, guess)
        if (k := k + 1) > 60:
            raise ScalingFailureError("cannot bracket alpha from below")
    k = 0
    while rhi > 0.0:
        hi *= 2.0
        rhi, guess = resid(hi, guess)
        if (k := k + 1) > 60:
            raise ScalingFailureError("cannot bracket alpha from above")
    # secant with bisection safeguard
    x0, f0, x1, f1 = lo, rlo, hi, rhi
    for _ in range(80):
        if abs(f1) <= tol:
            return x1, guess
        x2 = x1 - f1 * (x1 - x0) / (f1 - f0) if f1 != f0 else 0.5 * (lo + hi)
        if not lo < x2 < hi:
            x2 = 0.5 * (lo + hi)
        f2, guess = resid(x2, guess)
        if f2 > 0.0:
            lo = x2
        else:
            hi = x2
        x0, f0, x1, f1 = x1, f1, x2, f2
    raise ScalingFailureError(f"secant for alpha stalled at residual {f1:.2e}")


def _solve_asymmetric(weight, N, alpha, beta, guess, tol):
    def resid(al, be, g):
        a, b = _support_of(weight, N, al, be, g)
        return np.array([a + 1.0, b - 1.0]), (a, b)

    F, guess = resid(alpha, beta, guess)
    for _ in range(60):
        if np.abs(F).max() <= tol:
            return alpha, beta, guess
        h_a = 1e-6 * max(alpha, 1e-3)
        h_b = 1e-6 * max(abs(beta), 1e-3)
        Fa, _ = resid(alpha + h_a, beta, guess)
        Fb, _ = resid(alpha, beta + h_b, guess)
        J = np.column_stack([(Fa - F) / h_a, (Fb - F) / h_b])
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError as e:
            raise ScalingFailureError(f"singular scaling Jacobian: {e}") from e
        lam, f0 = 1.0, np.abs(F).max()
        for _ in range(8):
            na, nb = alpha + lam * step[0], beta + lam * step[1]
            if na > 0:
                Fn, guess_n = resid(na, nb, guess)
                if np.abs(Fn).max() < f0:
                    break
            lam /= 2.0
        else:
            raise ScalingFailureError("damped Newton on (alpha, beta) stalled")
        alpha, beta, F, guess = na, nb, Fn, guess_n
    raise ScalingFailureError(f"Newton on (alpha, beta) did not converge, |F|={np.abs(F).max():.2e}")


def unscale_rows(a_scaled, b_scaled, params):
    """Map scaled-weight recurrence entries to the original weight's:
    b = b_scaled * alpha^2, a = a_scaled * alpha + beta."""
    if b_scaled <= 0:
        raise ValueError(f"b_scaled must be positive, got {b_scaled}")
    return a_scaled * params.alpha + params.beta, b_scaled * params.alpha**2
