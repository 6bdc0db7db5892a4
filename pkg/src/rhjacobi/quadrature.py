"""Gaussian quadrature from recurrence entries via Golub-Welsch.

Nodes are the eigenvalues of the n x n Jacobi matrix (diagonal a_0..a_{n-1},
off-diagonal sqrt(b_1)..sqrt(b_{n-1})); weights are mu0 times the squared
first components of the normalized eigenvectors.  The tridiagonal
eigenproblem is solved by the classic implicit-shift QL iteration with full
eigenvector accumulation (rotations applied to whole rows, so the inner
update is vectorized).
"""

import math
from dataclasses import dataclass

import numpy as np

from .chebyshev import clenshaw_curtis
from .errors import AlgorithmError, EvaluationError


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    mu0: float
    order: int


def jacobi_matrix(rows, n):
    """Symmetric tridiagonal n x n section of the Jacobi operator."""
    if n < 1 or n > rows.count:
        raise ValueError(f"need 1 <= n <= {rows.count}, got {n}")
    d = np.array(rows.a[:n], dtype=float)
    off = np.sqrt(rows.b[1:n]) if n > 1 else np.zeros(0)
    if n > 1 and (~np.isfinite(off)).any():
        raise ValueError("nonpositive or missing off-diagonal entries")
    return np.diag(d) + np.diag(off, 1) + np.diag(off, -1)


def _tridiag_ql(d, e):
    """Implicit-shift QL for a symmetric tridiagonal matrix.

    d: diagonal (modified in place to eigenvalues, unordered),
    e: subdiagonal in e[0..n-2].  Returns (d, z) with z the accumulated
    orthogonal transform (columns are eigenvectors).
    """
    n = d.size
    z = np.eye(n)
    if n == 1:
        return d, z
    e = np.append(e.astype(float), 0.0)
    for l in range(n):
        for iteration in range(80):
            for m in range(l, n - 1):
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= np.finfo(float).eps * dd:
                    break
            else:
                m = n - 1
            if m == l:
                break
            if iteration == 79:
                raise AlgorithmError("QL iteration failed to converge")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                bb = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * bb
                p = s * r
                d[i + 1] = g + p
                g = c * r - bb
                zi = z[:, i].copy()
                z[:, i + 1], z[:, i] = s * zi + c * z[:, i + 1], c * zi - s * z[:, i + 1]
            else:
                d[l] -= p
                e[l] = g
                e[m] = 0.0
    return d, z


def golub_welsch(rows, n, mu0):
    """n-point Gaussian rule for the weight behind `rows`."""
    if mu0 <= 0:
        raise ValueError(f"mu0 must be positive, got {mu0}")
    J = jacobi_matrix(rows, n)
    d = J.diagonal().copy()
    e = J.diagonal(-1).copy()
    lam, z = _tridiag_ql(d, e)
    order = np.argsort(lam)
    nodes = lam[order]
    weights = mu0 * z[0, order] ** 2
    return QuadratureRule(nodes=nodes, weights=weights, mu0=float(mu0), order=n)


def mu0(weight, rtol=1e-13):
    """Total mass of e^{-Q}: Clenshaw-Curtis on [-R, R] with R pushed past
    the underflow point of the weight, doubling the count to convergence."""
    R = 1.0
    for _ in range(80):
        if weight.Q(R) >= 750.0 and weight.Q(-R) >= 750.0:
            break
        R *= 1.5
    else:
        raise AlgorithmError("weight does not decay; mu0 undefined")

    def f(x):
        q = float(weight.Q(x))
        return math.exp(-q) if q < 745.0 else 0.0

    count = 65
    prev = clenshaw_curtis(f, (-R, R), count)
    for _ in range(14):
        count = 2 * (count - 1) + 1
        val = clenshaw_curtis(f, (-R, R), count)
        if abs(val - prev) <= rtol * abs(val):
            return val
        prev = val
    raise AlgorithmError(f"mu0 quadrature did not converge (last delta {val - prev:.2e})")


def integrate(rule, f):
    """sum f(x_j) w_j."""
    vals = np.asarray([f(x) for x in rule.nodes], dtype=float)
    if not np.isfinite(vals).all():
        bad = rule.nodes[~np.isfinite(vals)][0]
        raise EvaluationError(f"integrand not finite at node {bad}", point=bad)
    return float(vals @ rule.weights)
