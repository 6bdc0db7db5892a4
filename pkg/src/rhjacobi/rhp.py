"""Collocation solver for 2x2 matrix Riemann-Hilbert problems in canonical
form: find Phi = I + C_Gamma U with Phi+ = Phi- G on Gamma and Phi(inf) = I,
via the singular integral equation

    U - C-_Gamma U (G - I) = G - I.

Unknowns are U values at each arc's second-kind Chebyshev nodes; the equation
is collocated at the strictly interior first-kind points, which keeps every
matrix entry finite at arc junctions (the log singularities of the Cauchy
kernels live only at the endpoints themselves).  The two rows of U decouple
and share one LU factorization.
"""

from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import lapack, lu_factor, lu_solve

from .cauchy import boundary_rows, transform_rows
from .chebyshev import vals_to_coeffs
from .contours import ContourSet
from .errors import IllPosedDiscretizationError

DEFAULT_TOL = 1e-10
MAX_REFINEMENTS = 3


def _first_kind(m):
    return np.cos(np.pi * (2 * np.arange(m, 0, -1) - 1) / (2 * m))


def _eval_matrix(t, m):
    """Interpolation matrix: second-kind node values -> values at params t."""
    from .cauchy import _vals_to_coeffs_matrix

    kk = np.arange(m)
    return np.cos(np.outer(np.arccos(np.clip(t, -1.0, 1.0)), kk)) @ _vals_to_coeffs_matrix(m)


@dataclass
class RHSolution:
    """U on each arc (values at second-kind nodes) plus the generating data."""

    contours: ContourSet
    values: list  # per arc: (count, 2, 2) complex
    jumps: object
    residual_estimate: float

    def coefficients(self, index):
        """Chebyshev coefficients of U on arc `index`, shape (count, 2, 2)."""
        arc = self.contours.arcs[index]
        return vals_to_coeffs(self.values[index], (arc.start, arc.end)).coefficients

    def phi(self, z):
        """Phi(z) = I + C_Gamma U(z) at a point off the contour."""
        out = np.eye(2, dtype=complex)
        for vals, (arc, _) in zip(self.values, self.contours):
            rows = transform_rows(arc, arc.unmap(z))
            out = out + np.tensordot(rows[0], vals, axes=(0, 0))
        return out

    def phi_boundary(self, index, t, side):
        """One-sided Phi at parameter t on arc `index`."""
        out = np.eye(2, dtype=complex)
        for i, (vals, (arc, _)) in enumerate(zip(self.values, self.contours)):
            if i == index:
                rows = boundary_rows(arc, np.atleast_1d(float(t)), side)
            else:
                rows = transform_rows(arc, arc.unmap(self.contours.arcs[index].map(t)))
            out = out + np.tensordot(rows[0], vals, axes=(0, 0))
        return out


def _eval_jumps(jumps, label, z):
    """Evaluate a jump callable on an array of points, vectorized when the
    callable supports it (shape check guards scalar-only evaluators)."""
    try:
        g = np.asarray(jumps(label, z), dtype=complex)
        if g.shape == z.shape + (2, 2):
            return g
    except Exception:
        pass
    return np.stack([np.asarray(jumps(label, zz), dtype=complex) for zz in z])


def _jump_samples(contours, jumps, params_per_arc):
    G = []
    for (arc, label), t in zip(contours, params_per_arc):
        g = _eval_jumps(jumps, label, arc.map(t))
        if not np.isfinite(g).all():
            raise ValueError(f"jump matrix not finite on arc '{label}'")
        dets = g[:, 0, 0] * g[:, 1, 1] - g[:, 0, 1] * g[:, 1, 0]
        if (np.abs(dets) < 1e-12).any():
            raise ValueError(f"singular jump matrix on arc '{label}'")
        G.append(g)
    return G


def solve(contours, jumps, tol=DEFAULT_TOL, probes_per_arc=8, max_refinements=MAX_REFINEMENTS):
    """Solve the RHP on `contours` with jump evaluator `jumps`.

    When the off-grid residual exceeds tol, the per-arc counts are doubled
    and the problem re-solved, up to `max_refinements` times; only arcs whose
    own residual is above tolerance are refined, so a single underresolved
    arc (e.g. an oscillatory lens stub at small degree) does not inflate the
    whole system.
    """
    work = contours
    best = None
    for _ in range(max_refinements + 1):
        sol = _solve_once(work, jumps)
        per = _residuals_per_arc(sol, probes_per_arc)
        est = max(per) if per else 0.0
        sol = replace(sol, residual_estimate=est)
        if best is None or sol.residual_estimate < best.residual_estimate:
            best = sol
        if best.residual_estimate <= tol:
            return best
        work = ContourSet(
            [replace(a, count=2 * a.count if r > tol else a.count)
             for a, r in zip(work.arcs, per)],
            work.labels,
        )
    return best


def _solve_once(contours, jumps):
    arcs = [a for a, _ in contours]
    if not arcs:
        return RHSolution(contours, [], jumps, 0.0)
    counts = [a.count for a in arcs]
    T = sum(counts)
    offs = np.cumsum([0] + counts)
    params = [_first_kind(m) for m in counts]
    G = _jump_samples(contours, jumps, params)
    GmI = np.concatenate([g - np.eye(2) for g in G], axis=0)

    # global Cauchy(-) matrix and interpolation matrix at collocation points
    C = np.empty((T, T), dtype=complex)
    E = np.zeros((T, T))
    for qi, (tq, aq) in enumerate(zip(params, arcs)):
        rq = slice(offs[qi], offs[qi + 1])
        zq = aq.map(tq)
        E[rq, rq] = _eval_matrix(tq, aq.count)
        for pi, ap in enumerate(arcs):
            cp = slice(offs[pi], offs[pi + 1])
            if pi == qi:
                C[rq, cp] = boundary_rows(ap, tq, -1)
            else:
                C[rq, cp] = transform_rows(ap, ap.unmap(zq))

    A = np.empty((2 * T, 2 * T), dtype=complex)
    for j in range(2):
        for m in range(2):
            blk = -(GmI[:, m, j, None] * C)
            if j == m:
                blk = blk + E
            A[j * T : (j + 1) * T, m * T : (m + 1) * T] = blk

    lu, piv = lu_factor(A, check_finite=False)
    anorm = np.abs(A).sum(axis=0).max()
    rcond = lapack.zgecon(lu, anorm)[0]
    if not np.isfinite(rcond) or rcond < 1e-12:
        raise IllPosedDiscretizationError(
            f"collocation matrix condition ~ {1.0 / max(rcond, 1e-300):.2e}; "
            "add nodes or re-truncate the contour"
        )
    rhs = np.empty((2 * T, 2), dtype=complex)
    for i in range(2):
        rhs[:T, i] = GmI[:, i, 0]
        rhs[T:, i] = GmI[:, i, 1]
    sol = lu_solve((lu, piv), rhs, check_finite=False)

    U = np.empty((T, 2, 2), dtype=complex)
    for i in range(2):
        U[:, i, 0] = sol[:T, i]
        U[:, i, 1] = sol[T:, i]
    values = [U[offs[q] : offs[q + 1]] for q in range(len(arcs))]
    return RHSolution(contours, values, jumps, np.nan)


def _probe_params(m):
    # equispaced interior midpoints: provably disjoint from the first-kind
    # collocation lattice (Niven), so residuals cannot alias to zero
    return -1.0 + (2.0 * np.arange(m) + 1.0) / m


def _residuals_per_arc(solution, probes_per_arc=8):
    arcs = [a for a, _ in solution.contours]
    if not arcs:
        return []
    tp = _probe_params(probes_per_arc)
    out = []
    for qi, (arc, label) in enumerate(solution.contours):
        zq = arc.map(tp)
        acc_p = np.broadcast_to(np.eye(2, dtype=complex), (tp.size, 2, 2)).copy()
        acc_m = acc_p.copy()
        for pi, ap in enumerate(arcs):
            if pi == qi:
                rp = boundary_rows(ap, tp, +1)
                rm = boundary_rows(ap, tp, -1)
            else:
                rp = rm = transform_rows(ap, ap.unmap(zq))
            vals = solution.values[pi]
            acc_p += np.tensordot(rp, vals, axes=(1, 0))
            acc_m += np.tensordot(rm, vals, axes=(1, 0))
        gq = _eval_jumps(solution.jumps, label, zq)
        worst = 0.0
        for i in range(tp.size):
            err = np.linalg.norm(acc_p[i] - acc_m[i] @ gq[i]) / (1.0 + np.linalg.norm(gq[i]))
            worst = max(worst, err)
        out.append(worst)
    return out


def residual(solution, probes_per_arc=8):
    """max over off-grid probes of ||Phi+ - Phi- G|| / (1 + ||G||)."""
    per = _residuals_per_arc(solution, probes_per_arc)
    return max(per) if per else 0.0


def first_moment(solution):
    """Phi_1 = -(1/2 pi i) int_Gamma U ds."""
    from .cauchy import total_first_moment

    if not solution.values:
        return np.zeros((2, 2), dtype=complex)
    return total_first_moment(solution.values, solution.contours)
