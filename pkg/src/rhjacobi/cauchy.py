"""Cauchy transforms of Chebyshev interpolants on affine arcs.

For an arc z = alpha*t + beta the transform of an interpolant works entirely
in the parameter plane,

    (1/2 pi i) int f(s)/(s - z) ds  =  (1/2 pi i) sum_k c_k I_k(zeta),
    I_k(zeta) = int_{-1}^{1} T_k(t)/(t - zeta) dt,   zeta = (z - beta)/alpha,

because the affine factors cancel.  The I_k satisfy the three-term recurrence
I_{k+1} = 2 zeta I_k - I_{k-1} + 2 m_k seeded by I_0 = Log((zeta-1)/(zeta+1)),
with m_k the Chebyshev moments.  Forward recurrence is used near the arc
(where it is stable); in the far field, where the growing solution pollutes
it, the transform is integrated directly by doubled Clenshaw-Curtis rules.

Boundary values at the arc's own endpoints are finite-part regularized: the
divergent log(1 -+ t) term is dropped, which keeps the Plemelj identity
(C+ - C-)f = f exact entrywise at every node.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .chebyshev import cc_weights, cheb_points, vals_to_coeffs
from .contours import segments_overlap
from .errors import GeometryError, SideRequiredError

_TWO_PI_I = 2j * np.pi


def _chebyshev_moments(count):
    k = np.arange(count)
    m = np.zeros(count)
    m[::2] = 2.0 / (1.0 - k[::2] ** 2)
    return m


@lru_cache(maxsize=512)
def _vals_to_coeffs_matrix(m):
    """Matrix sending values at the ascending second-kind grid to T-coefficients."""
    if m == 1:
        return np.ones((1, 1))
    j = np.arange(m)
    M = np.cos(np.pi * np.outer(j, j) / (m - 1))
    w = np.ones(m)
    w[0] = w[-1] = 0.5
    C = 2.0 / (m - 1) * (M * w[None, :])
    C[0] /= 2.0
    C[-1] /= 2.0
    C = np.ascontiguousarray(C[:, ::-1])
    C.flags.writeable = False
    return C


@lru_cache(maxsize=512)
def _resample_matrix(m, M):
    """Second-kind m-node values -> values at the second-kind (M+1)-grid."""
    tf = cheb_points(M + 1)
    kk = np.arange(m)
    R = np.cos(np.outer(np.arccos(np.clip(tf, -1, 1)), kk)) @ _vals_to_coeffs_matrix(m)
    R.flags.writeable = False
    return R


def _param_dist(zeta):
    """Distance from parameter points to the segment [-1, 1]."""
    zeta = np.asarray(zeta, dtype=complex)
    re = np.clip(zeta.real, -1.0, 1.0)
    return np.abs(zeta - re)


def _basis_transforms_recurrence(zeta, count):
    """I_k(zeta) for k < count at off-contour parameter points, by recurrence."""
    zeta = np.asarray(zeta, dtype=complex)
    out = np.empty((zeta.size,) + (count,), dtype=complex)
    i0 = np.log((zeta - 1.0) / (zeta + 1.0))
    out[:, 0] = i0
    if count > 1:
        out[:, 1] = 2.0 + zeta * i0
    mom = _chebyshev_moments(max(count, 2))
    for k in range(1, count - 1):
        out[:, k + 1] = 2.0 * zeta * out[:, k] - out[:, k - 1] + 2.0 * mom[k]
    return out


def _boundary_basis(t, count, side, endpoint_fp=True):
    """I_k^(side) at real parameter points on the open arc (-1, 1).

    Endpoint values (t = +-1) use the finite-part convention: the divergent
    log(1 -+ t) is dropped and -+log 2 kept.
    """
    t = np.asarray(t, dtype=float)
    i0 = np.empty(t.shape, dtype=complex)
    interior = (t > -1.0) & (t < 1.0)
    i0[interior] = np.log((1.0 - t[interior]) / (1.0 + t[interior]))
    if not endpoint_fp and (~interior).any():
        raise SideRequiredError("boundary basis requested at an arc endpoint")
    i0[t >= 1.0] = -np.log(2.0)
    i0[t <= -1.0] = np.log(2.0)
    i0 = i0 + 1j * np.pi * side
    out = np.empty(t.shape + (count,), dtype=complex)
    out[..., 0] = i0
    if count > 1:
        out[..., 1] = 2.0 + t * i0
    mom = _chebyshev_moments(max(count, 2))
    for k in range(1, count - 1):
        out[..., k + 1] = 2.0 * t * out[..., k] - out[..., k - 1] + 2.0 * mom[k]
    return out


def _quad_rows(arc, zeta, m_start):
    """Rows mapping node values to transforms at parameter points, by
    Clenshaw-Curtis integration of interpolant/(t - zeta), doubled until two
    successive rules agree."""
    m = arc.count
    zeta = np.asarray(zeta, dtype=complex)
    M = max(m_start, 48)
    prev = None
    for _ in range(5):
        tf = cheb_points(M + 1)
        resample = _resample_matrix(m, M)
        w = cc_weights(M + 1)
        kern = 1.0 / (tf[None, :] - zeta[:, None])
        rows = (kern * w[None, :]) @ resample
        if prev is not None and np.abs(rows - prev).max() <= 1e-14 * max(1.0, np.abs(rows).max()):
            break
        prev = rows
        M *= 2
    return rows


def _inv_rho_log(zeta):
    """log(1/|rho(zeta)|): the Bernstein-ellipse rate of the target point."""
    zeta = zeta + 0j  # -0.0 imag would split the sqrt branches (z+1 flips it)
    R = np.sqrt(zeta - 1.0) * np.sqrt(zeta + 1.0)
    return np.log(np.abs(zeta + R))


def transform_rows(arc, zeta):
    """Values-to-transform matrix at off-contour parameter targets zeta,
    rows scaled by 1/(2 pi i).

    Forward recurrence amplifies roundoff like |rho|^{-k}, so it is used only
    where (count-1) * log(1/|rho|) stays below ~7 (amplification <= 1e3 eps);
    elsewhere the transform is integrated directly, which is cheap precisely
    there because the integrand's Chebyshev coefficients decay at rate |rho|.
    """
    zeta = np.atleast_1d(np.asarray(zeta, dtype=complex)) + 0j
    m = arc.count
    v2c = _vals_to_coeffs_matrix(m)
    rows = np.empty((zeta.size, m), dtype=complex)
    lnL = _inv_rho_log(zeta)
    near = (m - 1) * lnL <= 6.9
    if near.any():
        rows[near] = _basis_transforms_recurrence(zeta[near], m) @ v2c
    if (~near).any():
        m_start = m + int(np.ceil(40.0 / max(lnL[~near].min(), 1e-3)))
        rows[~near] = _quad_rows(arc, zeta[~near], m_start)
    return rows / _TWO_PI_I


def boundary_rows(arc, t, side):
    """Values-to-boundary-value matrix at parameter points t on the arc."""
    m = arc.count
    v2c = _vals_to_coeffs_matrix(m)
    return (_boundary_basis(t, m, side) @ v2c) / _TWO_PI_I


def cauchy_off(values, arc, z):
    """Cauchy transform of the node interpolant at a point off the arc."""
    zeta = np.atleast_1d(arc.unmap(z))
    if (_param_dist(zeta) < 1e-13).any():
        raise SideRequiredError(f"point {z} lies on the arc; request a side")
    out = transform_rows(arc, zeta) @ np.asarray(values)
    return out[0] if np.asarray(z).ndim == 0 else out


def cauchy_boundary(values, arc, node_index, side):
    """One-sided boundary value of the interpolant's transform at a node.

    side = +1 is the left of the orientation, -1 the right.  Endpoint nodes
    return the finite-part value.
    """
    if side not in (+1, -1):
        raise ValueError(f"side must be +1 or -1, got {side}")
    m = arc.count
    if not 0 <= node_index < m:
        raise ValueError(f"node_index {node_index} out of range [0, {m})")
    if m == 1:
        t = np.array([0.0])
    else:
        t = -np.cos(np.pi * np.arange(m) / (m - 1))
    row = boundary_rows(arc, t[node_index : node_index + 1], side)
    return (row @ np.asarray(values))[0]


def cauchy_off_weighted(h_values, arc, z):
    """Transform of h(t)/sqrt(1-t^2) with h interpolated at the arc nodes.

    Uses int T_k(t)/(sqrt(1-t^2)(t-zeta)) dt = -pi rho^k / R(zeta) with
    rho = zeta - R, R = sqrt(zeta-1)sqrt(zeta+1).  Test-oriented path for
    inverse-square-root endpoint behavior.
    """
    zeta = complex(arc.unmap(z))
    c = vals_to_coeffs(np.asarray(h_values)).coefficients
    R = np.sqrt(zeta - 1.0) * np.sqrt(zeta + 1.0)
    rho = 1.0 / (zeta + R)
    powers = rho ** np.arange(c.size)
    return (-np.pi / R) * (c @ powers) / _TWO_PI_I


@dataclass(frozen=True)
class CauchyKernelBlock:
    """Dense map from one arc's node values to transform values at targets."""

    source: object
    targets: np.ndarray
    side: int  # +1 / -1 boundary, 0 off-contour
    matrix: np.ndarray


def assemble_blocks(contours, target_mode="nodes"):
    """Blocks for every (source, target) arc pair of a contour set.

    Diagonal pairs produce a (+) and a (-) boundary block; off-diagonal pairs
    a single smooth block.  target_mode 'nodes' evaluates at the targets'
    second-kind nodes (the representation grid); 'collocation' at their
    strictly interior first-kind points, which is what the solver uses.
    """
    arcs = [a for a, _ in contours]
    for i, a in enumerate(arcs):
        for b in arcs[i + 1 :]:
            if segments_overlap(a, b):
                raise GeometryError("contour arcs overlap on a set of positive length")
    blocks = []
    for tgt in arcs:
        tpar = _target_params(tgt, target_mode)
        tz = tgt.map(tpar)
        for src in arcs:
            if src is tgt:
                for side in (+1, -1):
                    blocks.append(
                        CauchyKernelBlock(src, tz, side, boundary_rows(src, tpar, side))
                    )
            else:
                zeta = src.unmap(tz)
                mat = transform_rows(src, zeta)
                if not np.isfinite(mat).all():
                    raise GeometryError(
                        "target node coincides with a source arc endpoint; "
                        "use target_mode='collocation'"
                    )
                blocks.append(CauchyKernelBlock(src, tz, 0, mat))
    return blocks


def _target_params(arc, target_mode):
    m = arc.count
    if target_mode == "collocation":
        return np.cos(np.pi * (2 * np.arange(m, 0, -1) - 1) / (2 * m))
    if m == 1:
        return np.array([0.0])
    return -np.cos(np.pi * np.arange(m) / (m - 1))


def total_first_moment(values_per_arc, contours):
    """-(1/2 pi i) sum over arcs of the interpolant integrals (the 1/z moment
    of I + C U).  Each arc integral is Clenshaw-Curtis in the parameter times
    alpha."""
    total = None
    for vals, (arc, _) in zip(values_per_arc, contours):
        v = np.asarray(vals)
        w = cc_weights(arc.count)
        contrib = arc.alpha * np.tensordot(w, v, axes=(0, 0))
        total = contrib if total is None else total + contrib
    return -np.asarray(total) / _TWO_PI_I
