"""Deformed RHP construction: lens geometry, global and local parametrices,
endpoint-scaled circles, and the jump evaluator fed to the generic solver.

Angle convention.  theta1/theta2 are the angles between the lens arcs and the
band, so at the right endpoint b the upper lens leaves along
arg(z - b) = pi - theta1 and at the left endpoint a along arg(z - a) = theta2.
With theta = pi/3 this is the steepest-descent direction of the generic
(z - endpoint)^{3/2} phase.  The sector prefactors of the local parametrices
are constant between consecutive jump rays (lens, band, exterior axis), and
the full parametrix is the prefactor times diag(e^{n phi/2}, e^{-n phi/2});
the half in the exponent is forced by requiring the parametrix to carry
exactly the lensed jumps (conjugating diag(e^{s}, e^{-s}) against a
unipotent factor doubles the exponent).

The parametrix circles are realized as inscribed polygons with vertices at
the junction points (lens attachments and real-axis crossings); the jump
functions extend analytically between circle and polygon within each sector,
so the deformation is exact.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .contours import AffineArc, ContourSet, from_endpoints, truncate_contour
from .equilibrium import phase, phase_coefficient
from .errors import GeometryError, InvalidDomainError, SideRequiredError

_J = np.array([[0.0, 1.0], [-1.0, 0.0]])  # band jump of the parametrices

# sector prefactors at the right endpoint b, keyed by region between rays
_FB_BAND_UP = np.array([[1.0, 0.0], [-1.0, 1.0]])  # between upper lens and band
_FB_BAND_DOWN = np.array([[0.0, -1.0], [1.0, 1.0]])  # between band and lower lens
_FB_AXIS_DOWN = np.array([[1.0, -1.0], [0.0, 1.0]])  # between lower lens and axis
# at the left endpoint a
_FA_AXIS_UP = np.array([[1.0, 0.0], [1.0, 1.0]])  # between upper lens and axis
_FA_BAND_DOWN = np.array([[0.0, -1.0], [1.0, 0.0]])  # between band and lower lens
_FA_AXIS_DOWN = np.array([[1.0, -1.0], [1.0, 0.0]])  # between lower lens and axis


@dataclass(frozen=True)
class DeformationParams:
    theta1: float = math.pi / 3.0
    theta2: float = math.pi / 3.0
    r0: float = 1.0
    exponent_a: float = 2.0 / 3.0
    exponent_b: float = 2.0 / 3.0
    epsilon_trunc: float = 1e-14
    n_grid: int = 200
    lens_count: int = 24
    ray_count: int = 24
    circle_count: int = 32

    def __post_init__(self):
        if not (0.0 < self.theta1 < math.pi / 2.0 and 0.0 < self.theta2 < math.pi / 2.0):
            raise ValueError("lens angles must lie in (0, pi/2)")


PHASE_BUDGET = 4.0  # target |n phi| on the circle; keeps e^{n phi/2} tame


def disc_radius(params, n, a, b, which, coeff=None):
    """Endpoint disc radius r0_eff * n^(-exponent), clamped to keep discs
    apart.  When the endpoint phase coefficient c (phi ~ c (z-e)^{3/2}) is
    supplied, the pre-scale is capped at (budget/c)^{2/3} so |n phi| stays
    O(1) on the circle for steep fields; the n^{-2/3} scaling is untouched."""
    exp = params.exponent_b if which == "b" else params.exponent_a
    r0 = params.r0
    if coeff is not None and coeff > 0:
        r0 = min(r0, (PHASE_BUDGET / coeff) ** (2.0 / 3.0))
    return min(r0 * float(n) ** (-exp), (b - a) / 4.0)


def nu(z, a, b, side=None):
    """((z - b)/(z - a))^{1/4} with cut on [a, b] and nu(inf) = 1."""
    za = np.asarray(z, dtype=complex)
    on_band = (np.abs(za.imag) < 5e-15) & (za.real > a) & (za.real < b)
    if on_band.any():
        if side not in (+1, -1):
            raise SideRequiredError("nu on the band needs a side")
        ratio = np.abs((za.real - b) / (za.real - a))
        branch = np.exp(1j * side * math.pi / 4.0)
        out = np.where(on_band, ratio**0.25 * branch, 1.0)
        off = ~on_band
        if off.any():
            out = np.where(off, ((za - b) / (za - a)) ** 0.25, out)
        return out if za.ndim else complex(out)
    return ((za - b) / (za - a)) ** 0.25


def global_parametrix(z, a, b, side=None):
    """N(z) solving N+ = N- [[0,1],[-1,0]] on (a,b) with N(inf) = I."""
    v = nu(z, a, b, side)
    A = np.array([[1.0, 1j], [-1j, 1.0]])
    B = np.array([[1.0, -1j], [1j, 1.0]])
    return A / (2.0 * v) + B * (v / 2.0)


def global_parametrix_inv(z, a, b, side=None):
    n_ = global_parametrix(z, a, b, side)
    # det N = 1: inverse is the adjugate
    return np.array([[n_[1, 1], -n_[0, 1]], [-n_[1, 0], n_[0, 0]]])


def parametrix_moment(a, b):
    """The 1/z coefficient of N: [[0, i(b-a)/4], [-i(b-a)/4, 0]]."""
    if not a < b:
        raise InvalidDomainError("need a < b")
    c = 1j * (b - a) / 4.0
    return np.array([[0.0, c], [-c, 0.0]])


def _sector_prefactor_b(ang, theta1, side):
    lens = math.pi - theta1
    if abs(abs(ang) - math.pi) < 1e-13:
        if side not in (+1, -1):
            raise SideRequiredError("on the band at b: side required")
        return _FB_BAND_UP if side > 0 else _FB_BAND_DOWN
    if abs(ang) < 1e-13:
        if side not in (+1, -1):
            raise SideRequiredError("on the exterior axis at b: side required")
        return np.eye(2) if side > 0 else _FB_AXIS_DOWN
    if 0.0 < ang < lens:
        return np.eye(2)
    if lens <= ang <= math.pi:
        return _FB_BAND_UP
    if -math.pi < ang <= -lens:
        return _FB_BAND_DOWN
    return _FB_AXIS_DOWN


def _sector_prefactor_a(ang, theta2, side):
    if abs(ang) < 1e-13:
        if side not in (+1, -1):
            raise SideRequiredError("on the band at a: side required")
        return np.eye(2) if side > 0 else _FA_BAND_DOWN
    if abs(abs(ang) - math.pi) < 1e-13:
        if side not in (+1, -1):
            raise SideRequiredError("on the exterior axis at a: side required")
        return _FA_AXIS_UP if side > 0 else _FA_AXIS_DOWN
    if 0.0 < ang < theta2:
        return np.eye(2)
    if theta2 <= ang <= math.pi:
        return _FA_AXIS_UP
    if -theta2 < ang < 0.0:
        return _FA_BAND_DOWN
    return _FA_AXIS_DOWN


def local_parametrix(z, endpoint, measure, n, params=None, side=None, toward=None):
    """Sector-constant prefactor times diag(e^{n phi/2}, e^{-n phi/2}) inside
    the endpoint disc; carries exactly the lensed jumps there.

    `toward` is an optional direction hint resolving which sector's one-sided
    limit is meant when z sits exactly on a sector boundary (junction points).
    """
    params = params or DeformationParams()
    a, b = measure.support
    x0 = b if endpoint == "b" else a
    r = disc_radius(params, n, a, b, endpoint, phase_coefficient(measure, endpoint))
    w = complex(z) - x0
    if abs(w) > r * (1.0 + 1e-12):
        raise InvalidDomainError(f"z={z} outside the disc about {endpoint} (r={r:.3g})")
    ang = math.atan2(w.imag, w.real)
    if toward is not None:
        cross = w.real * toward.imag - w.imag * toward.real
        if cross != 0.0:
            ang = math.remainder(ang + 1e-9 * (1.0 if cross > 0 else -1.0), 2.0 * math.pi)
        if side is None and abs(w.imag) < 1e-13 and toward.imag != 0.0:
            side = +1 if toward.imag > 0 else -1
    if endpoint == "b":
        F = _sector_prefactor_b(ang, params.theta1, side)
    else:
        F = _sector_prefactor_a(ang, params.theta2, side)
    ph_side = side if abs(w.imag) < 5e-15 else None
    p = phase(measure, complex(z), ph_side)
    e = np.exp(n * p / 2.0)
    return F @ np.diag([e, 1.0 / e])


def local_parametrix_inv(z, endpoint, measure, n, params=None, side=None, toward=None):
    p = local_parametrix(z, endpoint, measure, n, params, side, toward)
    return np.array([[p[1, 1], -p[0, 1]], [-p[1, 0], p[0, 0]]])


def _batched_parametrix(v):
    """N(z) for an array of nu values: shape (..., 2, 2)."""
    out = np.empty(v.shape + (2, 2), dtype=complex)
    lo, hi = 1.0 / (2.0 * v), v / 2.0
    out[..., 0, 0] = lo + hi
    out[..., 1, 1] = lo + hi
    out[..., 0, 1] = 1j * (lo - hi)
    out[..., 1, 0] = -1j * (lo - hi)
    return out


def _adjugate(mats):
    out = np.empty_like(mats)
    out[..., 0, 0] = mats[..., 1, 1]
    out[..., 1, 1] = mats[..., 0, 0]
    out[..., 0, 1] = -mats[..., 0, 1]
    out[..., 1, 0] = -mats[..., 1, 0]
    return out


class PhiJumpEvaluator:
    """Jump matrices of the fully deformed problem, keyed by arc label.

    Accepts scalar points or arrays of points; array evaluation is fully
    vectorized (circle chords lie inside a single parametrix sector, so the
    prefactor is resolved per point from the angle alone).
    """

    def __init__(self, measure, n, params):
        self.measure = measure
        self.n = n
        self.params = params
        a, b = measure.support
        self.c_a = phase_coefficient(measure, "a")
        self.c_b = phase_coefficient(measure, "b")
        self.r_a = disc_radius(params, n, a, b, "a", self.c_a)
        self.r_b = disc_radius(params, n, a, b, "b", self.c_b)

    def _side_off_axis(self, z, toward=None):
        if abs(z.imag) < 5e-15:
            if toward is not None and toward.imag != 0.0:
                return +1 if toward.imag > 0 else -1
            a, b = self.measure.support
            if a < z.real < b:
                raise SideRequiredError(f"jump evaluation on the band at {z}")
            return None
        return +1 if z.imag > 0 else -1

    def __call__(self, label, z, toward=None):
        if np.ndim(z) > 0:
            return self._array_call(label, np.asarray(z, dtype=complex))
        z = complex(z)
        m, n = self.measure, self.n
        a, b = m.support
        if label.startswith("circle"):
            side = self._side_off_axis(z, toward)
            endpoint = "b" if label.endswith("b") else "a"
            N = global_parametrix(z, a, b, side)
            Pinv = local_parametrix_inv(z, endpoint, m, n, self.params, side, toward)
            return N @ Pinv
        if label.startswith("lens"):
            N = global_parametrix(z, a, b)
            Ninv = global_parametrix_inv(z, a, b)
            e = np.exp(n * phase(m, z))
            return N @ np.array([[1.0, 0.0], [e, 1.0]]) @ Ninv
        if label.startswith("ray"):
            x = z.real
            N = global_parametrix(z, a, b)
            Ninv = global_parametrix_inv(z, a, b)
            e = math.exp(-n * phase(m, x, +1).real)
            return N @ np.array([[1.0, e], [0.0, 1.0]]) @ Ninv
        raise ValueError(f"unknown arc label {label!r}")

    def _array_call(self, label, zs):
        m, n = self.measure, self.n
        a, b = m.support
        if label.startswith("ray"):
            x = zs.real
            v = ((x - b + 0j) / (x - a)) ** 0.25
            N = _batched_parametrix(v)
            e = np.exp(-n * np.real(phase(m, x + 0j, +1)))
            M = np.zeros(zs.shape + (2, 2), dtype=complex)
            M[..., 0, 0] = M[..., 1, 1] = 1.0
            M[..., 0, 1] = e
            return np.einsum("...ij,...jk,...kl->...il", N, M, _adjugate(N))
        v = ((zs - b) / (zs - a)) ** 0.25
        N = _batched_parametrix(v)
        if label.startswith("lens"):
            e = np.exp(n * phase(m, zs))
            M = np.zeros(zs.shape + (2, 2), dtype=complex)
            M[..., 0, 0] = M[..., 1, 1] = 1.0
            M[..., 1, 0] = e
            return np.einsum("...ij,...jk,...kl->...il", N, M, _adjugate(N))
        if label.startswith("circle"):
            endpoint = "b" if label.endswith("b") else "a"
            x0 = b if endpoint == "b" else a
            w = zs - x0
            ang = np.arctan2(w.imag, w.real)
            e = np.exp(n * phase(m, zs) / 2.0)
            # P^{-1} = D^{-1} F^{-1}, with F constant per sector
            Pinv = np.empty(zs.shape + (2, 2), dtype=complex)
            for i in np.ndindex(zs.shape):
                if endpoint == "b":
                    F = _sector_prefactor_b(float(ang[i]), self.params.theta1, None)
                else:
                    F = _sector_prefactor_a(float(ang[i]), self.params.theta2, None)
                Finv = np.array([[F[1, 1], -F[0, 1]], [-F[1, 0], F[0, 0]]])
                Pinv[i] = np.diag([1.0 / e[i], e[i]]) @ Finv
            return np.einsum("...ij,...jk->...ik", N, Pinv)
        raise ValueError(f"unknown arc label {label!r}")

    def jump_norm(self, label, zs):
        """||G - I||_F, vectorized; for the unipotent lens/ray jumps this is
        |e| * (|nu-column norm|)(|inverse-row norm|) in closed form."""
        zs = np.asarray(zs, dtype=complex)
        m, n = self.measure, self.n
        a, b = m.support
        if label.startswith("lens"):
            v = ((zs - b) / (zs - a)) ** 0.25
            N = _batched_parametrix(v)
            e = np.abs(np.exp(n * phase(m, zs)))
            c2 = np.abs(N[..., 0, 1]) ** 2 + np.abs(N[..., 1, 1]) ** 2
            return e * c2
        if label.startswith("ray"):
            x = zs.real
            v = ((x - b + 0j) / (x - a)) ** 0.25
            N = _batched_parametrix(v)
            e = np.exp(-n * np.real(phase(m, x + 0j, +1)))
            c1 = np.abs(N[..., 0, 0]) ** 2 + np.abs(N[..., 1, 0]) ** 2
            return e * c1
        G = self(label, zs) - np.eye(2)
        return np.sqrt((np.abs(G) ** 2).sum(axis=(-2, -1)))


def _ray_reach(measure, n, start, direction, eps):
    """Extend along the axis until the ray jump entry decays below eps/100."""
    x, step = start, max(1.0, (measure.b - measure.a) / 2.0)
    for _ in range(200):
        x = x + direction * step
        if math.exp(-n * phase(measure, x, +1).real) < eps * 1e-2:
            return x
        step *= 2.0
    raise GeometryError("ray jump does not decay; weight may not be admissible")


def _tent_apex(measure, n, pa_up, pb_up, eps):
    """Lens apex over the band: the highest height keeping Re(phase) <= 0
    along the whole tent.

    Steep segments are essential: along them |Im phi| stays comparable to
    |Re phi|, so the stubs kept by truncation carry a bounded number of
    oscillations of e^{n phi}.  Fields like x^8 cap the admissible height
    (the decay strip above the band is shallow), which is why the height
    cannot simply follow the lens angles to their natural intersection.
    """
    a, b = measure.support
    mid = 0.5 * (pa_up.real + pb_up.real)
    h = 1.15 * max(pa_up.imag, pb_up.imag)
    best_h = None
    for _ in range(22):
        apex = complex(mid, h)
        smp = np.concatenate(
            [pa_up + np.linspace(0.02, 1.0, 41) * (apex - pa_up),
             apex + np.linspace(0.0, 0.98, 41) * (pb_up - apex)]
        )
        re_phi = np.real(phase(measure, smp))
        if n * re_phi.max() <= 5.0:
            best_h = h
        elif best_h is not None:
            break
        h *= 1.35
        if h > 2.5 * (b - a):
            break
    if best_h is None:
        raise GeometryError("no admissible lens height: Re(phase) not negative above the band")
    return complex(mid, best_h)


def build_phi_rhp(measure, n, field=None, params=None):
    """Contours and jump evaluator of the deformed problem for degree n.

    Geometry: polygonal circles about both endpoints (counterclockwise),
    lens segments between the circle exit points at the lens angles, and
    real-axis rays beyond the circles; lens and ray arcs are truncated by the
    adaptive algorithm.  There is no jump on the band between the discs.
    """
    params = params or DeformationParams()
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    a, b = measure.support
    ev = PhiJumpEvaluator(measure, n, params)
    r_a, r_b = ev.r_a, ev.r_b
    if r_a + r_b >= (b - a) * (1.0 - 1e-12):
        raise GeometryError("endpoint discs overlap; decrease r0")
    th1, th2 = params.theta1, params.theta2

    arcs, labels = [], []
    # polygon vertices at the junction angles, plus midpoints of the two wide
    # sectors so no chord subtends more than ~a third of the circle
    for which, center, r, vertex_angles in (
        ("circle-b", b, r_b,
         [0.0, (math.pi - th1) / 2.0, math.pi - th1, math.pi,
          math.pi + th1, 2.0 * math.pi - (math.pi - th1) / 2.0]),
        ("circle-a", a, r_a,
         [0.0, th2, (th2 + math.pi) / 2.0, math.pi,
          (3.0 * math.pi - th2) / 2.0, 2.0 * math.pi - th2]),
    ):
        angs = vertex_angles + [vertex_angles[0] + 2.0 * math.pi]
        verts = [center + r * complex(math.cos(t), math.sin(t)) for t in angs]
        for p, q in zip(verts[:-1], verts[1:]):
            arcs.append(from_endpoints(p, q, params.circle_count))
            labels.append(which)

    # lens tent: from the circle exit points over the band through an apex
    # whose height adapts to the decay strip of Re(phase); oscillation of
    # e^{n phi} along the kept stubs stays bounded by the truncation threshold
    pa_up = a + r_a * complex(math.cos(th2), math.sin(th2))
    pb_up = b + r_b * complex(math.cos(math.pi - th1), math.sin(math.pi - th1))
    apex = _tent_apex(measure, n, pa_up, pb_up, params.epsilon_trunc)

    def lens_count_for(p, q):
        # seed the count from the live phase sweep along the segment; at
        # small n the tent middle is not yet dead and e^{n phi} oscillates
        smp = p + np.linspace(0.01, 0.99, 81) * (q - p)
        nphi = n * phase(measure, smp)
        alive = nphi.real >= -40.0
        dim = np.abs(np.diff(nphi.imag))
        tv = float(dim[alive[:-1] & alive[1:]].sum())
        return max(params.lens_count, min(160, 16 + math.ceil(1.2 * tv)))

    lens_parents = [
        ("lens-upper", from_endpoints(pa_up, apex, lens_count_for(pa_up, apex))),
        ("lens-upper", from_endpoints(apex, pb_up, lens_count_for(apex, pb_up))),
        ("lens-lower", from_endpoints(pa_up.conjugate(), apex.conjugate(),
                                      lens_count_for(pa_up.conjugate(), apex.conjugate()))),
        ("lens-lower", from_endpoints(apex.conjugate(), pb_up.conjugate(),
                                      lens_count_for(apex.conjugate(), pb_up.conjugate()))),
    ]
    ray_parents = [
        ("ray-right", from_endpoints(b + r_b, _ray_reach(measure, n, b + r_b, +1.0, params.epsilon_trunc), params.ray_count)),
        ("ray-left", from_endpoints(_ray_reach(measure, n, a - r_a, -1.0, params.epsilon_trunc), a - r_a, params.ray_count)),
    ]
    for label, parent in lens_parents + ray_parents:
        norm = lambda k, lb=label: ev.jump_norm(lb, k)
        for sub in truncate_contour(parent, norm, params.epsilon_trunc, params.n_grid):
            arcs.append(sub)
            labels.append(label)
    return ContourSet(arcs, labels), ev
