"""Oriented affine contour arcs and adaptive contour truncation.

Every arc is an affine image of [-1, 1]: z = alpha*t + beta.  Curved pieces
(the parametrix circles) are realized as polygons of such arcs with vertices
pinned at the points where other contours attach, which is a valid deformation
because the jump functions extend analytically between the circle and its
inscribed polygon.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

DEFAULT_EPSILON = 1e-14
DEFAULT_NGRID = 200


@dataclass(frozen=True)
class AffineArc:
    """Oriented segment {alpha*t + beta : t in [-1, 1]}."""

    alpha: complex
    beta: complex
    count: int = 24

    def __post_init__(self):
        if self.alpha == 0:
            raise ValueError("alpha must be nonzero")
        if self.count < 1:
            raise ValueError("collocation count must be positive")

    def map(self, t):
        return self.alpha * np.asarray(t) + self.beta

    def unmap(self, z):
        return (np.asarray(z) - self.beta) / self.alpha

    @property
    def start(self):
        return self.beta - self.alpha

    @property
    def end(self):
        return self.beta + self.alpha

    @property
    def length(self):
        return 2.0 * abs(self.alpha)

    def nodes(self):
        """Second-kind Chebyshev nodes on the arc (representation grid)."""
        m = self.count
        if m == 1:
            t = np.array([0.0])
        else:
            t = -np.cos(np.pi * np.arange(m) / (m - 1))
        return self.map(t)


def from_endpoints(p, q, count=24):
    return AffineArc((q - p) / 2.0, (q + p) / 2.0, count)


@dataclass(frozen=True)
class ContourSet:
    """A collection of arcs with parallel role labels."""

    arcs: tuple
    labels: tuple = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "arcs", tuple(self.arcs))
        if self.labels is None:
            object.__setattr__(self, "labels", tuple("band" for _ in self.arcs))
        else:
            object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.labels) != len(self.arcs):
            raise ValueError("labels must match arcs one-to-one")

    def __len__(self):
        return len(self.arcs)

    def __iter__(self):
        return iter(zip(self.arcs, self.labels))

    @property
    def total_count(self):
        return sum(a.count for a in self.arcs)


def segments_overlap(a1, a2, tol=1e-12):
    """True when two arcs share a subsegment of positive length."""
    # parallel check via cross product of directions
    d1, d2 = a1.alpha, a2.alpha
    cross = (d1.real * d2.imag - d1.imag * d2.real) if True else 0.0
    scale = abs(d1) * abs(d2)
    if abs(cross) > tol * scale:
        return False
    # collinear check: a2's center must lie on a1's line
    off = a2.beta - a1.beta
    cr2 = off.real * d1.imag - off.imag * d1.real
    if abs(cr2) > tol * max(abs(d1), 1.0) * max(abs(off), 1.0):
        return False
    # project a2 endpoints onto a1's parameter
    t1 = ((a2.start - a1.beta) / a1.alpha).real
    t2 = ((a2.end - a1.beta) / a1.alpha).real
    lo, hi = min(t1, t2), max(t1, t2)
    inter = min(hi, 1.0) - max(lo, -1.0)
    return inter > tol


def truncate_contour(arc, jump_norm, epsilon=DEFAULT_EPSILON, grid_density=DEFAULT_NGRID):
    """Discard the parts of `arc` where the jump is within epsilon of identity.

    Walks a uniform grid of ceil((|alpha|+1)*grid_density) points, detects sign
    changes of ||G-I|| - epsilon, inserts grid midpoints there, and pairs the
    resulting points into straight sub-arcs.  An everywhere-small jump yields
    the empty list.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if grid_density <= 0:
        raise ValueError("grid_density must be positive")
    m_grid = math.ceil((abs(arc.alpha) + 1.0) * grid_density)
    j = np.arange(1, m_grid + 1)
    k = arc.map(2.0 * j / m_grid - 1.0)
    try:
        g = np.asarray(jump_norm(k), dtype=float)
        if g.shape != k.shape:
            raise TypeError
    except (TypeError, ValueError):
        g = np.array([jump_norm(kj) for kj in k], dtype=float)
    s = []
    if g[0] >= epsilon:
        s.append(k[0])
    diff = g - epsilon
    for i in range(m_grid - 1):
        if diff[i] * diff[i + 1] < 0.0:
            s.append((k[i] + k[i + 1]) / 2.0)
    if len(s) % 2 == 1:
        s.append(k[-1])
    s.sort(key=lambda p: arc.unmap(p).real)
    # snap kept endpoints that sit within ~a grid cell of the parent ends onto
    # the exact ends: the uniform grid starts one cell inside the arc, and an
    # attached sub-arc must meet its junction exactly (the one-cell sliver of
    # an O(1) jump would otherwise be silently dropped)
    snap = 3.0 / m_grid
    out = []
    for i in range(0, len(s), 2):
        p, q = s[i], s[i + 1]
        if arc.unmap(p).real < -1.0 + snap:
            p = arc.start
        if arc.unmap(q).real > 1.0 - snap:
            q = arc.end
        if p != q:
            out.append(AffineArc((q - p) / 2.0, (q + p) / 2.0, arc.count))
    return out


def scale_contour(template, endpoint, rate, n, reflect=False):
    """Shrink a pre-scaled template onto an endpoint: +-n^(-rate)*template + endpoint."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    s = float(n) ** (-rate)
    if reflect:
        s = -s
    arcs = [replace(a, alpha=s * a.alpha, beta=s * a.beta + endpoint) for a in template.arcs]
    return ContourSet(arcs, template.labels)


def circle_polygon(center, radius, angles, count=32, label="circle"):
    """Counterclockwise polygon inscribed in a circle, vertices at `angles`.

    Vertices must be given in increasing angular order; the polygon closes
    from the last angle back to the first (plus a full turn).
    """
    ang = list(angles) + [angles[0] + 2.0 * math.pi]
    verts = [center + radius * complex(math.cos(t), math.sin(t)) for t in ang]
    arcs, labels = [], []
    for p, q in zip(verts[:-1], verts[1:]):
        arcs.append(from_endpoints(p, q, count))
        labels.append(label)
    return arcs, labels


def omega_template(theta, stub_len=3.0, circle_count=32, stub_count=24):
    """Pre-scaled endpoint neighborhood: unit circle polygon plus two straight
    stubs of length `stub_len` leaving at the lens angles (pi - theta measured
    from the outward axis direction).  Used for the right endpoint; reflect
    for the left."""
    lens_ang = math.pi - theta
    arcs, labels = circle_polygon(0.0, 1.0, [0.0, lens_ang, math.pi, -lens_ang], circle_count)
    for sgn in (+1.0, -1.0):
        direction = complex(math.cos(sgn * lens_ang), math.sin(sgn * lens_ang))
        p = direction
        q = (1.0 + stub_len) * direction
        arcs.append(from_endpoints(p, q, stub_count))
        labels.append("lens-upper" if sgn > 0 else "lens-lower")
    return ContourSet(arcs, labels)


OMEGA0 = omega_template(math.pi / 3.0)
OMEGA1 = omega_template(2.0 * math.pi / 7.0)
