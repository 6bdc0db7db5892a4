import cmath
import math

import numpy as np
import pytest

from rhjacobi.deform import (
    DeformationParams,
    PhiJumpEvaluator,
    build_phi_rhp,
    disc_radius,
    global_parametrix,
    global_parametrix_inv,
    local_parametrix,
    parametrix_moment,
)
from rhjacobi.equilibrium import AnalyticField, compute_equilibrium, phase, phase_coefficient
from rhjacobi.errors import InvalidDomainError, SideRequiredError

GAUSS = AnalyticField(lambda x: x * x, lambda x: 2.0 * x)
J = np.array([[0.0, 1.0], [-1.0, 0.0]])


@pytest.fixture(scope="module")
def measure():
    return compute_equilibrium(GAUSS, 1.0)


class TestGlobalParametrix:
    def test_identity_at_infinity(self):
        N = global_parametrix(1e8 + 0j, -1.0, 1.0)
        assert np.abs(N - np.eye(2)).max() < 1e-7

    def test_unit_determinant(self):
        N = global_parametrix(2.0 + 3.0j, -1.0, 1.0)
        assert abs(np.linalg.det(N) - 1.0) < 1e-13

    def test_band_jump(self):
        a, b = -1.0, 1.0
        x = 0.5 * (a + b)
        Np = global_parametrix(x, a, b, +1)
        Nm = global_parametrix(x, a, b, -1)
        assert np.abs(Np - Nm @ J).max() < 1e-11

    def test_inverse(self):
        z = 0.3 + 1.7j
        N = global_parametrix(z, -2.0, 1.5)
        assert np.abs(N @ global_parametrix_inv(z, -2.0, 1.5) - np.eye(2)).max() < 1e-13

    def test_side_required_on_band(self):
        with pytest.raises(SideRequiredError):
            global_parametrix(0.0, -1.0, 1.0)


class TestParametrixMoment:
    def test_unit_interval(self):
        M = parametrix_moment(-1.0, 1.0)
        assert np.abs(M - np.array([[0.0, 0.5j], [-0.5j, 0.0]])).max() < 1e-15

    def test_against_large_z_oracle(self):
        a, b = -0.7, 2.2
        z = 1e6 + 1e6j
        approx = z * (global_parametrix(z, a, b) - np.eye(2))
        assert np.abs(approx - parametrix_moment(a, b)).max() < 1e-5

    def test_structure(self):
        # anti-diagonal and antisymmetric (hence Hermitian for real a < b)
        M = parametrix_moment(-2.0, 0.5)
        assert M[0, 0] == 0 and M[1, 1] == 0
        assert M[0, 1] == -M[1, 0]
        assert np.abs(M - M.conj().T).max() < 1e-15

    def test_degenerate_interval(self):
        eps = 1e-9
        assert np.abs(parametrix_moment(-eps, eps)).max() < 1e-9


class TestLocalParametrix:
    N_DEG = 9

    def sector_point(self, measure, endpoint, ang, frac=0.5, n=N_DEG):
        a, b = measure.support
        r = disc_radius(
            DeformationParams(), n, a, b, endpoint, phase_coefficient(measure, endpoint)
        )
        x0 = b if endpoint == "b" else a
        return x0 + frac * r * cmath.exp(1j * ang)

    def test_identity_sector_is_diagonal(self, measure):
        # between the exterior axis and the upper lens the prefactor is I
        z = self.sector_point(measure, "b", 0.3)
        P = local_parametrix(z, "b", measure, self.N_DEG)
        e = np.exp(self.N_DEG * phase(measure, z) / 2.0)
        assert np.abs(P - np.diag([e, 1.0 / e])).max() < 1e-13

    def test_unit_determinant_all_sectors(self, measure):
        for endpoint in ("a", "b"):
            for ang in (0.2, 1.2, 2.5, 3.0, -0.2, -1.2, -2.5, -3.0):
                z = self.sector_point(measure, endpoint, ang)
                P = local_parametrix(z, endpoint, measure, self.N_DEG)
                assert abs(np.linalg.det(P) - 1.0) < 1e-12, (endpoint, ang)

    def test_prefactor_above_lens_at_b(self, measure):
        # just above the upper lens direction the prefactor is [[1,0],[-1,1]]
        th1 = DeformationParams().theta1
        z = self.sector_point(measure, "b", math.pi - th1 + 0.01)
        P = local_parametrix(z, "b", measure, self.N_DEG)
        e = np.exp(self.N_DEG * phase(measure, z) / 2.0)
        want = np.array([[1.0, 0.0], [-1.0, 1.0]]) @ np.diag([e, 1.0 / e])
        assert np.abs(P - want).max() < 1e-13

    def test_outside_disc_rejected(self, measure):
        with pytest.raises(InvalidDomainError):
            local_parametrix(measure.b + 1.0, "b", measure, 64)

    @pytest.mark.parametrize("endpoint", ["a", "b"])
    def test_lens_jump_match(self, measure, endpoint):
        # across the lens rays: P+ = P- [[1,0],[e^{n phi},1]]
        n = self.N_DEG
        prm = DeformationParams()
        lens_ang = math.pi - prm.theta1 if endpoint == "b" else prm.theta2
        eps = 1e-9
        for sgn in (+1, -1):
            zp = self.sector_point(measure, endpoint, sgn * (lens_ang + eps))
            zm = self.sector_point(measure, endpoint, sgn * (lens_ang - eps))
            z0 = self.sector_point(measure, endpoint, sgn * lens_ang)
            # + side of the a->b oriented lens is the side away from the band
            if sgn > 0:
                plus_pt, minus_pt = (zp, zm) if endpoint == "a" else (zm, zp)
            else:
                plus_pt, minus_pt = (zm, zp) if endpoint == "a" else (zp, zm)
            Pp = local_parametrix(plus_pt, endpoint, measure, n)
            Pm = local_parametrix(minus_pt, endpoint, measure, n)
            G = np.linalg.solve(Pm, Pp)
            want = np.array([[1.0, 0.0], [np.exp(n * phase(measure, z0)), 1.0]])
            assert np.abs(G - want).max() < 1e-6, (endpoint, sgn)

    @pytest.mark.parametrize("endpoint", ["a", "b"])
    def test_band_jump_match(self, measure, endpoint):
        # across the band inside the disc: P+ = P- [[0,1],[-1,0]]
        n = self.N_DEG
        ang = math.pi if endpoint == "b" else 0.0
        z = self.sector_point(measure, endpoint, ang)
        Pp = local_parametrix(z, endpoint, measure, n, side=+1)
        Pm = local_parametrix(z, endpoint, measure, n, side=-1)
        assert np.abs(Pp - Pm @ J).max() < 1e-11

    @pytest.mark.parametrize("endpoint", ["a", "b"])
    def test_exterior_jump_match(self, measure, endpoint):
        # across the exterior axis: P+ = P- [[1, e^{-n Re phi}],[0,1]]
        n = self.N_DEG
        ang = 0.0 if endpoint == "b" else math.pi
        z = self.sector_point(measure, endpoint, ang)
        Pp = local_parametrix(z, endpoint, measure, n, side=+1)
        Pm = local_parametrix(z, endpoint, measure, n, side=-1)
        G = np.linalg.solve(Pm, Pp)
        want = np.array([[1.0, math.exp(-n * phase(measure, z.real, +1).real)], [0.0, 1.0]])
        assert np.abs(G - want).max() < 1e-11, endpoint


class TestBuildPhiRHP:
    def test_structure_and_labels(self, measure):
        cs, ev = build_phi_rhp(measure, 24)
        labels = [l for _, l in cs]
        assert labels.count("circle-a") == 6
        assert labels.count("circle-b") == 6
        assert labels.count("ray-left") >= 1
        assert labels.count("ray-right") >= 1
        assert labels.count("lens-upper") >= 1
        assert labels.count("lens-lower") >= 1

    def test_truncated_ends_near_identity(self, measure):
        cs, ev = build_phi_rhp(measure, 24)
        prm = DeformationParams()
        for arc, label in cs:
            if label.startswith("circle"):
                continue
            for t in (-1.0, 1.0):
                z = arc.map(t)
                # free stub ends sit below ~10*eps; attached ends are O(1)
                gap = np.linalg.norm(ev(label, z) - np.eye(2))
                near_b = abs(z - (measure.b + disc_radius(prm, 24, *measure.support, "b"))) < 1e-9
                attached = (
                    min(abs(z - measure.a), abs(z - measure.b))
                    < 2.5 * max(disc_radius(prm, 24, *measure.support, "a"),
                                disc_radius(prm, 24, *measure.support, "b"))
                )
                if not attached:
                    assert gap <= 10.0 * prm.epsilon_trunc * 1e2 or gap < 1e-11

    def test_unit_determinant_at_nodes(self, measure):
        cs, ev = build_phi_rhp(measure, 16)
        for arc, label in cs:
            for z in arc.nodes()[1:-1]:
                d = np.linalg.det(ev(label, complex(z)))
                assert abs(d - 1.0) < 1e-11, label

    def test_junction_cyclic_products(self, measure):
        # at every point where arcs meet, the oriented product of jumps is I
        cs, ev = build_phi_rhp(measure, 16)
        prm = DeformationParams()
        ends = {}
        for idx, (arc, label) in enumerate(cs):
            for t, kind in ((-1.0, "out"), (1.0, "in")):
                z = complex(arc.map(t))
                key = (round(z.real, 9), round(z.imag, 9))
                ends.setdefault(key, []).append((idx, kind, z))
        checked = 0
        for key, members in ends.items():
            if len(members) < 2:
                continue
            inward = []
            for idx, kind, z in members:
                arc, label = cs.arcs[idx], cs.labels[idx]
                other = arc.map(0.9 if kind == "out" else -0.9)
                angle = cmath.phase(other - z)
                inward.append((angle, idx, kind, z))
            inward.sort()
            total = np.eye(2)
            for angle, idx, kind, z in inward:
                arc, label = cs.arcs[idx], cs.labels[idx]
                interior = complex(arc.map(-0.9 if kind == "out" else 0.9))
                toward = (interior - z) / abs(interior - z)
                G = ev(label, z, toward=toward)
                total = total @ (G if kind == "out" else np.linalg.inv(G))
            # identity up to roundoff amplified by the e^{|n phi|} factors
            # the parametrix diagonals carry at the junctions (~e^8 * eps)
            assert np.abs(total - np.eye(2)).max() < 1e-10, key
            checked += 1
        assert checked >= 6  # both circles' junctions at least

    def test_scaling_law_radius(self, measure):
        prm = DeformationParams()
        r1 = disc_radius(prm, 10, *measure.support, "b")
        r2 = disc_radius(prm, 80, *measure.support, "b")
        assert r2 / r1 == pytest.approx(8.0 ** (-2.0 / 3.0))

    def test_radius_clamp_keeps_discs_apart(self, measure):
        # huge r0 is clamped to (b-a)/4, so the discs can never collide
        a, b = measure.support
        prm = DeformationParams(r0=100.0)
        assert disc_radius(prm, 1, a, b, "b") == pytest.approx((b - a) / 4.0)
        cs, ev = build_phi_rhp(measure, 2, params=prm)
        assert len(cs) > 0


