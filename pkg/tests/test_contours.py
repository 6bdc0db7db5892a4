import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rhjacobi.contours import (
    OMEGA0,
    OMEGA1,
    AffineArc,
    ContourSet,
    from_endpoints,
    scale_contour,
    segments_overlap,
    truncate_contour,
)

finite = st.floats(min_value=-50, max_value=50, allow_nan=False)


class TestAffineArc:
    def test_zero_alpha_rejected(self):
        with pytest.raises(ValueError):
            AffineArc(0.0, 1.0)

    @given(finite, finite, finite, finite, st.floats(-1, 1))
    @settings(max_examples=50, deadline=None)
    def test_map_unmap_round_trip(self, ar, ai, br, bi, t):
        alpha = complex(ar, ai) or 1.0
        arc = AffineArc(alpha, complex(br, bi))
        assert abs(arc.unmap(arc.map(t)) - t) < 1e-13 * max(1.0, abs(complex(br, bi)) / abs(alpha))

    def test_nodes_endpoints(self):
        arc = from_endpoints(1j, 2 + 1j, count=5)
        nd = arc.nodes()
        assert nd[0] == pytest.approx(1j)
        assert nd[-1] == pytest.approx(2 + 1j)


class TestOverlap:
    def test_disjoint(self):
        a = from_endpoints(0.0, 1.0)
        b = from_endpoints(2.0, 3.0)
        assert not segments_overlap(a, b)

    def test_touching_endpoints_not_overlap(self):
        a = from_endpoints(0.0, 1.0)
        b = from_endpoints(1.0, 2.0)
        assert not segments_overlap(a, b)

    def test_collinear_overlap(self):
        a = from_endpoints(0.0, 1.0)
        b = from_endpoints(0.5, 2.0)
        assert segments_overlap(a, b)

    def test_crossing_not_overlap(self):
        # transversal crossing has zero shared length
        a = from_endpoints(-1.0, 1.0)
        b = from_endpoints(-1j, 1j)
        assert not segments_overlap(a, b)


class TestTruncate:
    def test_all_below_epsilon_empty(self):
        arc = from_endpoints(-1.0, 1.0)
        assert truncate_contour(arc, lambda k: 0.0, 1e-8, 50) == []

    def test_monotone_decreasing_single_crossing(self):
        # ||G-I|| decays from 1 at the left end through eps once
        arc = from_endpoints(0.0, 10.0, count=16)
        eps = 1e-3
        out = truncate_contour(arc, lambda k: math.exp(-k.real), eps, 100)
        assert len(out) == 1
        sub = out[0]
        # the kept piece snaps onto the parent start (jump is large there)
        assert abs(sub.start - arc.start) < 1e-12
        crossing = -math.log(eps)
        assert abs(sub.end.real - crossing) < 10.0 / math.ceil(6.0 * 100) + 1e-12
        assert sub.count == 16

    def test_gaussian_hump_crossings(self):
        # jump e^{-x^2} on [-10,10]: kept part ends within one grid cell of
        # +-sqrt(ln 1e8) ~ +-4.29193, located by dense evaluation
        arc = from_endpoints(-10.0, 10.0, count=24)
        out = truncate_contour(arc, lambda k: math.exp(-k.real**2), 1e-8, 100)
        assert len(out) == 1
        sub = out[0]
        x = math.sqrt(math.log(1e8))
        cell = 20.0 / math.ceil(11.0 * 100)
        assert abs(sub.start.real + x) <= cell
        assert abs(sub.end.real - x) <= cell
        assert sub.count == 24

    def test_consistency_bound_after_truncation(self):
        # every removed point obeys the a-posteriori bound built from the
        # gradient of ||G-I||^2 on a dense reference grid
        arc = from_endpoints(-8.0, 8.0, count=8)
        eps = 1e-6
        n_grid = 200
        fn = lambda k: math.exp(-abs(k.real)) * (1.1 + math.sin(3 * k.real) * 0.1)
        kept = truncate_contour(arc, fn, eps, n_grid)
        dense = np.linspace(-8, 8, 4001)
        vals = np.array([fn(complex(x)) for x in dense])
        grad_sq = np.abs(np.gradient(vals**2, dense)).max()
        bound = math.sqrt(grad_sq / ((abs(arc.alpha) + 1) * n_grid) + eps**2)
        for x in dense:
            inside = any(
                min(s.start.real, s.end.real) - 1e-12 <= x <= max(s.start.real, s.end.real) + 1e-12
                for s in kept
            )
            if not inside:
                assert fn(complex(x)) <= bound * 1.000001

    def test_bad_args(self):
        arc = from_endpoints(0.0, 1.0)
        with pytest.raises(ValueError):
            truncate_contour(arc, lambda k: 1.0, -1.0, 10)
        with pytest.raises(ValueError):
            truncate_contour(arc, lambda k: 1.0, 1e-8, 0)


class TestScale:
    def test_unit_scale_identity(self):
        out = scale_contour(OMEGA0, 0.0, 2.0 / 3.0, 1)
        for (a, la), (b, lb) in zip(out, OMEGA0):
            assert a.alpha == pytest.approx(b.alpha)
            assert a.beta == pytest.approx(b.beta)
            assert la == lb

    def test_n8_shrinks_by_quarter(self):
        b = 3.5
        out = scale_contour(OMEGA0, b, 2.0 / 3.0, 8)
        for (a, _), (t, _) in zip(out, OMEGA0):
            assert a.alpha == pytest.approx(t.alpha / 4.0)
            assert a.beta == pytest.approx(t.beta / 4.0 + b)

    def test_rate_two_sevenths(self):
        out = scale_contour(OMEGA1, 0.0, 2.0 / 7.0, 128)
        for (a, _), (t, _) in zip(out, OMEGA1):
            assert a.alpha == pytest.approx(t.alpha / 4.0)

    def test_reflect_flips_sign(self):
        a0 = -1.25
        out = scale_contour(OMEGA0, a0, 2.0 / 3.0, 8, reflect=True)
        for (a, _), (t, _) in zip(out, OMEGA0):
            assert a.beta == pytest.approx(-t.beta / 4.0 + a0)

    def test_preserves_count_and_arc_number(self):
        out = scale_contour(OMEGA0, 1.0, 2.0 / 3.0, 17)
        assert len(out) == len(OMEGA0)
        assert out.total_count == OMEGA0.total_count

    def test_nonpositive_n_rejected(self):
        with pytest.raises(ValueError):
            scale_contour(OMEGA0, 0.0, 2.0 / 3.0, 0)


class TestContourSet:
    def test_total_count(self):
        cs = ContourSet([from_endpoints(0, 1, 8), from_endpoints(2, 3, 16)], ["band", "band"])
        assert cs.total_count == 24

    def test_label_mismatch(self):
        with pytest.raises(ValueError):
            ContourSet([from_endpoints(0, 1)], ["a", "b"])

    def test_templates_have_stubs(self):
        for tpl in (OMEGA0, OMEGA1):
            labels = [l for _, l in tpl]
            assert labels.count("lens-upper") == 1
            assert labels.count("lens-lower") == 1
            assert labels.count("circle") == 4
