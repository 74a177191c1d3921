import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fluidcascade import constructions as C
from fluidcascade import spectral as sp
from fluidcascade.errors import ConfigError, InfeasibleError

TWO_PI = 2 * np.pi


class TestEulerDatum:
    """Shear plus lacunary cosines."""

    def test_modes(self):
        u = C.euler_u0(C.EulerInitParams(1.0, 3))
        assert len(u) == 2 * 5
        assert np.allclose(u[(0, 1)], [0.5, 0])
        assert np.allclose(u[(8, 0)], [0, 0.5 / 8])
        assert np.allclose(u[(-4, 0)], [0, 0.5 / 4])

    def test_divergence_free(self):
        assert sp.divergence_residual(C.euler_u0(C.EulerInitParams(0.5, 6))) == 0.0

    def test_energy(self):
        s, Q = 1.0, 4
        u = C.euler_u0(C.EulerInitParams(s, Q))
        expected = 2 * math.pi**2 * (1 + sum(4.0 ** (-q * s) for q in range(Q + 1)))
        assert sp.l2_norm_exact(u) ** 2 == pytest.approx(expected)

    def test_bad_Q(self):
        with pytest.raises(ConfigError):
            C.EulerInitParams(1.0, 0)

    def test_range(self):
        C.EulerInitParams(0.1, 3).check_range(4.0)
        C.EulerInitParams(2.1, 3).check_range(1.0)
        with pytest.raises(ConfigError):
            C.EulerInitParams(0.0, 3).check_range(4.0)
        with pytest.raises(ConfigError):
            C.EulerInitParams(2.0, 3).check_range(1.0)


class TestBlocks:
    """Lattice boxes and their validation."""

    def test_hand_boxes_q3(self):
        bs = C.make_blocks(1, C.NseInitParams(shells=(3, 8)))
        assert bs.A.lo == (7, -1, -1) and bs.A.hi == (9, 1, 1)
        assert bs.B.lo == (0, 0, 4) and bs.B.hi == (0, 0, 4)
        assert bs.C.lo == (7, -1, 3) and bs.C.hi == (9, 1, 5)
        assert bs.A_star.lo == (-9, -1, -1) and bs.A.count == 27

    def test_minkowski_is_exact(self):
        bs = C.make_blocks(1, C.NseInitParams(shells=(4,)))
        assert bs.B.count > 1
        pts = {tuple(a + b) for a in bs.A.points() for b in bs.B.points()}
        assert pts == {tuple(p) for p in bs.C.points()}

    def test_gap_report(self):
        rep = C.validate_gaps(C.NseInitParams(epsilon=0.5, shells=(3, 7, 15)))
        assert [r for *_, r, _ in rep.pairs] == [0.5, 0.5]
        assert not rep.passed
        assert C.validate_gaps(C.NseInitParams(epsilon=0.51, shells=(3, 7))).passed

    def test_gap_refused(self):
        with pytest.raises(ConfigError):
            C.build_nse_datum(C.NseInitParams(epsilon=0.5, shells=(3, 7)))

    def test_wide_blocks_refused(self):
        with pytest.raises(ConfigError):
            C.build_nse_datum(C.NseInitParams(c=0.45, shells=(3, 8)))

    @pytest.mark.parametrize("kw", [{"c": 0.0}, {"c": 1.0}, {"epsilon": 0.0}, {"shells": ()},
                                    {"shells": (0, 5)}, {"shells": (5, 3)}])
    def test_bad_params(self, kw):
        with pytest.raises(ConfigError):
            C.NseInitParams(**kw)

    def test_bad_index(self):
        with pytest.raises(ConfigError):
            C.make_blocks(3, C.NseInitParams(shells=(3, 8)))

    def test_norms(self):
        b = C.LatticeBlock((-1, 2, 3), (1, 4, 3))
        assert b.min_norm() == pytest.approx(math.sqrt(13))
        assert b.max_norm() == pytest.approx(math.sqrt(1 + 16 + 9))


@pytest.fixture(scope="module")
def datum():
    return C.build_nse_datum(C.NseInitParams(epsilon=0.51, shells=(2, 5)))


class TestNseDatum:
    """The assembled field U."""

    def test_real_and_divergence_free(self, datum):
        u = datum.field()
        assert u.reality_defect() == 0.0
        assert sp.divergence_residual(u) <= 1e-14

    def test_amplitudes(self, datum):
        u = datum.field()
        bs = datum.blocksets[0]
        a = 4.0**-2
        assert np.allclose(u[bs.A.lo], a * sp.leray_project(bs.A.lo, C.E2))
        assert np.allclose(u[bs.C.lo], 1j * a * sp.leray_project(bs.C.lo, C.E2_MINUS_E1))
        assert np.allclose(u[bs.B.lo], a * sp.leray_project(bs.B.lo, C.E1))

    def test_unit_lower_block(self):
        d = C.build_nse_datum(C.NseInitParams(epsilon=0.51, shells=(2, 5), unit_lower_block=True))
        assert d.lower_coef(2) == 1.0

    def test_counts(self, datum):
        assert datum.count("all") == len(datum.field())
        assert datum.count("window", 1) + datum.count("above", 1) == datum.count("all")

    def test_parseval_matches_field(self, datum):
        u = datum.field()
        assert datum.l2_squared() == pytest.approx(sp.l2_norm_exact(u) ** 2, rel=1e-13)

    def test_guard(self, datum):
        for j in (1, 2):
            assert min(p.min_projection() for p in datum.pieces(j)) >= 0.5

    def test_budget(self, datum):
        with pytest.raises(InfeasibleError):
            datum.field(max_points=10)

    def test_sobolev_rows(self, datum):
        rows = C.sobolev_profile(datum, 0.0)
        assert [r[:2] for r in rows] == [(1, 2), (2, 5)]


class TestBoxSums:
    def test_euler_maclaurin_agrees(self):
        for v in (C.E1, C.E2, C.E2_MINUS_E1):
            errs = []
            for s in (1, 2):
                blk = C.LatticeBlock((100 * s, -20 * s, -20 * s), (140 * s, 20 * s, 20 * s))
                exact = C.projected_box_sum(blk, v)
                errs.append(abs(C.projected_box_sum(blk, v, force_em=True) - exact) / exact)
            assert errs[0] <= 1e-7
            # the neglected terms shrink at least like the cube of the scale
            assert errs[1] <= errs[0] / 8

    def test_origin_box(self):
        blk = C.LatticeBlock((-1, -1, -1), (1, 1, 1))
        # origin contributes |v|^2; the other 26 points by hand
        pts = blk.points().astype(float)
        vals = [1.0 if not p.any() else 1 - p[0] ** 2 / (p @ p) for p in pts]
        assert C.projected_box_sum(blk, C.E1) == pytest.approx(sum(vals))

    def test_em_refuses_origin(self):
        with pytest.raises(InfeasibleError):
            C.projected_box_sum(C.LatticeBlock((0, 0, 0), (1, 1, 1)), C.E1, force_em=True)


@settings(max_examples=20, deadline=None)
@given(lo=st.tuples(*[st.integers(-5, 5)] * 3), shape=st.tuples(*[st.integers(0, 3)] * 3),
       shift=st.tuples(*[st.integers(-4, 4)] * 3))
def test_block_algebra(lo, shape, shift):
    a = C.LatticeBlock(lo, tuple(l + s - 1 for l, s in zip(lo, shape)))
    b = C.LatticeBlock(shift, shift)
    assert (a + b).count == a.count
    assert (-a).count == a.count and (-(-a)) == a
    if not a.empty:
        assert a.intersects(a)
