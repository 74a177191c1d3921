import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fluidcascade import spectral as sp
from fluidcascade._clusters import Cluster, clusters_from_modes, trilinear_clusters
from fluidcascade.errors import AliasingError
from fluidcascade.spectral import SparseSpectralField, leray_project

from conftest import cos_field

TWO_PI = 2 * np.pi


def grid_trilinear(u, v, w, N):
    """Quadrature of int v_i d_i w_j u_j on an alias-free grid."""
    ug, vg, wg = (sp.synthesize(f, N).values for f in (u, v, w))
    grads = [sp.synthesize(SparseSpectralField(w.dim, w.k, w.amp * (1j * w.k[:, i:i + 1])), N).values
             for i in range(w.dim)]
    dens = sum(vg[i] * grads[i][j] * ug[j] for i in range(w.dim) for j in range(w.dim))
    return float(dens.mean() * TWO_PI**w.dim)


class TestLeray:
    """Modewise Leray projection."""

    def test_parallel_vector_annihilated(self):
        assert np.allclose(leray_project([1, 0], [1, 0]), 0)

    def test_orthogonal_vector_fixed(self):
        assert np.allclose(leray_project([1, 0], [0, 1]), [0, 1])

    def test_hand_value_3d(self):
        assert np.allclose(leray_project([1, 1, 0], [1, 0, 0]), [0.5, -0.5, 0])

    def test_zero_wavevector_passes(self):
        assert np.allclose(leray_project([0, 0, 0], [1, 2, 3]), [1, 2, 3])

    def test_gradient_field_killed(self):
        k = np.array([[1, 2], [3, -1]])
        u = SparseSpectralField.from_modes(2, k, 1j * k, add_conjugates=True)
        assert len(sp.project_field(u)) == 0

    def test_single_mode_hand_value(self):
        u = SparseSpectralField.from_modes(2, [(0, 3)], [(1, 2)], add_conjugates=True)
        p = sp.project_field(u)
        assert np.allclose(p[(0, 3)], [1, 0]) and np.allclose(p[(0, -3)], [1, 0])

    def test_idempotent(self, rng):
        u = sp.random_field(3, 40, 5, rng, divergence_free=False)
        once = sp.project_field(u)
        twice = sp.project_field(once)
        assert np.array_equal(once.k, twice.k)
        assert np.allclose(once.amp, twice.amp, rtol=0, atol=1e-15)

    def test_divergence_free_unchanged(self, rng):
        u = sp.random_field(2, 30, 6, rng)
        assert np.allclose(sp.project_field(u).amp, u.amp, atol=1e-15)


class TestDivergence:
    def test_projected_field_residual(self, rng):
        u = sp.project_field(sp.random_field(3, 50, 7, rng, divergence_free=False))
        assert sp.divergence_residual(u) <= 1e-12 * np.abs(u.amp).max() * u.max_abs_k()

    def test_unit_residual(self):
        assert sp.divergence_residual(cos_field((1, 0), (2, 0))) == pytest.approx(1.0)

    def test_zero_field(self):
        assert sp.divergence_residual(SparseSpectralField.zero(2)) == 0.0


class TestFieldAlgebra:
    """Canonical form, reality and serialization."""

    def test_reality_enforced(self):
        with pytest.raises(ValueError):
            SparseSpectralField.from_modes(2, [(1, 0)], [(0, 1)])

    def test_zero_amplitudes_dropped(self):
        u = cos_field((1, 0), (0, 1)) - cos_field((1, 0), (0, 1))
        assert len(u) == 0

    def test_json_round_trip(self, rng, tmp_path):
        u = sp.random_field(3, 20, 4, rng)
        u.save(tmp_path / "f.json")
        v = SparseSpectralField.load(tmp_path / "f.json")
        assert np.array_equal(u.k, v.k) and np.array_equal(u.amp, v.amp)

    def test_json_stores_half(self, rng):
        u = sp.random_field(2, 20, 4, rng)
        assert len(u.to_json_dict()["modes"]) == len(u) // 2


class TestAdvect:
    """Exact triad convolution for u . grad v."""

    def test_constant_v(self, rng):
        u = sp.random_field(2, 10, 3, rng)
        v = SparseSpectralField.from_modes(2, [(0, 0)], [(1.0, 2.0)])
        assert len(sp.advect(u, v)) == 0

    def test_shear_is_steady(self):
        u = cos_field((1, 0), (0, 1))
        assert len(sp.advect(u, u)) == 0

    def test_requires_divergence_free(self):
        with pytest.raises(ValueError):
            sp.advect(cos_field((1, 0), (1, 0)), cos_field((1, 0), (0, 1)))

    def test_matches_grid(self, rng):
        for _ in range(3):
            u = sp.random_field(2, 30, 5, rng)
            v = sp.random_field(2, 30, 5, rng)
            exact = sp.advect(u, v)
            N = 64
            ug, vg = sp.synthesize(u, N).values, sp.synthesize(v, N).values
            grad = [sp.synthesize(SparseSpectralField(2, v.k, v.amp * (1j * v.k[:, i:i + 1])), N).values
                    for i in range(2)]
            prod = sum(ug[i] * grad[i] for i in range(2))
            ref = sp.analyze(sp.GridField(2, prod), rtol=1e-15)
            diff = exact - ref
            assert np.abs(diff.amp).max() <= 1e-10 * np.abs(exact.amp).max()


class TestTrilinear:
    """Exact trilinear form against grid quadrature and identities."""

    def test_constant_w(self, rng):
        u, v = sp.random_field(3, 10, 3, rng), sp.random_field(3, 10, 3, rng)
        w = SparseSpectralField.from_modes(3, [(0, 0, 0)], [(1.0, 0, 0)])
        assert sp.trilinear(u, v, w) == 0.0

    def test_antisymmetric_in_outer_slots(self, rng):
        for _ in range(5):
            u, v, w = (sp.random_field(3, 30, 3, rng) for _ in range(3))
            a, b = sp.trilinear(u, v, w), sp.trilinear(w, v, u)
            assert abs(a + b) <= 1e-10 * max(abs(a), 1.0)

    def test_self_transport_vanishes(self, rng):
        u, v = sp.random_field(2, 30, 4, rng), sp.random_field(2, 30, 4, rng)
        assert abs(sp.trilinear(u, v, u)) <= 1e-10 * sp.l2_norm_exact(u) ** 2 * sp.l2_norm_exact(v) * 4

    def test_matches_quadrature(self, rng):
        for dim in (2, 3):
            u, v, w = (sp.random_field(dim, 40, 4, rng) for _ in range(3))
            exact = sp.trilinear(u, v, w)
            ref = grid_trilinear(u, v, w, 32)
            assert exact == pytest.approx(ref, rel=1e-8, abs=1e-9)

    def test_cluster_paths_agree(self, rng):
        u, v, w = (sp.random_field(3, 200, 6, rng) for _ in range(3))
        direct = sp._trilinear_direct(u, v, w)
        clustered = trilinear_clusters(u.clusters, v.clusters, w.clusters)
        assert abs(direct - clustered) <= 1e-11 * abs(direct)

    def test_forced_fft_path(self, rng):
        """Dense box triples routed through the local FFT agree with pair sums."""
        from fluidcascade import _clusters

        boxes = []
        for lo in ((3, -2, -2), (-1, -1, 2), (-5, -2, -5)):
            shape = (3, 5, 5, 5)
            amp = rng.normal(size=shape) + 1j * rng.normal(size=shape)
            boxes.append(Cluster(np.array(lo), amp))
        X, Y, Z = boxes
        a = _clusters._direct_triple(X, Y, Z)
        b = _clusters._fft_triple(X, Y, Z)
        assert abs(a - b) <= 1e-11 * abs(a)


class TestSynthesis:
    def test_shear_samples(self):
        g = sp.synthesize(cos_field((1, 0), (0, 1)), 16)
        x = TWO_PI * np.arange(16) / 16
        assert np.allclose(g.values[1], np.cos(x)[:, None]) and np.allclose(g.values[0], 0)

    def test_zero(self):
        assert not sp.synthesize(SparseSpectralField.zero(2), 8).values.any()

    def test_round_trip(self, rng):
        u = sp.random_field(3, 40, 5, rng)
        v = sp.analyze(sp.synthesize(u, sp.required_resolution(u)))
        assert np.array_equal(u.k, v.k) and np.abs(u.amp - v.amp).max() <= 1e-12

    def test_aliasing_refused(self):
        with pytest.raises(AliasingError):
            sp.synthesize(cos_field((4, 0), (0, 1)), 8)


class TestNorms:
    def test_sup_of_shear(self):
        assert sp.lp_norm(sp.synthesize(cos_field((1, 0), (0, 1)), 16), math.inf) == pytest.approx(1.0)

    def test_l2_of_shear(self):
        u = cos_field((1, 0), (0, 1))
        assert sp.lp_norm(sp.synthesize(u, 16), 2) == pytest.approx(math.sqrt(2 * math.pi**2))
        assert sp.l2_norm_exact(u) == pytest.approx(math.sqrt(2 * math.pi**2))

    def test_zero(self):
        z = SparseSpectralField.zero(2)
        assert sp.l2_norm_exact(z) == 0 and sp.lp_norm(sp.synthesize(z, 8), 3) == 0

    def test_bad_exponent(self):
        with pytest.raises(ValueError):
            sp.lp_norm(sp.synthesize(cos_field((1, 0), (0, 1)), 8), 0.5)

    def test_parseval_matches_quadrature(self, rng):
        u = sp.random_field(3, 40, 5, rng)
        g = sp.synthesize(u, 16)
        assert sp.l2_norm_exact(u) == pytest.approx(sp.lp_norm(g, 2), rel=1e-10)

    def test_sup_dominates_mean(self, rng):
        g = sp.synthesize(sp.random_field(2, 20, 4, rng), 16)
        for r in (1, 2, 4):
            assert sp.lp_norm(g, math.inf) >= (TWO_PI) ** (-2 / r) * sp.lp_norm(g, r) * (1 - 1e-12)

    def test_sliced_sup_matches_dense(self, rng):
        u = sp.random_field(3, 30, 4, rng)
        dense = sp.lp_norm(sp.synthesize(u, 64), math.inf)
        sampled, _ = sp.sup_norm_sampled(u)
        assert sampled >= dense * (1 - 1e-6)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), scale=st.floats(-5, 5).filter(lambda a: abs(a) > 1e-3))
def test_l2_homogeneous(seed, scale):
    u = sp.random_field(2, 12, 4, np.random.default_rng(seed))
    assert sp.l2_norm_exact(u * scale) == pytest.approx(abs(scale) * sp.l2_norm_exact(u), rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_operations_preserve_reality(seed):
    rng = np.random.default_rng(seed)
    u, v = sp.random_field(2, 16, 3, rng), sp.random_field(2, 16, 3, rng)
    for f in (sp.advect(u, v), sp.project_field(u + v), u - v * 2.0):
        scale = max(np.abs(f.amp).max(), 1.0) if len(f) else 1.0
        assert f.reality_defect() <= 1e-12 * scale
