import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fluidcascade import littlewood_paley as lp
from fluidcascade import spectral as sp
from fluidcascade.errors import InfeasibleShellError
from fluidcascade.spectral import SparseSpectralField

from conftest import cos_field


class TestCutoff:
    """The smooth cutoff and its dyadic differences."""

    def test_plateaus(self):
        assert lp.chi(0.0) == 1.0 and lp.chi(0.5) == 1.0
        assert lp.chi(1.0) == 0.0 and lp.chi(7.0) == 0.0

    def test_midpoint(self):
        assert lp.chi(0.75) == pytest.approx(0.5, abs=1e-15)

    def test_monotone(self):
        t = np.linspace(0, 1.2, 2001)
        assert np.all(np.diff(lp.chi(t)) <= 0)

    def test_negative_radius(self):
        with pytest.raises(ValueError):
            lp.chi(-0.1)

    def test_shell_support(self):
        t = np.linspace(0, 100, 20001)
        for q in range(0, 5):
            v = lp.phi_radial(t, q)
            outside = (t < 2.0 ** (q - 1)) | (t > 2.0 ** (q + 1))
            assert not np.any(v[outside])
            assert np.all(v >= 0)

    def test_low_shell(self):
        assert lp.phi_radial(0.0, -1) == 1.0 and lp.phi_radial(1.0, -1) == 0.0

    def test_bad_index(self):
        with pytest.raises(ValueError):
            lp.phi_radial(1.0, -2)

    def test_partition_of_unity(self):
        t = np.geomspace(1e-3, 2.0**15, 5000)
        total = sum(lp.phi_radial(t, q) for q in range(-1, 21))
        assert np.abs(total - 1).max() <= 1e-12

    def test_low_pass_telescopes(self):
        t = np.linspace(0, 64, 3001)
        for q in range(-1, 5):
            direct = sum(lp.phi_radial(t, p) for p in range(-1, q + 1))
            assert np.abs(lp.low_pass_symbol(t, q) - direct).max() <= 1e-14

    def test_window_is_one_on_shell(self):
        t = np.linspace(0, 200, 40001)
        for q in range(-1, 6):
            on = lp.phi_radial(t, q) > 0
            assert np.all(lp.window_symbol(t[on], q) == 1.0)

    def test_phi_q_vector(self):
        xi = np.array([[3, 4], [0, 0]])
        assert np.allclose(lp.phi_q(xi, 2), [lp.phi_radial(5.0, 2), 0.0])


class TestProjections:
    def test_single_mode_in_one_shell(self):
        u = cos_field((0, 3), (1, 0))
        assert lp.active_shells(u) == [1, 2]
        parts = [lp.shell_project(u, q) for q in lp.active_shells(u)]
        total = parts[0] + parts[1]
        assert np.allclose(total[(0, 3)], u[(0, 3)], atol=1e-15)

    def test_pieces_sum_to_field(self, rng):
        u = sp.random_field(3, 60, 20, rng)
        total = SparseSpectralField.zero(3)
        for q in lp.active_shells(u):
            total = total + lp.shell_project(u, q)
        assert np.abs((total - u).amp).max(initial=0.0) <= 1e-14

    def test_projection_keeps_divergence_free(self, rng):
        u = sp.random_field(2, 40, 12, rng)
        for q in lp.active_shells(u):
            assert sp.divergence_residual(lp.shell_project(u, q)) <= 1e-13 * 12 * np.abs(u.amp).max()

    def test_zero_field(self):
        assert lp.active_shells(SparseSpectralField.zero(2)) == []


class TestBesov:
    """Per-shell norms and Besov sums."""

    def test_parseval_path(self):
        u = cos_field((0, 3), (1, 0))
        rows = lp.besov_profile(u, lp.BesovParams(1.0, 2.0))
        assert all(r.method == "parseval" for r in rows)
        phis = [lp.phi_radial(3.0, q) for q in (1, 2)]
        for r, f in zip(rows, phis):
            assert r.shell_lr_norm == pytest.approx(f * math.sqrt(2) * math.pi)
            assert r.weighted == pytest.approx(2.0**r.q * r.shell_lr_norm)

    def test_sup_of_single_mode(self):
        u = cos_field((0, 3), (1, 0))
        rows = lp.besov_profile(u, lp.BesovParams(0.0, math.inf))
        for r in rows:
            assert r.shell_lr_norm == pytest.approx(lp.phi_radial(3.0, r.q), rel=1e-12)

    def test_norm_sup_and_sum(self):
        u = cos_field((0, 3), (1, 0))
        rows = lp.besov_profile(u, lp.BesovParams(1.0, 2.0))
        w = [r.weighted for r in rows]
        assert lp.besov_norm(u, lp.BesovParams(1.0, 2.0)) == pytest.approx(max(w))
        assert lp.besov_norm(u, lp.BesovParams(1.0, 2.0, 1.0)) == pytest.approx(sum(w))

    def test_zero(self):
        assert lp.besov_norm(SparseSpectralField.zero(2), lp.BesovParams(1.0)) == 0.0

    def test_bad_exponents(self):
        with pytest.raises(ValueError):
            lp.BesovParams(1.0, 0.5)

    def test_budget_refusal(self):
        u = cos_field((0, 300), (1, 0))
        with pytest.raises(InfeasibleShellError):
            lp.besov_profile(u, lp.BesovParams(0.0, 4.0), lp.ResolutionPolicy(max_points=1024))

    def test_csv(self, tmp_path):
        rows = lp.besov_profile(cos_field((0, 3), (1, 0)), lp.BesovParams(1.0))
        lp.write_besov_csv(rows, tmp_path / "b.csv")
        text = (tmp_path / "b.csv").read_text().splitlines()
        assert text[0] == "q,lambda_q,shell_lr_norm,weighted,method" and len(text) == 3


@settings(max_examples=30, deadline=None)
@given(t=st.floats(1e-6, 2.0**15))
def test_partition_pointwise(t):
    assert sum(lp.phi_radial(t, q) for q in range(-1, 21)) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**31), s=st.floats(-1, 2))
def test_besov_homogeneous(seed, s):
    u = sp.random_field(2, 10, 8, np.random.default_rng(seed))
    p = lp.BesovParams(s, 2.0)
    assert lp.besov_norm(u * 3.0, p) == pytest.approx(3.0 * lp.besov_norm(u, p), rel=1e-12)
