"""Tests for the synthetic generators and the privacy row scaling."""

import numpy as np
import pytest

from dppca.datagen import (
    GaussSpec,
    gen_gaussian_iid,
    gen_high_coherence,
    gen_low_coherence,
    random_orthogonal,
    scale_for_privacy,
)
from dppca.errors import ParameterError
from dppca.matcore import DenseMatrix, gram, spectrum_stats
from dppca.mech import RngStream
from dppca.theory import gaussian_bounds


class TestGaussSpec:
    def test_valid(self):
        s = GaussSpec((0.5, 0.3, 0.2))
        assert s.d == 3
        assert s.kappabar == pytest.approx(0.4)

    def test_rejects_bad_sum(self):
        with pytest.raises(ParameterError):
            GaussSpec((0.5, 0.4))

    def test_rejects_increasing(self):
        with pytest.raises(ParameterError):
            GaussSpec((0.3, 0.7))

    def test_rejects_negative(self):
        with pytest.raises(ParameterError):
            GaussSpec((1.5, -0.5))

    def test_spiked_builder(self):
        s = GaussSpec.spiked(20, 0.5, 0.5)
        assert s.sigmabar_sq[0] == pytest.approx(0.5)
        assert s.sigmabar_sq[1] == pytest.approx(0.25)
        assert s.kappabar == pytest.approx(0.5)
        assert sum(s.sigmabar_sq) == pytest.approx(1.0, abs=1e-15)


class TestRandomOrthogonal:
    def test_orthogonal(self):
        q = random_orthogonal(6, RngStream(0))
        assert np.allclose(q.T @ q, np.eye(6), atol=1e-12)

    def test_deterministic(self):
        assert np.array_equal(
            random_orthogonal(4, RngStream(1)), random_orthogonal(4, RngStream(1))
        )


class TestGenGaussianIid:
    def test_rank1_spec_rows_along_e1(self):
        spec = GaussSpec((1.0, 0.0, 0.0), rotate=False)
        a, vbar1 = gen_gaussian_iid(50, spec, RngStream(2))
        assert np.allclose(vbar1, [1.0, 0.0, 0.0])
        assert np.all(a.data[:, 1:] == 0.0)

    def test_covariance_concentration(self):
        # ||(1/n) gram - diag(spec)||_F <= 5 sqrt(d/n) for iid rows
        n, d = 20_000, 8
        spec = GaussSpec((0.125,) * 8, rotate=False)
        a, _ = gen_gaussian_iid(n, spec, RngStream(3))
        emp = gram(a) / n
        err = np.linalg.norm(emp - np.diag(spec.sigmabar_sq))
        assert err <= 5 * np.sqrt(d / n)

    def test_per_coordinate_variance_unrotated(self):
        n = 100_000
        spec = GaussSpec((0.6, 0.3, 0.1), rotate=False)
        a, _ = gen_gaussian_iid(n, spec, RngStream(4))
        var = a.data.var(axis=0)
        for j, s2 in enumerate(spec.sigmabar_sq):
            se = s2 * np.sqrt(2.0 / n)  # sd of a chi^2 variance estimate
            assert abs(var[j] - s2) <= 3 * se

    def test_vbar1_is_population_top_direction(self):
        spec = GaussSpec.spiked(6, 0.6, 0.7)
        a, vbar1 = gen_gaussian_iid(60_000, spec, RngStream(5))
        emp_cov = gram(a) / a.n
        w, v = np.linalg.eigh(emp_cov)  # oracle
        top = v[:, -1]
        assert abs(top @ vbar1) > 0.99

    def test_deterministic(self):
        spec = GaussSpec.spiked(4, 0.5, 0.5)
        a1, v1 = gen_gaussian_iid(10, spec, RngStream(6))
        a2, v2 = gen_gaussian_iid(10, spec, RngStream(6))
        assert np.array_equal(a1.data, a2.data)
        assert np.array_equal(v1, v2)


class TestScaleForPrivacy:
    def test_scale_matches_formula(self):
        a = DenseMatrix(np.ones((100, 2)))
        sc = scale_for_privacy(a, 0.05)
        assert sc.scale == pytest.approx(1.0 + np.sqrt(2 * np.log(100 / 0.05)))

    def test_row_norms_bounded_after(self):
        spec = GaussSpec.spiked(10, 0.5, 0.5)
        a, _ = gen_gaussian_iid(5000, spec, RngStream(7))
        sc = scale_for_privacy(a, 0.05)
        assert sc.matrix.max_row_norm() <= 1.0 + 1e-12

    def test_clip_count(self):
        data = np.zeros((10, 2))
        data[0, 0] = 1000.0  # this row survives scaling above norm 1
        data[1:, 0] = 0.001
        sc = scale_for_privacy(DenseMatrix(data), 0.05)
        assert sc.clip_count == 1
        assert np.linalg.norm(sc.matrix.data[0]) == pytest.approx(1.0)

    def test_clipping_rare_for_gaussian_rows(self):
        # The row-length bound holds with probability >= 1 - beta.
        spec = GaussSpec.spiked(10, 0.5, 0.5)
        total_rows, clipped = 0, 0
        for seed in range(10):
            a, _ = gen_gaussian_iid(2000, spec, RngStream(8, seed))
            sc = scale_for_privacy(a, 0.05)
            total_rows += a.n
            clipped += sc.clip_count
        assert clipped / total_rows <= 0.05


class TestGenLowCoherence:
    def test_base_case_diag(self):
        a = gen_low_coherence(5, 2, sigma1_frac=1.0 / 5, gap=0.75,
                              rng=RngStream(9), rotate=False)
        # sigma1 = 1, sigma2 = 0.5: diag core padded with zero rows
        assert a.data[0, 0] == pytest.approx(1.0)
        assert a.data[1, 1] == pytest.approx(0.5)
        assert np.allclose(a.data[2:], 0.0)

    def test_max_row_norm_exactly_one(self):
        for seed in range(5):
            a = gen_low_coherence(200, 8, 0.3, 0.5, RngStream(10, seed))
            assert a.max_row_norm() == pytest.approx(1.0, abs=1e-9)

    def test_gap_response(self):
        a = gen_low_coherence(300, 6, 0.3, 0.75, RngStream(11))
        st = spectrum_stats(a)
        assert st.kappa == pytest.approx(0.75, rel=1e-6)

    def test_low_upsilon(self):
        # Upsilon <= 6 sqrt(ln n / n) over seeds (conjugation spreads mass)
        n = 4096
        bound = 6 * np.sqrt(np.log(n) / n)
        for seed in range(20):
            a = gen_low_coherence(n, 16, 0.3, 0.5, RngStream(12, seed))
            assert spectrum_stats(a).upsilon <= bound

    def test_rejects_bad_params(self):
        with pytest.raises(ParameterError):
            gen_low_coherence(10, 20, 0.3, 0.5, RngStream(0))
        with pytest.raises(ParameterError):
            gen_low_coherence(20, 4, 1.5, 0.5, RngStream(0))
        with pytest.raises(ParameterError):
            gen_low_coherence(20, 4, 0.3, 0.0, RngStream(0))


class TestGenHighCoherence:
    def test_single_spike_rest_zero(self):
        a = gen_high_coherence(50, 4, RngStream(13), spikes=1, noise_norm=0.0)
        st = spectrum_stats(a)
        assert st.upsilon == pytest.approx(1.0)
        assert st.mu == pytest.approx(50.0)

    def test_k_spikes_upsilon(self):
        for k in (2, 4, 9):
            a = gen_high_coherence(100, 5, RngStream(14), spikes=k)
            assert spectrum_stats(a).upsilon == pytest.approx(
                1.0 / np.sqrt(k), abs=1e-9
            )

    def test_mu_at_least_quarter_n(self):
        for seed in range(20):
            a = gen_high_coherence(400, 8, RngStream(15, seed))
            assert spectrum_stats(a).mu >= 400 / 4

    def test_rows_bounded(self):
        a = gen_high_coherence(60, 6, RngStream(16))
        assert a.max_row_norm() <= 1.0 + 1e-9


class TestBernsteinEnvelope:
    def test_spectral_concentration_within_G(self):
        # ||A^T A - n Sigma^2||_2 <= G in >= 95% of 40 seeds
        n, d = 4096, 16
        spec = GaussSpec.spiked(d, 0.5, 0.5)
        g_bound = gaussian_bounds(spec, n, 0.05).g
        sigma2 = np.diag(spec.sigmabar_sq)
        hits = 0
        for seed in range(40):
            a, _ = gen_gaussian_iid(n, GaussSpec(spec.sigmabar_sq, rotate=False),
                                    RngStream(17, seed))
            dev = np.linalg.norm(gram(a) - n * sigma2, ord=2)
            hits += dev <= g_bound
        assert hits >= 38
