import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special as sp

from rrcml.rrc import (QuadratureError, beta_params, clip_support, rrc_probability,
                       rrc_probability_batch)
from rrcml.special import beta_pdf, betainc, lbeta

supports = st.floats(0.0, 1.0, allow_nan=False)


class TestSpecial:
    def test_betainc_matches_scipy(self):
        rng = np.random.default_rng(0)
        a, b = rng.uniform(1e-6, 2, (2, 5000))
        x = rng.uniform(0, 1, 5000)
        np.testing.assert_allclose(betainc(a, b, x), sp.betainc(a, b, x), atol=1e-13)

    def test_betainc_endpoints(self):
        assert betainc(0.5, 1.5, 0.0) == 0.0
        assert betainc(0.5, 1.5, 1.0) == 1.0

    def test_uniform_cdf(self):
        x = np.linspace(0.01, 0.99, 9)
        np.testing.assert_allclose(betainc(1.0, 1.0, x), x, atol=1e-14)

    def test_pdf_and_lbeta(self):
        np.testing.assert_allclose(lbeta(1.4, 0.6), sp.betaln(1.4, 0.6), atol=1e-14)
        np.testing.assert_allclose(beta_pdf(0.3, 1.4, 0.6),
                                   0.3 ** 0.4 * 0.7 ** -0.4 / sp.beta(1.4, 0.6), rtol=1e-13)
        assert beta_pdf(0.0, 2.0, 2.0) == 0.0


class TestClip:
    def test_clamps_extremes(self):
        np.testing.assert_allclose(clip_support([1.0, 0.0]), [1 - 1e-6, 1e-6])

    @pytest.mark.parametrize("nu", [(0.5, 0.5), (0.7, 0.3)])
    def test_interior_unchanged(self, nu):
        np.testing.assert_array_equal(clip_support(nu), nu)


class TestBetaParams:
    def test_uniform(self):
        p = beta_params((0.5, 0.5))
        assert (p.lambda0, p.mu0, p.lambda1, p.mu1) == (1.0, 1.0, 1.0, 1.0)

    def test_substitution(self):
        p = beta_params((0.7, 0.3))
        np.testing.assert_allclose([p.lambda0, p.mu0, p.lambda1, p.mu1],
                                   [1.4, 0.6, 0.6, 1.4], atol=1e-15)

    @given(supports)
    def test_concentration_is_two(self, v):
        p = beta_params(clip_support([1 - v, v]))
        assert p.lambda0 + p.mu0 == pytest.approx(2.0, abs=1e-15)
        assert p.lambda1 + p.mu1 == pytest.approx(2.0, abs=1e-15)


class TestRrcProbability:
    def test_uniform_supports_give_half(self):
        np.testing.assert_array_equal(rrc_probability((0.5, 0.5)), [0.5, 0.5])

    def test_matches_frozen_simpson_oracle(self, rrc_oracle):
        case = next(c for c in rrc_oracle["fixed"] if c["nu"] == [0.7, 0.3])
        p = rrc_probability(case["nu"])
        assert p[0] == pytest.approx(case["p0"], abs=1e-6)
        assert p[1] == pytest.approx(case["p1"], abs=1e-6)

    def test_extreme_support(self):
        assert rrc_probability((1 - 1e-6, 1e-6))[0] > 0.999

    def test_unclipped_extreme_equals_clipped(self):
        np.testing.assert_array_equal(rrc_probability((1.0, 0.0)),
                                      rrc_probability(clip_support((1.0, 0.0))))

    @settings(max_examples=200, deadline=None)
    @given(supports)
    def test_normalized(self, v):
        p = rrc_probability((1 - v, v))
        assert abs(p.sum() - 1.0) < 1e-6
        assert np.all((p >= 0) & (p <= 1))

    @settings(max_examples=100, deadline=None)
    @given(supports, supports)
    def test_monotone_in_support(self, v, w):
        lo, hi = sorted(clip_support([[1 - v, v], [1 - w, w]])[:, 1])
        if hi - lo < 1e-6:
            return
        assert rrc_probability((1 - hi, hi))[1] > rrc_probability((1 - lo, lo))[1]

    @settings(max_examples=100, deadline=None)
    @given(supports)
    def test_symmetry(self, v):
        a, b = rrc_probability((v, 1 - v)), rrc_probability((1 - v, v))
        assert a[0] == pytest.approx(b[1], abs=1e-9)

    def test_tolerance_failure_raises(self):
        with pytest.raises(QuadratureError) as info:
            rrc_probability((0.37, 0.63), tol=1e-300)
        assert info.value.achieved > 0


class TestBatch:
    def test_empty(self):
        assert rrc_probability_batch([]).shape == (0, 2)

    def test_singleton_matches_scalar_bitwise(self):
        nu = (0.123456, 0.876544)
        np.testing.assert_array_equal(rrc_probability_batch([nu])[0], rrc_probability(nu))

    def test_elementwise_identical_to_scalar(self):
        rng = np.random.default_rng(3)
        v = rng.uniform(0, 1, 50)
        nus = np.column_stack([1 - v, v])
        batch = rrc_probability_batch(nus)
        for nu, p in zip(nus, batch):
            np.testing.assert_array_equal(p, rrc_probability(nu))

    def test_random_sweep_normalized(self):
        rng = np.random.default_rng(4)
        v = rng.uniform(0, 1, 1000)
        p = rrc_probability_batch(np.column_stack([1 - v, v]))
        assert np.max(np.abs(p.sum(axis=1) - 1.0)) < 1e-6

    def test_error_carries_input_index(self):
        with pytest.raises(QuadratureError) as info:
            rrc_probability_batch([(0.5, 0.5), (0.37, 0.63)], tol=1e-300)
        assert info.value.index == 1


def test_monte_carlo_means_match_supports():
    rng = np.random.default_rng(5)
    for v in rng.uniform(0, 1, 5):
        nu = clip_support((1 - v, v))
        p = beta_params(nu)
        draws = rng.beta(p.lambda1, p.mu1, 100_000)
        stderr = draws.std(ddof=1) / np.sqrt(draws.size)
        assert abs(draws.mean() - nu[1]) < 3 * stderr
