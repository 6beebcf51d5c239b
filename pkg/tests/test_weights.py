import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mlstab import weights as wt


def binomial_series_oracle(power, n_terms, dps=40):
    """Coefficients of (1-z)^power via mpmath binomials."""
    with mpmath.workdps(dps):
        return [complex(mpmath.binomial(power, k)) * (-1) ** k for k in range(n_terms)]


class TestMillerPower:
    def test_square_root_of_one_minus_z(self):
        g = wt.miller_power([1.0, -1.0], 0.5, 3)
        assert np.allclose(g, [1.0, -0.5, -0.125], atol=1e-15)

    def test_integer_power(self):
        g = wt.miller_power([1.0, -1.0], 1.0, 6)
        assert np.allclose(g, [1.0, -1.0, 0, 0, 0, 0], atol=1e-15)

    def test_general_polynomial_against_binomial_product(self):
        # (1.5 - 2z + 0.5 z^2)^0.7 = 1.5^0.7 (1-z)^0.7 (1-z/3)^0.7
        n = 6
        g = wt.miller_power([1.5, -2.0, 0.5], 0.7, n)
        b1 = binomial_series_oracle(0.7, n)
        b2 = [c * (1.0 / 3.0) ** k for k, c in enumerate(binomial_series_oracle(0.7, n))]
        ref = 1.5 ** 0.7 * np.convolve(b1, b2)[:n]
        assert np.allclose(g, ref.real, rtol=1e-13, atol=1e-15)

    def test_zero_leading_coefficient(self):
        with pytest.raises(ValueError):
            wt.miller_power([0.0, 1.0], 0.5, 4)


class TestConvInverse:
    def test_geometric(self):
        v = wt.conv_inverse([1.0, -1.0], 5)
        assert np.allclose(v, np.ones(5), atol=1e-15)

    def test_scalar(self):
        assert np.allclose(wt.conv_inverse([2.0], 4), [0.5, 0, 0, 0], atol=1e-16)

    def test_fbdf1_inverse_is_negative_power(self):
        mu = wt.fbdf1_recursion(0.5, 400)
        omega = wt.conv_inverse(mu, 400)
        ref = wt.miller_power([1.0, -1.0], -0.5, 400)
        assert np.max(np.abs(omega - ref)) < 1e-13

    def test_zero_leading_coefficient(self):
        with pytest.raises(ValueError):
            wt.conv_inverse([0.0, 2.0], 3)

    @settings(max_examples=40, deadline=None)
    @given(rest=st.lists(st.floats(min_value=-3, max_value=3), min_size=0, max_size=6),
           lead=st.floats(min_value=0.25, max_value=4.0))
    def test_roundtrip(self, rest, lead):
        # dominant head keeps the intermediate inverse bounded; otherwise the
        # inverse grows geometrically and floating-point roundtrip error with it
        rest = np.asarray(rest)
        total = np.sum(np.abs(rest))
        if total > 0.8 * lead:
            rest = rest * (0.8 * lead / total)
        u = np.concatenate([[lead], rest])
        n = 24
        back = wt.conv_inverse(wt.conv_inverse(u, n), n)
        padded = np.zeros(n)
        padded[: u.size] = u
        assert np.max(np.abs(back - padded)) < 1e-12 * max(1.0, np.max(np.abs(u)))


class TestFbdfWeights:
    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7, 0.9])
    def test_fbdf2_closed_forms(self, alpha):
        w = wt.fbdf_weights(2, alpha, 5)
        c = 1.5 ** alpha
        expected = [c,
                    -c * 4.0 * alpha / 3.0,
                    c * alpha * (8 * alpha - 5) / 9.0,
                    c * 4 * alpha * (alpha - 1) * (7 - 8 * alpha) / 81.0]
        assert np.allclose(w.mu[:4], expected, rtol=1e-13)

    def test_fbdf2_classical_limit(self):
        w = wt.fbdf_weights(2, 1.0, 6)
        assert np.allclose(w.mu, [1.5, -2.0, 0.5, 0, 0, 0], atol=1e-14)

    def test_fbdf1_values(self):
        w = wt.fbdf_weights(1, 0.5, 4)
        assert np.allclose(w.mu, [1.0, -0.5, -0.125, -0.0625], atol=1e-15)

    def test_miller_matches_recursion(self):
        for alpha in (0.3, 0.5, 0.9):
            w = wt.fbdf_weights(1, alpha, 1000)
            rec = wt.fbdf1_recursion(alpha, 1000)
            assert np.max(np.abs(w.mu - rec)) < 1e-13

    def test_fbdf1_sign_pattern(self):
        w = wt.fbdf_weights(1, 0.4, 512)
        assert w.mu[0] == 1.0
        assert np.all(w.mu[1:] < 0.0)
        partial = np.cumsum(w.mu)
        assert np.all(partial > 0.0)
        assert np.all(np.diff(partial) < 0.0)

    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
    def test_fbdf2_sign_pattern_and_partial_sums(self, alpha):
        w = wt.fbdf_weights(2, alpha, 10_000)
        assert w.mu[0] > 0 > w.mu[1]
        assert np.all(w.mu[4:] < 0.0)
        partial = np.cumsum(w.mu)
        # partial sums decrease in magnitude past j = 4 and drain to zero
        assert np.all(np.diff(np.abs(partial[4:])) < 0.0)
        if alpha >= 0.5:
            assert abs(partial[-1]) < 1e-2

    def test_fbdf1_omega_asymptotics(self):
        # omega_n ~ n^(alpha-1)/Gamma(alpha) within 1% at n = 1e4
        alpha = 0.6
        w = wt.fbdf_weights(1, alpha, 10_001)
        n = 10_000
        ref = n ** (alpha - 1.0) / math.gamma(alpha)
        assert abs(w.omega[n] / ref - 1.0) < 0.01

    def test_unsupported_k(self):
        with pytest.raises(ValueError):
            wt.fbdf_weights(3, 0.5, 4)


class TestFadams2Weights:
    def test_leading_weight(self):
        for alpha in (0.2, 0.5, 0.8):
            assert wt.fadams2_weights(alpha, 4).omega[0] == pytest.approx(1 - alpha / 2)

    def test_trapezoidal_limit(self):
        w = wt.fadams2_weights(1.0, 6)
        assert np.allclose(w.omega, [0.5, 1, 1, 1, 1, 1], atol=1e-14)

    def test_omega1_against_binomial_product(self):
        alpha = 0.5
        w = wt.fadams2_weights(alpha, 8)
        base = binomial_series_oracle(-alpha, 8)
        ref = [(1 - alpha / 2) * base[k].real
               + (alpha / 2) * (base[k - 1].real if k else 0.0) for k in range(8)]
        assert np.allclose(w.omega, ref, rtol=1e-13)
        assert w.omega[1] == pytest.approx(0.625)


class TestL1Weights:
    def test_leading_weight(self):
        w = wt.l1_weights(0.5, 4)
        assert w.mu[0] == pytest.approx(1.0 / math.gamma(1.5))
        assert w.mu[0] == pytest.approx(1.1283791671, abs=1e-10)

    @pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
    def test_telescoping(self, alpha):
        w = wt.l1_weights(alpha, 300)
        partial = np.cumsum(w.mu)
        assert np.max(np.abs(partial - w.sigma[1:]) / np.abs(w.sigma[1:])) < 1e-12

    def test_classical_limit(self):
        w = wt.l1_weights(1.0, 6)
        assert w.mu[0] == pytest.approx(1.0)
        assert np.allclose(w.mu[1:], 0.0, atol=1e-15)


class TestAlphaDiffKernel:
    def test_leading_entry(self):
        for beta in (0.1, 0.5, 0.9):
            assert wt.alpha_diff_kernel(beta, 3)[0] == 1.0

    def test_order_one(self):
        assert np.allclose(wt.alpha_diff_kernel(1.0, 8), np.ones(8))

    def test_stirling_ratio(self):
        k = wt.alpha_diff_kernel(0.5, 10_001)
        n = 10_000
        ref = n ** -0.5 / math.gamma(0.5)
        assert abs(k[n] / ref - 1.0) < 0.01

    def test_matches_gamma_formula(self):
        beta = 0.35
        k = wt.alpha_diff_kernel(beta, 12)
        ref = [math.gamma(beta + n) / (math.gamma(beta) * math.gamma(1 + n))
               for n in range(12)]
        assert np.allclose(k, ref, rtol=1e-13)

    def test_alpha_diff_weights_match_fbdf1(self):
        # the kernel differences are the (1-z)^alpha binomials
        w = wt.alpha_diff_weights(0.4, 200)
        assert np.max(np.abs(w.mu - wt.fbdf1_recursion(0.4, 200))) < 1e-13
        assert w.omega is None


class TestSchemeTables:
    @pytest.mark.parametrize("scheme", wt.SCHEMES)
    def test_prefix_stability(self, scheme):
        # weights are exact sequence values: a longer table extends, never changes
        a = wt.scheme_weights(scheme, 0.45, 100)
        b = wt.scheme_weights(scheme, 0.45, 200)
        assert np.array_equal(a.mu, b.mu[:100])
        if a.omega is not None:
            assert np.max(np.abs(a.omega - b.omega[:100])) < 1e-14

    @pytest.mark.parametrize("scheme", [wt.FBDF1, wt.FBDF2, wt.FADAMS2, wt.L1])
    def test_mu_omega_are_mutual_inverses(self, scheme):
        w = wt.scheme_weights(scheme, 0.6, 128)
        conv = np.convolve(w.mu, w.omega)[:128]
        delta = np.zeros(128)
        delta[0] = 1.0
        assert np.max(np.abs(conv - delta)) < 1e-12

    def test_leading_omega_closed_forms(self):
        alpha = 0.37
        for scheme in (wt.FBDF1, wt.FBDF2, wt.FADAMS2, wt.L1):
            w = wt.scheme_weights(scheme, alpha, 4)
            assert w.omega[0] == pytest.approx(wt.leading_omega(scheme, alpha), rel=1e-13)

    def test_weights_are_read_only(self):
        w = wt.fbdf_weights(1, 0.5, 8)
        with pytest.raises(ValueError):
            w.mu[0] = 2.0

    def test_unknown_scheme(self):
        with pytest.raises(ValueError):
            wt.scheme_weights("bdf7", 0.5, 4)


class TestGeneratingFnEval:
    def test_fbdf1_at_zero_and_half(self):
        w = wt.fbdf_weights(1, 0.5, 2048)
        assert wt.generating_fn_eval(w, "mu", 0.0).value == 1.0
        got = wt.generating_fn_eval(w, "mu", 0.5)
        assert abs(got.value - math.sqrt(0.5)) <= got.tail_bound + 1e-12

    def test_l1_against_polylog_closed_form(self):
        alpha, z = 0.5, 0.9
        w = wt.l1_weights(alpha, 800)
        got = wt.generating_fn_eval(w, "mu", z)
        li = complex(mpmath.polylog(alpha - 1.0, z))
        ref = (1.0 / math.gamma(2 - alpha)) * ((1 - z) ** 2 / z) * li
        assert abs(got.value - ref) <= got.tail_bound + 1e-12

    def test_l1_tail_bound_on_circle(self):
        w = wt.l1_weights(0.5, 4096)
        got = wt.generating_fn_eval(w, "mu", 1j)
        assert math.isfinite(got.tail_bound)

    def test_divergence_warning_on_circle(self):
        w = wt.fbdf_weights(1, 0.5, 64)
        with warnings.catch_warnings(record=True) as rec:
            warnings.simplefilter("always")
            got = wt.generating_fn_eval(w, "mu", -1.0)
        assert got.tail_bound == math.inf
        assert any("tail" in str(r.message) for r in rec)

    def test_missing_table(self):
        w = wt.alpha_diff_weights(0.5, 16)
        with pytest.raises(ValueError):
            wt.generating_fn_eval(w, "omega", 0.3)
