import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mlstab.special import (
    AccuracyError,
    EigenbasisError,
    GammaPoleError,
    gamma,
    in_stable_sector,
    mittag_leffler,
    ml_asymptotic,
    prabhakar,
    reciprocal_gamma,
    resolvent_matrix,
)


def ml_series_oracle(z, alpha, beta, dps=None):
    """Independent reference: mpmath Taylor sum with exact argument arithmetic."""
    az = abs(complex(z))
    if dps is None:
        dps = int(60 + 0.9 * az ** (1.0 / alpha))  # headroom for tiny values
    with mpmath.workdps(dps):
        am, bm = mpmath.mpf(alpha), mpmath.mpf(beta)
        zm = mpmath.mpc(z)
        s = mpmath.mpc(0)
        zk = mpmath.mpc(1)
        k = 0
        kmin = az ** (1.0 / alpha) / alpha + 10
        while True:
            s += zk * mpmath.rgamma(am * k + bm)
            zk *= zm
            k += 1
            if k > kmin and abs(zk) * abs(mpmath.rgamma(am * k + bm)) \
                    < mpmath.mpf(10) ** (-dps + 5) * (1 + abs(s)):
                return complex(s)


class TestGamma:
    def test_known_values(self):
        assert gamma(1) == pytest.approx(1.0)
        assert gamma(5) == pytest.approx(24.0)
        assert abs(gamma(0.5) - math.sqrt(math.pi)) < 1e-14

    def test_relative_accuracy_real_axis(self):
        xs = [1e-3, 0.1, 0.5, 2.5, 17.0, 95.5, 170.0]
        for x in xs:
            ref = float(mpmath.gamma(x))
            assert abs(gamma(x).real - ref) <= 1e-13 * abs(ref)

    @pytest.mark.parametrize("x", [0, -1, -2.0, -17])
    def test_poles_raise(self, x):
        with pytest.raises(GammaPoleError):
            gamma(x)

    def test_reciprocal_gamma_zero_at_poles(self):
        assert reciprocal_gamma(0.0) == 0.0
        assert reciprocal_gamma(-3.0) == 0.0
        assert reciprocal_gamma(1.5) == pytest.approx(1.0 / math.gamma(1.5))


class TestMittagLeffler:
    def test_exponential_case(self):
        assert abs(mittag_leffler(1.0, 1.0) - math.e) < 1e-13 * math.e

    def test_at_zero(self):
        assert mittag_leffler(0.0, 0.5) == pytest.approx(1.0)

    def test_exp_identity_on_disk(self):
        # E_{1,1} = exp to 1e-12 relative for |z| <= 20, all directions
        for r in (0.5, 5.0, 12.0, 20.0):
            for th in (0.0, 0.5, math.pi / 2, 2.5, math.pi):
                z = r * cmath.exp(1j * th)
                assert abs(mittag_leffler(z, 1.0) - cmath.exp(z)) \
                    <= 1e-12 * abs(cmath.exp(z))

    def test_half_alpha_erfc_identity(self):
        # E_{1/2,1}(-x) = exp(x^2) erfc(x), an independent closed form
        from scipy.special import erfcx
        for x in (0.5, 3.0, 7.0, 18.0, 39.0):
            assert abs(mittag_leffler(-x, 0.5) - erfcx(x)) <= 1e-12 * erfcx(x)

    def test_large_negative_argument_both_branches(self):
        # exact value via 1/sqrt(pi) + z e^{z^2} erfc(-z) at z = -100
        with mpmath.workdps(50):
            ref = complex(1 / mpmath.sqrt(mpmath.pi)
                          - 100 * mpmath.exp(10000) * mpmath.erfc(100))
        val = mittag_leffler(-100.0, 0.5, 0.5)
        assert abs(val - ref) <= 1e-12 * abs(ref)
        # the large-z expansion alone agrees: k=1 term vanishes (Gamma(0) pole),
        # the k=2 term -z^{-2}/Gamma(-1/2) carries the value
        asym = ml_asymptotic(-100.0, 0.5, 0.5, n_terms=8)
        assert abs(asym - ref) <= 1e-10 * abs(ref)
        assert ml_asymptotic(-100.0, 0.5, 0.5, n_terms=1) == 0.0

    def test_decay_on_sector_ray(self):
        # |E_{1/2}(z)| <= C/|z| on the ray arg z = 3*pi/4
        z = 50.0 * cmath.exp(3j * math.pi / 4)
        val = mittag_leffler(z, 0.5)
        bound = abs(1.0 / (z * math.gamma(0.5)))
        assert abs(val) <= 2.0 * bound

    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
    @pytest.mark.parametrize("beta", [0.5, 1.0, 1.5])
    def test_against_series_oracle_midrange(self, alpha, beta):
        # the awkward band between the Taylor and asymptotic regimes; radii
        # where the reference sum itself stays affordable (< ~200 digits)
        for r in (4.0, 6.5, 9.5):
            if 0.9 * r ** (1.0 / alpha) > 150.0:
                continue
            for th in (2 * math.pi / 3, math.pi):
                z = r * cmath.exp(1j * th)
                ref = ml_series_oracle(z, alpha, beta)
                val = mittag_leffler(z, alpha, beta)
                assert abs(val - ref) <= 1e-11 * max(abs(ref), 1e-30)

    def test_saturation_band_routed_to_extended_precision(self):
        # just past the Taylor radius the large-z expansion saturates above
        # tolerance; the first-omitted-term check must reject it there
        z = 10.0 * cmath.exp(2.4j)
        ref = ml_series_oracle(z, 0.7, 0.4)
        val = mittag_leffler(z, 0.7, 0.4)
        assert abs(val - ref) <= 1e-11 * abs(ref)

    def test_sector_bound_t_alpha_scaled(self):
        # for lambda in the sector, t^alpha |E_alpha(lambda t^alpha)| stays bounded
        lam = 1 + 11j
        alpha = 0.5
        const = abs(1.0 / (lam * math.gamma(1 - alpha)))
        vals = []
        for t in np.logspace(1, 6, 26):
            vals.append(t ** alpha * abs(mittag_leffler(lam * t ** alpha, alpha)))
        assert max(vals) <= 10.0 * const
        assert abs(vals[-1] - const) <= 0.1 * const

    def test_validation(self):
        with pytest.raises(ValueError):
            mittag_leffler(1.0, 1.5)
        with pytest.raises(ValueError):
            mittag_leffler(complex("inf"), 0.5)

    def test_overflow_gap_raises(self):
        # far outside the decay sector exp(z^(1/alpha)) exceeds double range
        with pytest.raises(AccuracyError):
            mittag_leffler(1e4, 0.5)


class TestPrabhakar:
    def test_order_one_reduces(self):
        z = -2.3 + 0.7j
        assert prabhakar(z, 0.5, 1.0, 1) == mittag_leffler(z, 0.5, 1.0)

    def test_at_zero(self):
        assert abs(prabhakar(0.0, 0.5, 0.5, 2) - 1.0 / math.gamma(0.5)) < 1e-14

    def prabhakar_series_oracle(self, z, alpha, beta, g, terms=None, dps=None):
        peak = abs(complex(z)) ** (1.0 / alpha)
        if terms is None:
            terms = int(3.5 * peak / alpha + 15 * math.sqrt(peak / alpha + 4) + 80)
        if dps is None:
            dps = int(50 + 0.9 * peak)
        with mpmath.workdps(dps):
            am, bm = mpmath.mpf(alpha), mpmath.mpf(beta)
            zm = mpmath.mpc(z)
            s = mpmath.mpc(0)
            for k in range(terms):
                poch = mpmath.gamma(g + k) / mpmath.gamma(g)
                s += poch * zm ** k / mpmath.factorial(k) * mpmath.rgamma(am * k + bm)
            return complex(s)

    def test_reduction_vs_series_negative_beta(self):
        ref = self.prabhakar_series_oracle(-4.0, 0.5, -0.5, 2)
        val = prabhakar(-4.0, 0.5, -0.5, 2)
        assert abs(val - ref) <= 1e-10 * max(abs(ref), 1.0)

    @pytest.mark.parametrize("z", [-10.0, -3.0, 1.5, 2j, -5 + 4j])
    def test_reduction_matches_series_on_disk(self, z):
        ref = self.prabhakar_series_oracle(z, 0.5, 1.0, 2)
        val = prabhakar(z, 0.5, 1.0, 2)
        assert abs(val - ref) <= 1e-10 * max(abs(ref), 1e-6)

    @pytest.mark.parametrize("g", [3, 0, 2.5, -1])
    def test_unsupported_orders(self, g):
        with pytest.raises(ValueError):
            prabhakar(1.0, 0.5, 1.0, g)


class TestResolventMatrix:
    def test_zero_matrix_is_identity(self):
        R = resolvent_matrix(np.zeros((3, 3)), 0.7, 1.0, 2.5)
        assert np.allclose(R, np.eye(3), atol=1e-14)

    def test_matrix_exponential_case(self):
        R = resolvent_matrix(np.diag([-1.0, -2.0]), 1.0, 1.0, 1.0)
        assert np.allclose(np.diag(R), [math.exp(-1), math.exp(-2)], rtol=1e-12)

    def test_scalar_path_matches_scalar_function(self):
        lam, alpha, beta, t = 0.3 - 2.0j, 0.6, 0.6, 3.7
        R = resolvent_matrix(np.array([[lam]]), alpha, beta, t)
        assert R[0, 0] == t ** (beta - 1) * mittag_leffler(t ** alpha * lam, alpha, beta)

    def test_longtime_decay_against_expansion(self):
        lam, alpha, t = 1 + 11j, 0.5, 1e4
        R = resolvent_matrix(np.array([[lam]]), alpha, 1.0, t)
        leading = -1.0 / (lam * math.gamma(1 - alpha)) * t ** -alpha
        ratio1 = abs(R[0, 0] / leading - 1.0)
        assert abs(R[0, 0]) <= 2.0 * abs(leading)
        assert ratio1 <= 0.05
        refined = t ** 0.0 * ml_asymptotic(lam * t ** alpha, alpha, 1.0, n_terms=3)
        assert abs(R[0, 0] / refined - 1.0) <= ratio1

    def test_defective_matrix_rejected(self):
        J = np.array([[1.0, 1.0], [0.0, 1.0]])  # Jordan block
        with pytest.raises(EigenbasisError):
            resolvent_matrix(J, 0.5, 1.0, 1.0)


class TestStableSector:
    def test_reference_eigenvalue(self):
        res = in_stable_sector(1 + 11j, 0.5)
        assert res.in_sector
        assert res.margin == pytest.approx(math.atan2(11, 1) - math.pi / 4)

    def test_outside(self):
        assert not in_stable_sector(1 + 0.9j, 0.5).in_sector

    def test_negative_real_axis(self):
        for alpha in (0.1, 0.5, 0.9):
            res = in_stable_sector(-1.0, alpha)
            assert res.in_sector
            assert res.margin == pytest.approx(math.pi - alpha * math.pi / 2)

    def test_zero_is_critical(self):
        res = in_stable_sector(0.0, 0.5)
        assert not res.in_sector and res.critical

    def test_boundary_is_critical(self):
        res = in_stable_sector(1 + 1j, 0.5)
        assert res.critical and not res.in_sector

    @settings(max_examples=50, deadline=None)
    @given(scale=st.floats(min_value=1e-6, max_value=1e6),
           re=st.floats(min_value=-10, max_value=10),
           im=st.floats(min_value=-10, max_value=10),
           alpha=st.floats(min_value=0.05, max_value=0.95))
    def test_invariant_under_positive_scaling(self, scale, re, im, alpha):
        lam = complex(re, im)
        if lam == 0:
            return
        a = in_stable_sector(lam, alpha)
        b = in_stable_sector(scale * lam, alpha)
        assert a.in_sector == b.in_sector
        assert a.margin == pytest.approx(b.margin, abs=1e-9)
