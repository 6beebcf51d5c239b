"""Scalar and small-matrix special functions.

Gamma, the two-parameter Mittag-Leffler function E_{alpha,beta}, the
three-parameter (Prabhakar) generalization for integer third parameter,
the continuous fractional resolvent t^{beta-1} E_{alpha,beta}(t^alpha A),
and the stability-sector test |arg(lambda)| > alpha*pi/2.

Evaluation strategy for E_{alpha,beta}(z), 0 < alpha <= 1:

* Taylor series  sum_k z^k / Gamma(alpha*k + beta)  in double precision for
  small |z| (<= SERIES_RADIUS by default).  The partial sums of the series
  cancel heavily when Re(z) < 0; the implementation measures the cancellation
  (largest term over final sum) and rejects the double-precision result when
  the lost digits would break the requested tolerance.

* Large-|z| expansion for |z| >= ASYMPTOTIC_MIN:

      E_{alpha,beta}(z) = [exp-term] - sum_{k=1}^{K} z^{-k}/Gamma(beta-k*alpha)
                          + O(|z|^{-K-1}),

  truncated at its smallest term, where the exponential term
  (1/alpha) z^{(1-beta)/alpha} exp(z^{1/alpha}) is present for
  |arg z| <= alpha*pi and absent in the decay sector |arg z| > alpha*pi.
  The result is accepted only if the first omitted term meets the tolerance.

* Otherwise the Taylor series is re-summed with mpmath at a working precision
  sized to the predicted cancellation (about |z|^{1/alpha} / ln 10 digits).
  If that would exceed MAX_EXTENDED_DPS the point is declared unreachable and
  AccuracyError is raised; this is the documented accuracy gap, which can only
  occur far outside the decay sector.

All functions here are pure; nothing is cached or mutated.
"""

from __future__ import annotations

import cmath
import math
from typing import NamedTuple

import mpmath
import numpy as np
from scipy import special as sc

__all__ = [
    "GammaPoleError",
    "AccuracyError",
    "EigenbasisError",
    "SectorResult",
    "SERIES_RADIUS",
    "ASYMPTOTIC_RADIUS",
    "ASYMPTOTIC_MIN",
    "MAX_EXTENDED_DPS",
    "gamma",
    "reciprocal_gamma",
    "mittag_leffler",
    "ml_asymptotic",
    "prabhakar",
    "resolvent_matrix",
    "in_stable_sector",
]


class GammaPoleError(ValueError):
    """Gamma evaluated at a non-positive integer."""


class AccuracyError(ArithmeticError):
    """No available representation of E_{alpha,beta} meets the tolerance."""


class EigenbasisError(np.linalg.LinAlgError):
    """Matrix is not diagonalizable with a well-conditioned eigenbasis."""


#: |z| up to which the double-precision Taylor sum is attempted first.
SERIES_RADIUS = 9.0
#: |z| from which the large-z expansion is considered mandatory.
ASYMPTOTIC_RADIUS = 40.0
#: smallest |z| at which the large-z expansion is attempted at all.
ASYMPTOTIC_MIN = 3.5
#: cap on mpmath working precision for the extended-precision fallback.
MAX_EXTENDED_DPS = 1500

_LN_OVERFLOW = 690.0  # ~ log(DBL_MAX)
_EPS = 2.220446049250313e-16


def gamma(x) -> complex:
    """Gamma function for real or complex argument.

    Raises GammaPoleError at the poles (non-positive integers).  Overflow for
    large positive real part yields inf, as in the underlying scipy routine.
    """
    z = complex(x)
    if z.imag == 0.0 and z.real <= 0.0 and z.real == int(z.real):
        raise GammaPoleError(f"gamma pole at {z.real:g}")
    if z.imag == 0.0:
        return complex(sc.gamma(z.real))
    return complex(sc.gamma(z))


def reciprocal_gamma(x: float) -> float:
    """1/Gamma(x) for real x, exactly 0 at the poles."""
    if x <= 0.0 and x == int(x):
        return 0.0
    return float(sc.rgamma(x))


def _validate_ml_params(alpha: float, beta: float) -> None:
    if not (0.0 < alpha <= 1.0):
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if not math.isfinite(beta):
        raise ValueError("beta must be finite")


def _taylor_double(z: complex, alpha: float, beta: float, rtol: float):
    """Double-precision Taylor sum.  Returns (value, ok)."""
    az = abs(z)
    peak = az ** (1.0 / alpha)  # ~ log of the largest term magnitude
    if peak > 300.0:
        return 0j, False
    kpeak = peak / alpha
    n_terms = int(3.5 * kpeak + 12.0 * math.sqrt(kpeak + 4.0) + 48)
    k = np.arange(n_terms + 1)
    x = alpha * k + beta
    terms = np.empty(n_terms + 1, dtype=complex)
    big = x > 0.5
    if z == 0:
        terms[:] = 0.0
        terms[0] = reciprocal_gamma(beta)
    else:
        logz = cmath.log(z)
        terms[big] = np.exp(k[big] * logz - sc.gammaln(x[big]))
        small = ~big
        if small.any():
            terms[small] = np.power(z, k[small].astype(float)) * sc.rgamma(x[small])
    val = complex(terms.sum())
    max_mag = float(np.max(np.abs(terms)))
    if abs(terms[-1]) > 1e-20 * max(max_mag, 1.0):
        return val, False  # truncation budget exceeded, should not happen
    scale = max(abs(val), max_mag * 1e-290)
    # Per-term noise is dominated by the rounding of gammaln's value (the
    # exponent), about eps * |gammaln|, which cancellation then amplifies.
    xmax = alpha * n_terms + abs(beta) + 2.0
    noise = _EPS * (8.0 + xmax * math.log(xmax) + math.sqrt(n_terms + 1.0))
    return val, max_mag * noise <= rtol * scale


def _asymptotic_terms(z: complex, alpha: float, beta: float, n_max: int):
    """Terms z^{-k}/Gamma(beta - k alpha), k = 1..n_max."""
    k = np.arange(1, n_max + 1)
    rg = np.asarray(sc.rgamma(beta - alpha * k), dtype=float)  # 0 at the poles
    return np.exp(-k * cmath.log(z)) * rg


def _exponential_term(z: complex, alpha: float, beta: float) -> complex:
    """(1/alpha) z^{(1-beta)/alpha} exp(z^{1/alpha}), raising on overflow."""
    w = cmath.exp(cmath.log(z) / alpha)
    if w.real > _LN_OVERFLOW:
        raise AccuracyError(
            f"exp(z^(1/alpha)) overflows a double for z={z}, alpha={alpha}"
        )
    power = cmath.exp(cmath.log(z) * (1.0 - beta) / alpha)
    return power * cmath.exp(w) / alpha


def _asymptotic(z: complex, alpha: float, beta: float, rtol: float, n_max: int = 160):
    """Large-|z| expansion truncated at its smallest term.  Returns (value, ok)."""
    terms = _asymptotic_terms(z, alpha, beta, n_max)
    mags = np.abs(terms)
    nonzero = np.nonzero(mags)[0]
    if nonzero.size == 0:
        series = 0j
        est = 0.0
    else:
        k_star = int(nonzero[np.argmin(mags[nonzero])])
        series = complex(terms[: k_star + 1].sum())
        later = nonzero[nonzero > k_star]
        est = float(mags[later[0]]) if later.size else float(mags[nonzero[-1]])
    val = -series
    if abs(cmath.phase(z)) <= alpha * math.pi + 1e-15:
        val += _exponential_term(z, alpha, beta)
    scale = max(abs(val), 1e-290)
    return val, est <= rtol * scale


def _taylor_extended(z: complex, alpha: float, beta: float, rtol: float) -> complex:
    """mpmath Taylor sum at a precision sized to the cancellation.

    The working precision starts at the size of the largest term and is
    re-checked a posteriori against the actual cancellation (largest term
    over final sum), retrying once more digits turn out to be needed.
    """
    az = abs(z)
    cancel_digits = 0.4343 * az ** (1.0 / alpha)
    dps = int(cancel_digits - math.log10(rtol) + 25)
    while True:
        if dps > MAX_EXTENDED_DPS:
            raise AccuracyError(
                f"E_({alpha},{beta})({z}) needs ~{dps} digits; "
                f"cap is {MAX_EXTENDED_DPS} (documented accuracy gap)"
            )
        with mpmath.workdps(dps):
            # the Gamma argument must be formed at working precision: forming
            # alpha*k in doubles perturbs huge cancelling terms by ~1e-13
            # relatively, which the cancellation amplifies catastrophically
            am = mpmath.mpf(alpha)
            bm = mpmath.mpf(beta)
            zm = mpmath.mpc(z)
            total = mpmath.mpc(0)
            zk = mpmath.mpc(1)
            max_mag = mpmath.mpf(1)
            cutoff = mpmath.mpf(10) ** (-dps + 5)
            k = 0
            k_min = az ** (1.0 / alpha) / alpha + 10
            while True:
                term = zk * mpmath.rgamma(am * k + bm)
                total += term
                max_mag = max(max_mag, abs(term))
                zk *= zm
                k += 1
                if k > k_min and abs(zk) * abs(mpmath.rgamma(am * k + bm)) \
                        < cutoff * (1 + abs(total)):
                    break
                if k > 200000:  # pragma: no cover - defensive
                    raise AccuracyError("extended-precision series did not terminate")
            lost = float(mpmath.log10(max_mag / abs(total))) if total != 0 else float(dps)
            needed = lost - math.log10(rtol) + 10.0
            if needed <= dps:
                return complex(total)
        dps = int(needed) + 15  # retry with the honest budget


def mittag_leffler(z, alpha: float, beta: float = 1.0, rtol: float = 1e-13) -> complex:
    """E_{alpha,beta}(z) = sum_k z^k / Gamma(alpha k + beta) for alpha in (0, 1].

    beta may be any real number (terms with Gamma evaluated at a pole vanish).
    Raises AccuracyError on the documented gap: points where neither the
    series (within the extended-precision cap) nor the large-z expansion
    attains `rtol`; such points lie outside the decay sector
    |arg z| > alpha*pi/2.
    """
    _validate_ml_params(alpha, beta)
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError("z must be finite")
    if z == 0:
        return complex(reciprocal_gamma(beta))
    az = abs(z)
    if az <= SERIES_RADIUS:
        val, ok = _taylor_double(z, alpha, beta, rtol)
        if ok:
            return val
    if az >= ASYMPTOTIC_MIN:
        val, ok = _asymptotic(z, alpha, beta, rtol)
        if ok:
            return val
    return _taylor_extended(z, alpha, beta, rtol)


def ml_asymptotic(z, alpha: float, beta: float = 1.0, n_terms: int = 8) -> complex:
    """Truncated large-|z| expansion -sum_{k=1}^{n_terms} z^{-k}/Gamma(beta-k alpha).

    Valid (with O(|z|^{-n_terms-1}) error) in the sector
    alpha*pi/2 < |arg z| <= pi; exposed for use as an independent reference.
    """
    _validate_ml_params(alpha, beta)
    terms = _asymptotic_terms(complex(z), alpha, beta, n_terms)
    return complex(-terms.sum())


def prabhakar(z, alpha: float, beta: float, gamma_order: int = 1, rtol: float = 1e-13) -> complex:
    """Three-parameter Mittag-Leffler function E^{gamma}_{alpha,beta}(z).

    Supports gamma_order in {1, 2}.  gamma_order=1 is E_{alpha,beta}; the
    second order is evaluated through the reduction formula

        E^2_{alpha,beta}(z) = [E_{alpha,beta-1}(z)
                               + (1 - beta + alpha) E_{alpha,beta}(z)] / alpha.
    """
    if gamma_order != int(gamma_order) or not 1 <= int(gamma_order) <= 2:
        raise ValueError(f"gamma_order must be 1 or 2, got {gamma_order!r}")
    if int(gamma_order) == 1:
        return mittag_leffler(z, alpha, beta, rtol)
    e1 = mittag_leffler(z, alpha, beta - 1.0, rtol)
    e2 = mittag_leffler(z, alpha, beta, rtol)
    return (e1 + (1.0 - beta + alpha) * e2) / alpha


def resolvent_matrix(A, alpha: float, beta: float, t: float,
                     cond_cap: float = 1e8, rtol: float = 1e-13) -> np.ndarray:
    """t^{beta-1} E_{alpha,beta}(t^alpha A) through an eigendecomposition.

    R_{alpha,1}(t) = E_alpha(t^alpha A) and
    R_{alpha,alpha}(t) = t^{alpha-1} E_{alpha,alpha}(t^alpha A) are the
    fractional resolvent operators of D^alpha y = A y.

    Requires A diagonalizable with eigenbasis condition number below
    `cond_cap`; raises EigenbasisError otherwise (no Schur-Parlett fallback).
    """
    if t <= 0:
        raise ValueError("t must be positive")
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    ta = t ** alpha
    prefac = t ** (beta - 1.0)
    if A.shape[0] == 1:
        return np.array([[prefac * mittag_leffler(ta * A[0, 0], alpha, beta, rtol)]])
    evals, V = np.linalg.eig(A)
    cond = np.linalg.cond(V)
    if not np.isfinite(cond) or cond > cond_cap:
        raise EigenbasisError(
            f"eigenbasis condition number {cond:.3g} exceeds cap {cond_cap:g}"
        )
    fvals = np.array([mittag_leffler(ta * lam, alpha, beta, rtol) for lam in evals])
    return prefac * (V * fvals) @ np.linalg.inv(V)


class SectorResult(NamedTuple):
    """Outcome of the stability-sector test."""

    in_sector: bool
    margin: float  # |arg(lambda)| - alpha*pi/2, NaN for lambda = 0
    critical: bool  # on the sector boundary (or lambda = 0), treated unstable


#: |margin| below which an eigenvalue counts as sitting on the sector boundary.
SECTOR_BOUNDARY_TOL = 1e-12


def in_stable_sector(lam, alpha: float) -> SectorResult:
    """Test lambda against the stability sector {z != 0 : |arg z| > alpha*pi/2}.

    The boundary case |arg(lambda)| = alpha*pi/2 (within SECTOR_BOUNDARY_TOL)
    and lambda = 0 are flagged critical and reported as not in the sector.
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    lam = complex(lam)
    if lam == 0:
        return SectorResult(False, float("nan"), True)
    margin = abs(cmath.phase(lam)) - alpha * math.pi / 2.0
    critical = abs(margin) <= SECTOR_BOUNDARY_TOL
    return SectorResult(margin > 0 and not critical, margin, critical)
