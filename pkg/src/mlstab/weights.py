"""Convolution weight sequences for the five schemes.

Every scheme on a uniform grid is a discrete convolution; this module builds
the weight tables once (they do not depend on the step size h) and the solver
reuses them.  Two equivalent sequences describe each scheme:

* mu    - differential-form weights, generating function F_mu(z);
* omega - integral-form weights, the convolution inverse of mu.

Generating functions:

    F-BDF1    F_mu(z) = (1-z)^alpha
    F-BDF2    F_mu(z) = (3/2 - 2z + z^2/2)^alpha
    F-Adams2  F_omega(z) = (1-z)^(-alpha) (1 - alpha/2 (1-z))
    L1        mu_j = second differences of j^(1-alpha) / Gamma(2-alpha)
    alpha-difference: built from the fractional-sum kernel
              k_n^beta = Gamma(beta+n) / (Gamma(beta) Gamma(1+n)),
              whose first differences are again the (1-z)^alpha binomials.

Fractional powers of polynomials are expanded with the Miller recursion.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "FBDF1",
    "FBDF2",
    "FADAMS2",
    "L1",
    "ALPHA_DIFF",
    "SCHEMES",
    "SchemeWeights",
    "miller_power",
    "conv_inverse",
    "fbdf1_recursion",
    "fbdf_weights",
    "fadams2_weights",
    "l1_weights",
    "alpha_diff_kernel",
    "alpha_diff_weights",
    "scheme_weights",
    "leading_omega",
    "GenEval",
    "generating_fn_eval",
]

FBDF1 = "fbdf1"
FBDF2 = "fbdf2"
FADAMS2 = "fadams2"
L1 = "l1"
ALPHA_DIFF = "alpha_diff"
SCHEMES = (FBDF1, FBDF2, FADAMS2, L1, ALPHA_DIFF)


@dataclass(frozen=True)
class SchemeWeights:
    """Weight tables of one scheme at one alpha.

    mu and omega hold the first n_terms differential/integral weights (omega
    is None for the alpha-difference scheme, which the solver steps directly
    in differential form).  sigma holds the L1 initial-value weights
    sigma_n = (n^(1-alpha) - (n-1)^(1-alpha)) / Gamma(2-alpha) with
    sigma[0] = 0, length n_terms + 1, so that sum(mu[:n+1]) == sigma[n+1].
    """

    scheme_id: str
    alpha: float
    n_terms: int
    mu: np.ndarray | None
    omega: np.ndarray | None
    sigma: np.ndarray | None = None

    def __post_init__(self):
        for arr in (self.mu, self.omega, self.sigma):
            if arr is not None:
                arr.setflags(write=False)


def _validate_alpha(alpha: float, allow_one: bool = True) -> None:
    hi_ok = alpha <= 1.0 if allow_one else alpha < 1.0
    if not (0.0 < alpha and hi_ok):
        rng = "(0, 1]" if allow_one else "(0, 1)"
        raise ValueError(f"alpha must lie in {rng}, got {alpha}")


def miller_power(f, alpha: float, n_terms: int) -> np.ndarray:
    """First n_terms coefficients of (sum_k f_k z^k)^alpha as a formal series.

    Miller recursion: g_0 = f_0^alpha and
        g_n = (1/(n f_0)) sum_{k=1}^{n} (k (1+alpha) - n) f_k g_{n-k}.
    Requires f_0 != 0.  alpha may be any real (negative powers give the
    series of the reciprocal root).
    """
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    f = np.asarray(f)
    if f.ndim != 1 or f.size < 1:
        raise ValueError("f must be a non-empty 1-d coefficient array")
    if f[0] == 0:
        raise ValueError("leading coefficient f[0] must be nonzero")
    dtype = np.result_type(f.dtype, np.float64)
    f = f.astype(dtype)
    g = np.zeros(n_terms, dtype=dtype)
    g[0] = f[0] ** alpha
    kmax = f.size - 1
    k = np.arange(1, kmax + 1)
    for n in range(1, n_terms):
        m = min(n, kmax)
        coef = (k[:m] * (1.0 + alpha) - n) * f[1:m + 1]
        g[n] = np.dot(coef, g[n - 1::-1][:m]) / (n * f[0])
    return g


def conv_inverse(u, n_terms: int) -> np.ndarray:
    """Sequence v with (u * v)_n = delta_{n,0} for n < n_terms.

    Forward substitution: v_0 = 1/u_0, v_n = -(1/u_0) sum_{j>=1} u_j v_{n-j}.
    """
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    u = np.asarray(u)
    if u.size < 1 or u[0] == 0:
        raise ValueError("leading coefficient u[0] must be nonzero")
    dtype = np.result_type(u.dtype, np.float64)
    u = u.astype(dtype)
    v = np.zeros(n_terms, dtype=dtype)
    v[0] = 1.0 / u[0]
    kmax = u.size - 1
    for n in range(1, n_terms):
        m = min(n, kmax)
        v[n] = -np.dot(u[1:m + 1], v[n - 1::-1][:m]) / u[0]
    return v


def fbdf1_recursion(alpha: float, n_terms: int) -> np.ndarray:
    """Binomial weights of (1-z)^alpha by the closed recursion
    mu_0 = 1, mu_j = (1 - (alpha+1)/j) mu_{j-1}."""
    mu = np.empty(n_terms)
    mu[0] = 1.0
    for j in range(1, n_terms):
        mu[j] = mu[j - 1] * (1.0 - (alpha + 1.0) / j)
    return mu


_BDF_POLY = {1: np.array([1.0, -1.0]), 2: np.array([1.5, -2.0, 0.5])}


def fbdf_weights(k: int, alpha: float, n_terms: int) -> SchemeWeights:
    """Weights of the k-step fractional BDF scheme, k in {1, 2}.

    mu is the Miller expansion of (sum_{l=1}^{k} (1-z)^l / l)^alpha and
    omega its convolution inverse.
    """
    if k not in _BDF_POLY:
        raise ValueError(f"unsupported F-BDF step number k={k} (only 1 and 2)")
    _validate_alpha(alpha)
    mu = miller_power(_BDF_POLY[k], alpha, n_terms)
    omega = conv_inverse(mu, n_terms)
    return SchemeWeights(FBDF1 if k == 1 else FBDF2, alpha, n_terms, mu, omega)


def fadams2_weights(alpha: float, n_terms: int) -> SchemeWeights:
    """Weights of the 2-step fractional Adams scheme.

    omega is the product series (1-z)^(-alpha) * ((1-alpha/2) + (alpha/2) z),
    so omega_0 = 1 - alpha/2; mu is its convolution inverse.
    """
    _validate_alpha(alpha)
    base = miller_power(np.array([1.0, -1.0]), -alpha, n_terms)
    omega = np.empty(n_terms)
    c0, c1 = 1.0 - alpha / 2.0, alpha / 2.0
    omega[0] = c0 * base[0]
    omega[1:] = c0 * base[1:] + c1 * base[:-1]
    mu = conv_inverse(omega, n_terms)
    return SchemeWeights(FADAMS2, alpha, n_terms, mu, omega)


def l1_weights(alpha: float, n_terms: int) -> SchemeWeights:
    """Weights of the L1 scheme.

    mu_0 = 1/Gamma(2-alpha),
    mu_j = ((j+1)^(1-alpha) - 2 j^(1-alpha) + (j-1)^(1-alpha)) / Gamma(2-alpha),
    sigma_n = (n^(1-alpha) - (n-1)^(1-alpha)) / Gamma(2-alpha).
    """
    _validate_alpha(alpha)
    g = math.gamma(2.0 - alpha)
    n = np.arange(n_terms + 1, dtype=float)
    pw = n ** (1.0 - alpha)
    sigma = np.zeros(n_terms + 1)
    sigma[1:] = (pw[1:] - pw[:-1]) / g
    mu = np.empty(n_terms)
    mu[0] = 1.0 / g
    if n_terms > 1:
        mu[1:] = (sigma[2:] - sigma[1:-1])  # second differences, telescoped
    omega = conv_inverse(mu, n_terms)
    return SchemeWeights(L1, alpha, n_terms, mu, omega, sigma)


def alpha_diff_kernel(beta: float, n_terms: int) -> np.ndarray:
    """Fractional-sum kernel k_n^beta = Gamma(beta+n)/(Gamma(beta) Gamma(1+n)).

    Computed by the stable recursion k_n = k_{n-1} (beta + n - 1)/n.
    Accepts any beta in (0, 1]; the alpha-difference scheme uses beta = 1-alpha.
    """
    if not (0.0 < beta <= 1.0):
        raise ValueError(f"kernel order must lie in (0, 1], got {beta}")
    n = np.arange(1, n_terms, dtype=float)
    out = np.empty(n_terms)
    out[0] = 1.0
    if n_terms > 1:
        out[1:] = np.cumprod((beta + n - 1.0) / n)
    return out


def alpha_diff_weights(alpha: float, n_terms: int) -> SchemeWeights:
    """Differential-form weights of the alpha-difference scheme.

    The operator is the first difference of the fractional sum with kernel
    k^(1-alpha), so its convolution weights are mu_0 = 1,
    mu_j = k_j^(1-alpha) - k_{j-1}^(1-alpha): numerically the same binomials
    as F-BDF1.  The schemes differ only in how the initial value enters the
    step equation (see solver.solve_alpha_diff).  No omega table is stored.
    """
    _validate_alpha(alpha, allow_one=False)
    kern = alpha_diff_kernel(1.0 - alpha, n_terms)
    mu = np.empty(n_terms)
    mu[0] = 1.0
    mu[1:] = np.diff(kern)
    return SchemeWeights(ALPHA_DIFF, alpha, n_terms, mu, None)


def scheme_weights(scheme_id: str, alpha: float, n_terms: int) -> SchemeWeights:
    """Weight table for any scheme id."""
    scheme_id = scheme_id.replace("-", "_").lower()
    if scheme_id == FBDF1:
        return fbdf_weights(1, alpha, n_terms)
    if scheme_id == FBDF2:
        return fbdf_weights(2, alpha, n_terms)
    if scheme_id == FADAMS2:
        return fadams2_weights(alpha, n_terms)
    if scheme_id == L1:
        return l1_weights(alpha, n_terms)
    if scheme_id == ALPHA_DIFF:
        return alpha_diff_weights(alpha, n_terms)
    raise ValueError(f"unknown scheme {scheme_id!r}; expected one of {SCHEMES}")


def leading_omega(scheme_id: str, alpha: float) -> float:
    """omega_0 = F_omega(0) in closed form (the implicit step coefficient)."""
    scheme_id = scheme_id.replace("-", "_").lower()
    if scheme_id in (FBDF1, ALPHA_DIFF):
        return 1.0
    if scheme_id == FBDF2:
        return (2.0 / 3.0) ** alpha
    if scheme_id == FADAMS2:
        return 1.0 - alpha / 2.0
    if scheme_id == L1:
        return math.gamma(2.0 - alpha)
    raise ValueError(f"unknown scheme {scheme_id!r}")


class GenEval(NamedTuple):
    """Truncated generating-function value with a tail estimate."""

    value: complex
    tail_bound: float


def generating_fn_eval(w: SchemeWeights, which: str, z) -> GenEval:
    """Evaluate F_mu or F_omega at z from the stored weights.

    For |z| < 1 the reported tail bound is geometric,
    B |z|^M / (1 - |z|) with B the largest recent coefficient magnitude.
    At |z| = 1 the L1 mu-series is absolutely summable and alternates in
    phase away from z = 1, giving the Dirichlet-type bound
    2 |w_{M-1}| / |1 - z|; for other schemes at |z| = 1 no bound is
    available and a divergence warning is raised (tail_bound = inf).
    """
    coeffs = {"mu": w.mu, "omega": w.omega}.get(which)
    if coeffs is None:
        raise ValueError(f"scheme {w.scheme_id} has no {which!r} table")
    z = complex(z)
    az = abs(z)
    if az > 1.0 + 1e-12:
        raise ValueError("generating functions are evaluated on |z| <= 1 only")
    m = coeffs.size
    value = complex(np.polyval(coeffs[::-1], z))
    recent = float(np.max(np.abs(coeffs[-min(16, m):])))
    if az < 1.0 - 1e-12:
        tail = recent * az ** m / (1.0 - az)
    elif w.scheme_id == L1 and which == "mu" and z != 1.0:
        tail = 2.0 * abs(coeffs[-1]) / abs(1.0 - z)
    else:
        warnings.warn(
            f"no tail bound for {w.scheme_id}/{which} on |z| = 1; "
            "value is the bare partial sum",
            stacklevel=2,
        )
        tail = math.inf
    return GenEval(value, tail)
