"""Long-time diagnostics.

* decay-rate index  p(t_n) = -ln(||y_{n+m}|| / ||y_n||) / ln(t_{n+m} / t_n),
  a numerical observation of the exponent in ||y_n|| = O(t_n^-p);
* stability-region boundary sampling 1 / (h^alpha F_omega(e^{i theta}));
* sector classification of the eigenvalues of a problem's linear part;
* the perturbation-smallness check for semi-linear decay,
  1 - ||D_0|| L0 > 0 and
  (1 - ||D_0|| L0)^{-1} lim_n sum_k ||D_{n-k}|| L(t_k) <= rho0 < 1.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import mpmath
import numpy as np

from . import weights as wt
from .resolvent import ResolventSequence, operator_norms
from .solver import FOdeProblem, Trajectory
from .special import SectorResult, in_stable_sector

__all__ = [
    "DECAYS",
    "GROWS",
    "INCONCLUSIVE",
    "DecayReport",
    "p_index",
    "p_at_checkpoints",
    "RegionSample",
    "region_boundary",
    "boundary_point",
    "f_omega_closed",
    "ProblemClassification",
    "classify_problem",
    "PerturbationCheck",
    "UnreliableTailError",
    "perturbation_check",
]

DECAYS = "DECAYS"
GROWS = "GROWS"
INCONCLUSIVE = "INCONCLUSIVE"

#: fitted decay exponents within +-VERDICT_BAND of zero are inconclusive.
VERDICT_BAND = 0.05


@dataclass
class DecayReport:
    """p samples plus a log-log fit of the trajectory norm's final decade.

    fitted_slope uses the decay-positive convention of the index itself
    (||y|| ~ fitted_constant * t^(-fitted_slope)), so DECAYS means
    fitted_slope > VERDICT_BAND.
    """

    m: int
    times: np.ndarray
    p: np.ndarray
    fitted_slope: float
    fitted_constant: float
    verdict: str
    n_skipped: int = 0


def _fit_final_decade(t: np.ndarray, norms: np.ndarray):
    sel = (t > 1.0) & (t >= t[-1] / 10.0) & (norms > 0.0)
    if np.count_nonzero(sel) < 2:
        return 0.0, float(norms[-1]) if norms.size else 0.0
    if np.ptp(norms[sel]) <= 1e-14 * np.max(norms[sel]):
        return 0.0, float(np.mean(norms[sel]))
    coef = np.polyfit(np.log(t[sel]), np.log(norms[sel]), 1)
    return -float(coef[0]), float(math.exp(coef[1]))


def p_index(traj: Trajectory, m: int = 5) -> DecayReport:
    """Decay-rate index of a trajectory, sampled wherever t_n > 1.

    Zero-norm states are skipped and counted in n_skipped.  The verdict comes
    from the fitted slope: DECAYS above +VERDICT_BAND, GROWS below
    -VERDICT_BAND, else INCONCLUSIVE.
    """
    if m < 1:
        raise ValueError("m must be a positive integer")
    t = traj.times
    norms = traj.norms()
    N = traj.n_steps
    if N < m + 2:
        raise ValueError("trajectory too short for the requested offset")
    n_idx = np.arange(1, N - m + 1)
    n_idx = n_idx[t[n_idx] > 1.0]
    good = (norms[n_idx] > 0.0) & (norms[n_idx + m] > 0.0)
    skipped = int(np.count_nonzero(~good))
    if skipped:
        warnings.warn(f"skipped {skipped} zero-norm samples in p_index", stacklevel=2)
    n_idx = n_idx[good]
    p = -np.log(norms[n_idx + m] / norms[n_idx]) / np.log(t[n_idx + m] / t[n_idx])
    slope, const = _fit_final_decade(t, norms)
    if slope > VERDICT_BAND:
        verdict = DECAYS
    elif slope < -VERDICT_BAND:
        verdict = GROWS
    else:
        verdict = INCONCLUSIVE
    return DecayReport(m, t[n_idx], p, slope, const, verdict, skipped)


def p_at_checkpoints(traj: Trajectory, checkpoints, m: int = 5,
                     index_offset: int = 0) -> list[tuple[float, float]]:
    """p at exact grid checkpoints t (requires t/h integral within rounding).

    index_offset shifts the sample index relative to the checkpoint label;
    the published reference grids this package reproduces were sampled one
    index early (offset -1), which changes p by about alpha*h/t.
    """
    t = traj.times
    norms = traj.norms()
    out = []
    for tc in checkpoints:
        n = int(round(tc / traj.h))
        if abs(n * traj.h - tc) > 1e-9 * max(tc, 1.0):
            raise ValueError(f"checkpoint {tc} is not on the grid (h = {traj.h})")
        i = n + index_offset
        if not (1 <= i and i + m < len(norms)):
            raise ValueError(f"checkpoint {tc} outside the computed range")
        p = -math.log(norms[i + m] / norms[i]) / math.log((n + m) / n)
        out.append((tc, p))
    return out


def f_omega_closed(scheme_id: str, alpha: float, z: complex) -> complex:
    """Closed-form F_omega(z) (principal branches), valid on |z| <= 1, z != 1.

    The L1 generating function goes through the polylogarithm,
    F_mu(z) = (1/Gamma(2-alpha)) ((1-z)^2 / z) Li_{alpha-1}(z), which
    converges on the closed disk minus z = 1.
    """
    scheme_id = scheme_id.replace("-", "_").lower()
    z = complex(z)
    if z == 1.0:
        raise ZeroDivisionError("F_omega diverges at z = 1")
    if scheme_id == wt.FBDF1:
        return (1.0 - z) ** (-alpha)
    if scheme_id == wt.FBDF2:
        return ((1.0 - z) * (3.0 - z) / 2.0) ** (-alpha)
    if scheme_id == wt.FADAMS2:
        return (1.0 - z) ** (-alpha) * (1.0 - 0.5 * alpha * (1.0 - z))
    if scheme_id == wt.L1:
        if z == 0.0:
            return math.gamma(2.0 - alpha)  # removable singularity of F_mu
        li = complex(mpmath.polylog(alpha - 1.0, z))
        return math.gamma(2.0 - alpha) * z / ((1.0 - z) ** 2 * li)
    raise ValueError(f"no closed-form generating function for {scheme_id!r}")


def boundary_point(scheme_id: str, alpha: float, h: float, theta: float) -> complex:
    """One stability-boundary sample 1/(h^alpha F_omega(e^{i theta}))."""
    if theta == 0.0:
        raise ValueError("theta = 0 is the divergence point of F_omega")
    z = cmath.exp(1j * theta)
    return 1.0 / (h ** alpha * f_omega_closed(scheme_id, alpha, z))


@dataclass
class RegionSample:
    """Sampled boundary of the numerical stability region.

    The stability region is the complement of
    {1/(h^alpha F_omega(z)) : |z| <= 1}; boundary holds the images of the
    unit circle on a theta grid offset by half a cell so theta = 0 (where
    F_omega diverges) is excluded.  n_terms is 0 when closed forms are used.
    """

    scheme_id: str
    alpha: float
    h: float
    theta: np.ndarray
    boundary: np.ndarray
    n_terms: int = 0


def region_boundary(scheme_id: str, alpha: float, h: float,
                    n_theta: int = 2048) -> RegionSample:
    """Sample the numerical stability-region boundary on a theta grid."""
    if not (0.0 < alpha <= 1.0):
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if n_theta < 8:
        raise ValueError("n_theta too small")
    j = np.arange(n_theta)
    theta = -math.pi + 2.0 * math.pi * (j + 0.5) / n_theta
    vals = np.array([boundary_point(scheme_id, alpha, h, th) for th in theta])
    return RegionSample(scheme_id.replace("-", "_").lower(), alpha, h, theta, vals)


@dataclass
class ProblemClassification:
    """Sector placement of each eigenvalue of the linear part."""

    alpha: float
    eigenvalues: np.ndarray
    sectors: list[SectorResult]
    verdict: str  # "stable" / "critical" / "unstable"


def classify_problem(problem: FOdeProblem, alpha: float | None = None) -> ProblemClassification:
    """Eigenvalues of A against the stability sector at the problem's alpha.

    Eigenvalues within solver noise of the origin (relative to ||A||) are
    flagged critical: the sector excludes zero, and the dense eigensolver
    cannot place an exact zero mode better than ~1e-12 ||A||.
    """
    alpha = problem.alpha if alpha is None else alpha
    evals = np.linalg.eigvals(problem.A)
    zero_floor = 1e-9 * max(1.0, float(np.linalg.norm(problem.A, 2)))
    sectors = [in_stable_sector(0.0 if abs(lam) <= zero_floor else lam, alpha)
               for lam in evals]
    if any((not s.in_sector) and (not s.critical) for s in sectors):
        verdict = "unstable"
    elif any(s.critical for s in sectors):
        verdict = "critical"
    else:
        verdict = "stable"
    return ProblemClassification(alpha, evals, sectors, verdict)


class UnreliableTailError(ArithmeticError):
    """The fitted decay of ||D_n|| cannot bound the series tail."""


@dataclass
class PerturbationCheck:
    """Evaluation of the perturbation-smallness condition.

    rho0 is the decisive quantity
    (1 - ||D_0|| L0)^{-1} (lim_n sum_k ||D_{n-k}|| L(t_k) + tail bound);
    the limit is approximated at n = n_max and also as a supremum over the
    computed range (rho0 takes the larger), with the dropped tail bounded
    through the fitted power-law decay of ||D_n||.
    """

    D0_norm: float
    L0: float
    S0: float          # sum_{k>=1} ||D_k|| including the tail bound
    S0_tail: float
    condition1: bool   # 1 - ||D_0|| L0 > 0
    rho0_limit: float
    rho0_sup: float
    rho0: float
    passed: bool


def perturbation_check(problem: FOdeProblem, r: ResolventSequence,
                       L: Callable[[float], float] | None = None) -> PerturbationCheck:
    """Check the smallness condition of the Lipschitz envelope L(t).

    L defaults to the constant problem.lipschitz_bound; for constant L the
    condition reduces to L0 < 1/(||D_0|| + S0).  Raises UnreliableTailError
    when ||D_n|| shows no summable decay over the computed range.
    """
    if L is None:
        if problem.lipschitz_bound is None:
            raise ValueError("no Lipschitz envelope: pass L or set problem.lipschitz_bound")
        const = float(problem.lipschitz_bound)
        L = lambda t: const  # noqa: E731
    t = r.times
    nD = operator_norms(r.D)
    Lvals = np.array([float(L(tk)) for tk in t])
    if np.any(Lvals < 0.0):
        raise ValueError("L(t) must be nonnegative")
    L0 = float(np.max(Lvals))
    D0 = float(nD[0])

    sel = (t > 1.0) & (t >= t[-1] / 10.0) & (nD > 0.0)
    if np.count_nonzero(sel) < 2 or np.ptp(nD[sel]) <= 1e-14 * np.max(nD[sel]):
        raise UnreliableTailError("||D_n|| carries no decay over the fit window")
    coef = np.polyfit(np.log(t[sel]), np.log(nD[sel]), 1)
    slope, logc = float(coef[0]), float(coef[1])
    if slope >= -1.0:
        raise UnreliableTailError(
            f"fitted ||D_n|| ~ t^{slope:.3f} is not summable; tail bound unavailable")
    tail = math.exp(logc) / r.h * t[-1] ** (slope + 1.0) / (-slope - 1.0)

    S0 = float(np.sum(nD[1:])) + tail
    conv = np.convolve(nD[1:], Lvals)[: r.n_max]  # entry n-1 = sum_{k=0}^{n-1} ||D_{n-k}|| L(t_k)
    denom = 1.0 - D0 * L0
    condition1 = denom > 0.0
    limit_term = float(conv[-1]) + L0 * tail
    sup_term = float(np.max(conv)) + L0 * tail
    rho0_limit = limit_term / denom if condition1 else math.inf
    rho0_sup = sup_term / denom if condition1 else math.inf
    rho0 = max(rho0_limit, rho0_sup)
    return PerturbationCheck(
        D0_norm=D0, L0=L0, S0=S0, S0_tail=tail, condition1=condition1,
        rho0_limit=rho0_limit, rho0_sup=rho0_sup, rho0=rho0,
        passed=condition1 and rho0 < 1.0,
    )
