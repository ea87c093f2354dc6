"""Analytic error predictions: how much worse the released statistic gets
for each combination of mechanism and correlation bound.

Accuracy is stated as (alpha, beta): with probability at least 1 - beta
the released value is within alpha of the true query value. For Laplace
noise this inverts in closed form; for the randomized-response comparison
the error law is a binomial convolution handled exactly in log-space.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp
from scipy.stats import binom

from .bounds import calibrate
from .errors import NoSolution
from .models import (
    CorrelationModel,
    GaussianCorrelationModel,
    LimitedGroupModel,
    MarkovChainModel,
)

__all__ = [
    "AccuracyMethod",
    "AccuracyReport",
    "laplace_alpha",
    "bdp_alpha",
    "rr_accuracy_beta",
    "rr_alpha_for_beta",
]


class AccuracyMethod(str, enum.Enum):
    DP_LAPLACE = "dp_laplace"
    BDP_GENERAL = "bdp_general"
    BDP_GAUSSIAN = "bdp_gaussian"
    BDP_MARKOV = "bdp_markov"
    RR_BDP = "rr_bdp"


_METHOD_BY_MODEL = {
    LimitedGroupModel: AccuracyMethod.BDP_GENERAL,
    GaussianCorrelationModel: AccuracyMethod.BDP_GAUSSIAN,
    MarkovChainModel: AccuracyMethod.BDP_MARKOV,
}


@dataclass(frozen=True)
class AccuracyReport:
    alpha: float
    beta: float
    method: AccuracyMethod

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"alpha must be nonnegative, got {self.alpha}")
        if not 0 < self.beta <= 1:
            raise ValueError(f"beta must lie in (0, 1], got {self.beta}")


def laplace_alpha(beta: float, sensitivity: float, dp_tau: float) -> float:
    """Error radius of the Laplace mechanism at failure probability beta:
    ln(1/beta) * sensitivity / dp_tau."""
    if not 0 < beta <= 1:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    if sensitivity <= 0:
        raise ValueError(f"sensitivity must be positive, got {sensitivity}")
    if dp_tau <= 0:
        raise ValueError(f"dp_tau must be positive, got {dp_tau}")
    return math.log(1.0 / beta) * sensitivity / dp_tau


def bdp_alpha(
    beta: float,
    sensitivity: float,
    bdp_epsilon: float,
    model: CorrelationModel,
    clip_diameter: float | None = None,
) -> AccuracyReport:
    """Error radius when the mechanism is recalibrated so that informed
    adversaries on correlated data still see at most ``bdp_epsilon``.

    Equals the plain Laplace radius at ``bdp_epsilon`` inflated by exactly
    the h factor of the bound that applies to the model. Propagates
    :class:`InfeasibleTarget` when no noise level can meet the target
    (chain model with the target at or below its floor).
    """
    result = calibrate(bdp_epsilon, model, clip_diameter=clip_diameter)
    alpha = laplace_alpha(beta, sensitivity, result.dp_tau)
    return AccuracyReport(alpha=alpha, beta=beta, method=_METHOD_BY_MODEL[type(model)])


def rr_accuracy_beta(n: int, n1: int, flip_prob: float, alpha: float) -> float:
    """Exact failure probability of the debiased randomized-response count.

    The perturbed-ones count is Z = Bin(n - n1, q) + Bin(n1, 1 - q) for
    flip probability q; the debiased estimate misses by more than alpha
    exactly when Z leaves (mu - t, mu + t) with t = alpha (2p - 1),
    mu = n1 (2p - 1) + n (1 - p), p = 1 - q. Both tails are summed exactly
    over the convolution in log-space; endpoints follow floor(mu - t) and
    ceil(mu + t).
    """
    if not 0 <= n1 <= n:
        raise ValueError(f"need 0 <= n1 <= n, got n1={n1}, n={n}")
    if not 0 <= flip_prob < 0.5:
        raise ValueError(f"flip_prob must lie in [0, 0.5), got {flip_prob}")
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    q = float(flip_prob)
    p = 1.0 - q
    t = alpha * (2.0 * p - 1.0)
    mu = n1 * (2.0 * p - 1.0) + n * (1.0 - p)
    lo = math.floor(mu - t)
    hi = math.ceil(mu + t)

    j = np.arange(n1 + 1)
    log_pmf1 = binom.logpmf(j, n1, p)
    with np.errstate(divide="ignore"):
        lower = -np.inf
        if lo >= 0:
            lower = logsumexp(log_pmf1 + binom.logcdf(lo - j, n - n1, q))
        upper = -np.inf
        if hi <= n:
            upper = logsumexp(log_pmf1 + binom.logsf(hi - 1 - j, n - n1, q))
    beta = float(np.exp(lower)) + float(np.exp(upper))
    return min(beta, 1.0)


def rr_alpha_for_beta(n: int, n1: int, flip_prob: float, beta: float) -> float:
    """Smallest error radius the randomized-response count achieves at
    failure probability ``beta``, found by bisection on the exact tail
    probability (non-increasing in alpha) to within 1e-6 * n."""
    if not 0 < beta < 1:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    p = 1.0 - float(flip_prob)
    lo = 0.0
    hi = n / (2.0 * p - 1.0) + 1.0
    if rr_accuracy_beta(n, n1, flip_prob, hi) > beta:
        raise NoSolution(
            f"failure probability {beta} unreachable even at alpha={hi!r}"
        )  # tails are empty beyond hi; unreachable in practice
    tol = 1e-6 * max(n, 1)
    while hi - lo > tol:
        mid = (lo + hi) / 2.0
        if mid <= 0.0:
            break
        if rr_accuracy_beta(n, n1, flip_prob, mid) <= beta:
            hi = mid
        else:
            lo = mid
    return hi
