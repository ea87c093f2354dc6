"""Leakage bounds for correlated data and their inverses.

Three bounds map a differential-privacy leakage parameter to the leakage
an informed adversary can extract when records are correlated:

* ``general_bound``  — worst case over any correlation confined to groups
  of at most m records: a factor of m.
* ``gaussian_bound`` — Gaussian prior with bounded pairwise correlation:
  a factor h(m, rho) < m in the regime where correlation is weak.
* ``markov_bound``   — time-series states forming a stationary chain: an
  additive offset 4 ln(gamma) independent of the chain length.

``calibrate`` inverts whichever bound matches the supplied model, so a
caller states the leakage target and receives the DP parameter to run
the mechanism at.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import InfeasibleCorrelation, InfeasibleTarget
from .models import (
    CorrelationModel,
    GaussianCorrelationModel,
    LimitedGroupModel,
    MarkovChainModel,
)

__all__ = [
    "BoundKind",
    "CalibrationResult",
    "general_bound",
    "gaussian_h",
    "gaussian_bound",
    "gaussian_improvement_threshold",
    "markov_bound",
    "calibrate",
    "free_lunch_alpha_floor",
    "markov_vs_general_threshold",
]


class BoundKind(str, enum.Enum):
    GENERAL = "general"
    GAUSSIAN = "gaussian"
    MARKOV = "markov"


@dataclass(frozen=True)
class CalibrationResult:
    """DP parameter to run at so the selected bound meets a leakage target.

    ``dp_tau`` is sensitivity-normalized: the Laplace mechanism that
    realizes it uses scale (query sensitivity)/dp_tau. ``h_factor`` is the
    multiplicative accuracy cost relative to treating the data as
    independent. For the chain bound, ``floor_epsilon`` is the smallest
    achievable leakage (the additive offset); targets at or below it are
    infeasible and carry dp_tau = 0.
    """

    bound: BoundKind
    target_epsilon: float
    dp_tau: float
    h_factor: float
    feasible: bool
    floor_epsilon: float = 0.0

    def __post_init__(self):
        if self.target_epsilon <= 0:
            raise ValueError(f"target leakage must be positive, got {self.target_epsilon}")
        if self.dp_tau < 0:
            raise ValueError(f"dp_tau must be nonnegative, got {self.dp_tau}")
        if self.feasible != (self.dp_tau > 0):
            raise ValueError("feasible flag inconsistent with dp_tau")
        if self.floor_epsilon < 0:
            raise ValueError(f"floor must be nonnegative, got {self.floor_epsilon}")


def general_bound(dp_epsilon: float, m: int) -> float:
    """Leakage of an eps-DP mechanism when up to m records move together."""
    if dp_epsilon <= 0:
        raise ValueError(f"dp_epsilon must be positive, got {dp_epsilon}")
    if m < 1:
        raise ValueError(f"m must be at least 1, got {m}")
    return float(m) * dp_epsilon


def gaussian_h(m: int, rho: float) -> float:
    """Leakage inflation factor h = m^2 / (4 (1/rho - m + 2)) + 1 for a
    Gaussian prior with group size m and max pairwise correlation rho.

    Only defined while rho (m - 2) < 1; past that point the conditional
    variance floor used in its derivation is nonpositive and
    :class:`InfeasibleCorrelation` is raised.
    """
    if m < 2:
        raise ValueError(f"m must be at least 2, got {m}")
    if not 0 <= rho <= 1:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    if rho == 0.0:
        return 1.0  # independent records: no inflation (continuous limit)
    if rho * (m - 2) >= 1:
        raise InfeasibleCorrelation(
            f"rho*(m-2) = {rho * (m - 2)!r} >= 1; the Gaussian bound does not apply"
        )
    return m * m / (4.0 * (1.0 / rho - m + 2.0)) + 1.0


def gaussian_bound(dp_tau: float, m: int, rho: float, clip_diameter: float) -> float:
    """Leakage of a metric-private mechanism with per-unit coefficient
    dp_tau on data clipped to a range of the given diameter, under the
    Gaussian model: h(m, rho) * diameter * dp_tau."""
    if dp_tau <= 0:
        raise ValueError(f"dp_tau must be positive, got {dp_tau}")
    if clip_diameter <= 0:
        raise ValueError(f"clip diameter must be positive, got {clip_diameter}")
    return gaussian_h(m, rho) * clip_diameter * dp_tau


def gaussian_improvement_threshold(m: int) -> float:
    """Largest rho at which the Gaussian bound still beats the general
    bound for group size m: (m - 1) / (1.25 m^2 - 3 m + 2)."""
    if m < 2:
        raise ValueError(f"m must be at least 2, got {m}")
    return (m - 1.0) / (1.25 * m * m - 3.0 * m + 2.0)


def markov_bound(dp_epsilon: float, gamma: float) -> float:
    """Leakage of an eps-DP mechanism on a stationary chain whose
    transition probabilities span a ratio of gamma: eps + 4 ln(gamma)."""
    if dp_epsilon <= 0:
        raise ValueError(f"dp_epsilon must be positive, got {dp_epsilon}")
    if gamma < 1:
        raise ValueError(f"gamma must be at least 1, got {gamma}")
    return dp_epsilon + 4.0 * math.log(gamma)


def calibrate(
    requirement: float,
    model: CorrelationModel,
    clip_diameter: float | None = None,
    strict: bool = True,
) -> CalibrationResult:
    """DP parameter that meets a leakage requirement under the bound
    matching the model type.

    Group-size models invert the multiplicative factor m; Gaussian models
    invert h(m, rho) and require ``clip_diameter`` (the mechanism's scale
    depends on it even though the normalized dp_tau does not); chain
    models subtract the offset 4 ln(gamma).

    A chain target at or below the offset cannot be met at any noise
    level. With ``strict`` (the default) that raises
    :class:`InfeasibleTarget`; with ``strict=False`` it returns the
    structured infeasible result so sweeps can chart the frontier.
    """
    if requirement <= 0:
        raise ValueError(f"target leakage must be positive, got {requirement}")

    if isinstance(model, LimitedGroupModel):
        tau = requirement / model.m
        return CalibrationResult(
            bound=BoundKind.GENERAL,
            target_epsilon=requirement,
            dp_tau=tau,
            h_factor=float(model.m),
            feasible=True,
        )

    if isinstance(model, GaussianCorrelationModel):
        if clip_diameter is None or clip_diameter <= 0:
            raise ValueError("the Gaussian bound needs a positive clip diameter")
        h = gaussian_h(model.m, model.rho)
        return CalibrationResult(
            bound=BoundKind.GAUSSIAN,
            target_epsilon=requirement,
            dp_tau=requirement / h,
            h_factor=h,
            feasible=True,
        )

    if isinstance(model, MarkovChainModel):
        from .markov import gamma as chain_gamma

        floor = 4.0 * math.log(chain_gamma(model).gamma)
        tau = requirement - floor
        if tau <= 0:
            if strict:
                raise InfeasibleTarget(
                    f"target {requirement!r} does not exceed the chain floor {floor!r}; "
                    "no noise level meets it"
                )
            return CalibrationResult(
                bound=BoundKind.MARKOV,
                target_epsilon=requirement,
                dp_tau=0.0,
                h_factor=math.inf,
                feasible=False,
                floor_epsilon=floor,
            )
        return CalibrationResult(
            bound=BoundKind.MARKOV,
            target_epsilon=requirement,
            dp_tau=tau,
            h_factor=requirement / tau,
            feasible=True,
            floor_epsilon=floor,
        )

    raise TypeError(f"no bound applies to {type(model).__name__}")


def free_lunch_alpha_floor(query_diameter: float) -> float:
    """Open lower bound on the achievable error alpha under arbitrary
    correlation: half the query's value diameter. Any mechanism beating it
    must fail with probability at least 1/(e^eps + 1)."""
    if query_diameter < 0:
        raise ValueError(f"diameter must be nonnegative, got {query_diameter}")
    return query_diameter / 2.0


def markov_vs_general_threshold(n: int, dp_epsilon: float) -> float:
    """Transition-ratio level below which the chain bound is tighter than
    the general bound for a length-n series: exp((n - 1) eps / 4)."""
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    if dp_epsilon <= 0:
        raise ValueError(f"dp_epsilon must be positive, got {dp_epsilon}")
    return math.exp((n - 1) * dp_epsilon / 4.0)
