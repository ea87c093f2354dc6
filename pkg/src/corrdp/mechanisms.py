"""Randomized mechanisms and the queries they privatize.

All samplers draw through inverse-CDF transforms of uniforms from the
counter-based generators in :mod:`corrdp.seeding`: one uniform per noise
value, no rejection steps, so a fixed key reproduces the same output on
any platform and trials can run in any order.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .bounds import CalibrationResult
from .errors import DomainError, InfeasibleTarget
from .models import Interval
from .seeding import generator_from_key

__all__ = [
    "MechanismKind",
    "QueryKind",
    "MechanismSpec",
    "QuerySpec",
    "clip_database",
    "evaluate_query",
    "laplace_noise_from_uniform",
    "laplace_mechanism",
    "grr_perturb",
    "rr_bdp_flip_probability",
    "flip_binary",
    "rr_debias_count",
    "privatize",
]


class MechanismKind(str, enum.Enum):
    LAPLACE = "laplace"
    CLIPPED_LAPLACE = "clipped_laplace"
    GRR = "grr"
    RR_BDP = "rr_bdp"


class QueryKind(str, enum.Enum):
    SUM = "sum"
    COUNT = "count"


@dataclass(frozen=True)
class MechanismSpec:
    kind: MechanismKind
    dp_tau: float
    sensitivity: float
    clip: Interval | None = None
    flip_prob: float | None = None

    def __post_init__(self):
        if self.dp_tau <= 0:
            raise ValueError(f"dp_tau must be positive, got {self.dp_tau}")
        if self.sensitivity <= 0:
            raise ValueError(f"sensitivity must be positive, got {self.sensitivity}")
        if self.kind is MechanismKind.CLIPPED_LAPLACE and self.clip is None:
            raise ValueError("clipped_laplace requires a clip interval")
        if self.kind in (MechanismKind.GRR, MechanismKind.RR_BDP):
            if self.flip_prob is None:
                raise ValueError(f"{self.kind.value} requires flip_prob")
            if not 0 <= self.flip_prob < 0.5:
                raise ValueError(f"flip_prob must lie in [0, 0.5), got {self.flip_prob}")

    @property
    def laplace_scale(self) -> float:
        return self.sensitivity / self.dp_tau


@dataclass(frozen=True)
class QuerySpec:
    """A statistic to release: clipped sum of numeric records, or count of
    ones over binary states. Sensitivity is the clip diameter for sums and
    1 for counts."""

    kind: QueryKind
    clip: Interval | None = None

    def __post_init__(self):
        if self.kind is QueryKind.SUM and self.clip is None:
            raise ValueError("sum queries need a clip interval to bound sensitivity")
        if self.kind is QueryKind.COUNT and self.clip is not None:
            raise ValueError("count queries act on binary states; clip does not apply")

    @property
    def sensitivity(self) -> float:
        if self.kind is QueryKind.SUM:
            return self.clip.diameter
        return 1.0


def clip_database(data, clip: Interval) -> np.ndarray:
    """Coordinatewise projection onto [clip.low, clip.high]."""
    return np.clip(np.asarray(data, dtype=float), clip.low, clip.high)


def evaluate_query(query: QuerySpec, data) -> float:
    """Exact query value on the database (after clipping, for sums)."""
    x = np.asarray(data, dtype=float)
    if x.size == 0:
        return 0.0
    if query.kind is QueryKind.SUM:
        return float(clip_database(x, query.clip).sum())
    ok = (x == 0) | (x == 1)
    if not ok.all():
        bad = x[~ok][0]
        raise ValueError(f"count queries need binary data, found {bad!r}")
    return float(x.sum())


# One uniform per draw; endpoints excluded so the log never sees 0.
_U_LO = 1e-300
_U_HI = 1.0 - 1e-16


def laplace_noise_from_uniform(u, scale: float):
    """Inverse Laplace CDF applied to uniforms in [0, 1): the one noise
    transform shared by the scalar mechanism and vectorized trial runs, so
    both produce bit-identical values from the same stream."""
    u = np.minimum(np.maximum(u, _U_LO), _U_HI)
    return np.where(u < 0.5, scale * np.log(2.0 * u), -scale * np.log(2.0 * (1.0 - u)))


def laplace_mechanism(query_value: float, sensitivity: float, dp_tau: float, seed: int) -> float:
    """Add Laplace noise at scale sensitivity/dp_tau, via the inverse CDF
    of a single seeded uniform. The median draw (u = 0.5) adds exactly 0."""
    if sensitivity <= 0:
        raise ValueError(f"sensitivity must be positive, got {sensitivity}")
    if dp_tau <= 0:
        raise ValueError(f"dp_tau must be positive, got {dp_tau}")
    scale = sensitivity / dp_tau
    u = float(generator_from_key(seed).random())
    return float(query_value) + float(laplace_noise_from_uniform(u, scale))


def grr_perturb(record: int, alphabet_size: int, dp_epsilon: float, seed: int) -> int:
    """Randomized response over an alphabet of s states: keep the record
    with probability e^eps / (e^eps + s - 1), otherwise output one of the
    other s - 1 states uniformly. One uniform decides both steps."""
    s = int(alphabet_size)
    if s < 2:
        raise ValueError(f"alphabet size must be at least 2, got {s}")
    if not 0 <= record < s:
        raise ValueError(f"record {record} outside alphabet 0..{s - 1}")
    if dp_epsilon <= 0:
        raise ValueError(f"dp_epsilon must be positive, got {dp_epsilon}")
    e = math.exp(dp_epsilon)
    keep = e / (e + s - 1)
    u = float(generator_from_key(seed).random())
    if u < keep:
        return int(record)
    # Map the remaining mass uniformly onto the other states.
    j = int((u - keep) / (1.0 - keep) * (s - 1))
    j = min(j, s - 2)
    return j if j < record else j + 1


def rr_bdp_flip_probability(bdp_epsilon: float, change_prob: float) -> float:
    """Smallest per-record flip probability for binary randomized response
    on a lazy two-state chain (state-change probability ``change_prob``)
    such that the leakage against an informed adversary stays below
    ``bdp_epsilon`` as the series grows.

    With r = change_prob and a = r^2 e^eps, the defining root is
    (4 + r(r e^eps - 2) - sqrt(r^2 e^eps (4 + r(r e^eps - 4)))) over
    (8 + 2 r (r e^eps + r - 4)); multiplying by the conjugate collapses it
    to q = 2 / (L + S) with L = a + 4 - 2r and S = sqrt(a (a + 4 - 4r)),
    which is exact algebra and immune to the cancellation the direct
    difference suffers once e^eps dominates.
    """
    r = float(change_prob)
    if not 0 < r < 0.5:
        raise DomainError(f"change probability must lie in (0, 0.5), got {r}")
    if bdp_epsilon <= 0:
        raise DomainError(f"leakage target must be positive, got {bdp_epsilon}")
    a = r * r * math.exp(bdp_epsilon)
    L = a + 4.0 - 2.0 * r
    S = math.sqrt(a * (a + 4.0 - 4.0 * r))
    q = 2.0 / (L + S)
    if not 0.0 < q < 0.5:
        raise DomainError(f"flip probability {q!r} fell outside (0, 0.5)")
    return q


def flip_binary(states, flip_prob: float, seed: int) -> np.ndarray:
    """Flip each binary state independently with the given probability,
    using one uniform per record from the stream keyed by ``seed``."""
    x = np.asarray(states, dtype=np.int64)
    if x.size and (x.min() < 0 or x.max() > 1):
        raise ValueError("states must be 0/1")
    if not 0 <= flip_prob < 0.5:
        raise ValueError(f"flip_prob must lie in [0, 0.5), got {flip_prob}")
    u = generator_from_key(seed).random(x.size)
    return np.where(u < flip_prob, 1 - x, x)


def rr_debias_count(perturbed, flip_prob: float) -> float:
    """Unbiased estimate of the number of ones before perturbation:
    (sum(y) - n q) / (1 - 2 q) for flip probability q."""
    y = np.asarray(perturbed, dtype=float)
    q = float(flip_prob)
    if not 0 <= q < 0.5:
        raise ValueError(f"flip_prob must lie in [0, 0.5), got {q}")
    n = y.size
    return (float(y.sum()) - n * q) / (1.0 - 2.0 * q)


def privatize(query: QuerySpec, data, calibration: CalibrationResult, seed: int) -> float:
    """Release the query value under the calibration's DP parameter:
    clip (sums), evaluate exactly, then add Laplace noise at scale
    sensitivity/dp_tau."""
    if not calibration.feasible:
        raise InfeasibleTarget(
            f"target leakage {calibration.target_epsilon!r} is below the floor "
            f"{calibration.floor_epsilon!r}; nothing to release"
        )
    spec = MechanismSpec(
        kind=MechanismKind.CLIPPED_LAPLACE if query.kind is QueryKind.SUM else MechanismKind.LAPLACE,
        dp_tau=calibration.dp_tau,
        sensitivity=query.sensitivity,
        clip=query.clip,
    )
    value = evaluate_query(query, data)
    return laplace_mechanism(value, spec.sensitivity, spec.dp_tau, seed)
