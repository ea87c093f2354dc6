"""Exact leakage computation for discrete mechanisms on small databases.

For every adversary (a target record plus a known subset), the informed
leakage is the worst log-ratio of output probabilities when the target
record changes value while the unknown records are marginalized under the
joint distribution. This module enumerates that supremum exhaustively, in
log-space, and is the ground truth every analytic bound is tested against.

The supremum over output *sets* reduces to single outputs: a ratio of
sums (Σ aᵢ)/(Σ bᵢ) never exceeds max aᵢ/bᵢ, so adding outputs to a set
can only pull the ratio toward the middle. Singleton enumeration is
therefore lossless, and the set version is retained only in the test
suite as an independent check.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
import yaml

from .errors import TooLarge
from .models import AdversarySpec, JointDiscreteDistribution, MarkovChainModel

__all__ = [
    "DiscreteMechanismKernel",
    "DatabaseChannel",
    "Witness",
    "BdplResult",
    "grr_kernel",
    "kernel_dp_leakage",
    "exact_adversary_bdpl",
    "exact_bdpl",
    "joint_from_markov",
    "table2_distribution",
    "table2_channel",
    "table2_closed_form",
    "load_oracle_instance",
]

ZERO_MASS = 1e-15
ENUMERATION_BUDGET = 10_000_000


@dataclass(frozen=True, eq=False)
class DiscreteMechanismKernel:
    """Per-record output channel: entry [x, y] is the probability of
    reporting y for a record whose true state is x, applied independently
    to every record."""

    per_record_channel: np.ndarray

    def __post_init__(self):
        Q = np.array(self.per_record_channel, dtype=float)
        Q.setflags(write=False)
        object.__setattr__(self, "per_record_channel", Q)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise ValueError(f"channel must be square, got shape {Q.shape}")
        if Q.min(initial=0.0) < 0:
            raise ValueError("channel has a negative entry")
        if np.abs(Q.sum(axis=1) - 1.0).max(initial=0.0) > 1e-12:
            raise ValueError("channel rows must sum to 1")

    @property
    def num_states(self) -> int:
        return int(self.per_record_channel.shape[0])


@dataclass(frozen=True, eq=False)
class DatabaseChannel:
    """Whole-database output channel: ``prob`` has one leading axis per
    record (state-indexed, like the joint pmf table) and a trailing output
    axis. Used for mechanisms that are not per-record products."""

    prob: np.ndarray

    def __post_init__(self):
        C = np.array(self.prob, dtype=float)
        C.setflags(write=False)
        object.__setattr__(self, "prob", C)
        if C.ndim < 2:
            raise ValueError("need at least one record axis and one output axis")
        if C.min(initial=0.0) < 0:
            raise ValueError("channel has a negative entry")
        if np.abs(C.sum(axis=-1) - 1.0).max() > 1e-12:
            raise ValueError("output distributions must sum to 1 for every database")

    @property
    def n(self) -> int:
        return int(self.prob.ndim - 1)

    @property
    def num_outputs(self) -> int:
        return int(self.prob.shape[-1])


@dataclass(frozen=True)
class Witness:
    """The configuration achieving the leakage supremum: what the
    adversary knows, the two values of the target record being
    distinguished, and the output observed."""

    adversary: AdversarySpec
    known_values: tuple[tuple[int, int], ...]
    target_value: int
    target_alternative: int
    output: tuple[int, ...] | int


@dataclass(frozen=True)
class BdplResult:
    bdpl: float
    witness: Witness

    def re_evaluate(self, distribution: JointDiscreteDistribution, kernel) -> float:
        """Recompute the witness log-ratio from scratch (independent code
        path from the vectorized sweep); must reproduce ``bdpl``."""
        w = self.witness
        ab = distribution.alphabet
        known = {t: ab.index(v) for t, v in w.known_values}
        if isinstance(w.output, tuple):
            output: tuple[int, ...] | int = tuple(ab.index(v) for v in w.output)
        else:
            output = int(w.output)
        num = _output_prob(
            distribution, kernel, known, w.adversary.target, ab.index(w.target_value), output
        )
        den = _output_prob(
            distribution, kernel, known, w.adversary.target, ab.index(w.target_alternative), output
        )
        if den == 0.0:
            return math.inf
        return abs(math.log(num / den))


def grr_kernel(alphabet_size: int, dp_epsilon: float) -> DiscreteMechanismKernel:
    """Randomized-response channel: keep probability e^eps/(e^eps + s - 1),
    remainder spread uniformly. Its DP leakage is exactly eps."""
    s = int(alphabet_size)
    if s < 2:
        raise ValueError(f"alphabet size must be at least 2, got {s}")
    if dp_epsilon <= 0:
        raise ValueError(f"dp_epsilon must be positive, got {dp_epsilon}")
    e = math.exp(dp_epsilon)
    Q = np.full((s, s), 1.0 / (e + s - 1))
    np.fill_diagonal(Q, e / (e + s - 1))
    return DiscreteMechanismKernel(Q)


def kernel_dp_leakage(kernel: DiscreteMechanismKernel) -> float:
    """Worst-case log-ratio of the per-record channel between any two true
    states at any output: the plain DP leakage of the product mechanism."""
    Q = kernel.per_record_channel
    with np.errstate(divide="ignore"):
        L = np.log(Q)
    worst = 0.0
    for y in range(Q.shape[1]):
        col = L[:, y]
        worst = max(worst, float(col.max() - col.min()))
    return worst


def _slice_known(table: np.ndarray, known: dict[int, int]) -> np.ndarray:
    idx: list[object] = [slice(None)] * table.ndim
    for t, v in known.items():
        idx[t] = v
    return table[tuple(idx)]


def _output_prob(
    distribution: JointDiscreteDistribution,
    kernel,
    known: dict[int, int],
    target: int,
    target_value: int,
    output,
) -> float:
    """Pr[Y = output | known records, target record] by direct summation
    over the unknown records. All arguments in index space (positions in
    the alphabet). Deliberately scalar and loop-based."""
    n = distribution.n
    fixed = dict(known)
    fixed[target] = target_value
    unknown = [t for t in range(n) if t not in fixed]
    cond_mass = float(_slice_known(distribution.table, fixed).sum())
    if cond_mass <= 0.0:
        raise ValueError("witness conditions on a zero-mass event")
    total = 0.0
    s = distribution.num_states
    for xu in itertools.product(range(s), repeat=len(unknown)):
        assignment = dict(fixed)
        assignment.update(zip(unknown, xu))
        x = tuple(assignment[t] for t in range(n))
        pi = float(distribution.table[x])
        if pi == 0.0:
            continue
        if isinstance(kernel, DiscreteMechanismKernel):
            Q = kernel.per_record_channel
            lik = 1.0
            for t in range(n):
                lik *= float(Q[x[t], output[t]])
        else:
            lik = float(kernel.prob[x + (int(output),)])
        total += pi * lik
    return total / cond_mass


def _adversary_cost(n: int, s: int, k: int, kernel) -> int:
    pairs = s * (s - 1) // 2
    if isinstance(kernel, DiscreteMechanismKernel):
        u = n - k - 1
        return s**k * pairs * s ** (u + 1)
    return s**k * pairs * kernel.num_outputs


def _adversary_sup(
    distribution: JointDiscreteDistribution,
    kernel,
    adversary: AdversarySpec,
) -> tuple[float, Witness | None]:
    """Max |log ratio| over everything the given adversary can condition
    on and observe; None witness when no realizable comparison exists."""
    table = distribution.table
    n = distribution.n
    s = distribution.num_states
    adversary.check_range(n)
    K = sorted(adversary.known)
    i = adversary.target
    U = [t for t in range(n) if t != i and t not in adversary.known]
    k, u = len(K), len(U)

    # Axes ordered (x_K..., x_i, x_U...).
    T = np.transpose(table, K + [i] + U)
    mass = T.sum(axis=tuple(range(k + 1, k + 1 + u))) if u else T.copy()

    if isinstance(kernel, DiscreteMechanismKernel):
        if kernel.num_states != s:
            raise ValueError("kernel alphabet size does not match the distribution")
        Q = kernel.per_record_channel
        C = T
        for _ in range(u):
            # Contract the first remaining unknown axis with the channel;
            # its output axis lands at the end, preserving order.
            C = np.tensordot(C, Q, axes=([k + 1], [0]))
        qi = Q.reshape((1,) * k + (s,) + (1,) * u + (s,))
        C = C[..., None] * qi  # axes (x_K..., x_i, y_U..., y_i)
        out_axes = u + 1
    else:
        if kernel.n != n:
            raise ValueError("channel record count does not match the distribution")
        Cfull = np.transpose(kernel.prob, K + [i] + U + [n])
        C = (T[..., None] * Cfull).sum(axis=tuple(range(k + 1, k + 1 + u))) if u else T[..., None] * Cfull
        out_axes = 1

    with np.errstate(divide="ignore", invalid="ignore"):
        L = np.log(C) - np.log(mass).reshape(mass.shape + (1,) * out_axes)
    valid = (mass > ZERO_MASS).reshape(mass.shape + (1,) * out_axes)
    enough = valid.sum(axis=k) >= 2  # at least two realizable target values

    hi = np.where(valid, L, -np.inf).max(axis=k)
    lo = np.where(valid, L, np.inf).min(axis=k)
    with np.errstate(invalid="ignore"):
        gap = np.where(enough, hi - lo, -np.inf)
    gap = np.where(np.isnan(gap), -np.inf, gap)  # 0/0 outputs: not realizable

    best = float(gap.max(initial=-np.inf))
    if not np.isfinite(best) and best < 0:
        return -np.inf, None

    flat = int(np.argmax(gap))
    coords = np.unravel_index(flat, gap.shape)
    xK = coords[:k]
    ycoords = coords[k:]
    Lslice = L[xK + (slice(None),) + ycoords]
    vslice = valid[xK + (slice(None),) + (0,) * out_axes]
    xi_hi = int(np.where(vslice, Lslice, -np.inf).argmax())
    xi_lo = int(np.where(vslice, Lslice, np.inf).argmin())

    alphabet = distribution.alphabet
    if isinstance(kernel, DiscreteMechanismKernel):
        y = [0] * n
        Q = kernel.per_record_channel
        for pos, t in enumerate(K):
            # Outputs for known records cancel in the ratio; pick the
            # likeliest one so the witness never has zero probability.
            y[t] = int(np.argmax(Q[coords[pos]]))
        for pos, t in enumerate(U):
            y[t] = int(ycoords[pos])
        y[i] = int(ycoords[u])
        output: tuple[int, ...] | int = tuple(alphabet[v] for v in y)
    else:
        output = int(ycoords[0])

    witness = Witness(
        adversary=adversary,
        known_values=tuple((t, alphabet[coords[pos]]) for pos, t in enumerate(K)),
        target_value=alphabet[xi_hi],
        target_alternative=alphabet[xi_lo],
        output=output,
    )
    return best, witness


def exact_adversary_bdpl(
    distribution: JointDiscreteDistribution,
    kernel,
    adversary: AdversarySpec,
) -> float:
    """Leakage against one adversary. With the full complement known
    (no unknown records) this equals the plain DP leakage of the kernel."""
    cost = _adversary_cost(
        distribution.n, distribution.num_states, len(adversary.known), kernel
    )
    if cost > ENUMERATION_BUDGET:
        raise TooLarge(f"adversary enumeration needs {cost} ratios, cap {ENUMERATION_BUDGET}")
    sup, _ = _adversary_sup(distribution, kernel, adversary)
    return sup


def exact_bdpl(distribution: JointDiscreteDistribution, kernel) -> BdplResult:
    """Supremum over every adversary: all targets i, all known subsets of
    the remaining records, all realizable conditions, both directions of
    the target change, and all outputs.

    The total enumeration budget (number of probability ratios formed) is
    capped; exceeding it raises :class:`TooLarge` before any work starts.
    Conditions with joint mass at or below 1e-15 are excluded from the
    supremum, matching its restriction to realizable conditions.
    """
    n = distribution.n
    s = distribution.num_states
    total = 0
    for i in range(n):
        for k in range(n):
            total += math.comb(n - 1, k) * _adversary_cost(n, s, k, kernel)
    if total > ENUMERATION_BUDGET:
        raise TooLarge(f"full enumeration needs {total} ratios, cap {ENUMERATION_BUDGET}")

    best = -np.inf
    best_witness: Witness | None = None
    for i in range(n):
        others = [t for t in range(n) if t != i]
        for k in range(n):
            for K in itertools.combinations(others, k):
                sup, witness = _adversary_sup(
                    distribution, kernel, AdversarySpec(target=i, known=frozenset(K))
                )
                if sup > best:
                    best = sup
                    best_witness = witness
    if best_witness is None:
        raise ValueError("no realizable adversary comparison in this instance")
    return BdplResult(bdpl=float(best), witness=best_witness)


def joint_from_markov(model: MarkovChainModel) -> JointDiscreteDistribution:
    """Dense joint pmf of the whole chain: w_{x_1} times the product of
    stepwise transition entries. Only for chains short enough to
    enumerate."""
    n = model.chain_length
    if n > 8:
        raise TooLarge(f"chain length {n} exceeds the exact-enumeration cap 8")
    table = model.initial.copy()
    for _ in range(n - 1):
        table = table[..., None] * model.transition
    return JointDiscreteDistribution(alphabet=tuple(range(model.num_states)), table=table)


# ---------------------------------------------------------------------------
# The two-record tightness family and its closed-form leakage.
# ---------------------------------------------------------------------------

def table2_distribution(r: float) -> JointDiscreteDistribution:
    """Two binary records whose joint pmf is, by row (first record) and
    column (second record):

        [[1/r^2,        1/r^3            ],
         [(r-1)/r^2,    (r^3-r^2-1)/r^3  ]]

    As r grows the records become deterministically linked, which is what
    drives the leakage of a mechanism with chained equal output ratios
    toward twice its DP level.
    """
    if r < 2:
        raise ValueError(f"parameter r must be at least 2, got {r}")
    r = float(r)
    table = np.array(
        [
            [1.0 / r**2, 1.0 / r**3],
            [(r - 1.0) / r**2, (r**3 - r**2 - 1.0) / r**3],
        ]
    )
    return JointDiscreteDistribution(alphabet=(0, 1), table=table)


def table2_channel(dp_epsilon: float) -> DatabaseChannel:
    """Binary-output channel over two binary records with
    Pr[Y = 1 | D] = c * e^(eps * d(D)), d(D) the number of records in D
    differing from (1, 1) and c = e^(-eps)/(e^eps + 1).

    The outputs chain through the four databases at exactly the ratio
    e^eps per record changed, and c is the largest constant for which the
    channel is a valid eps-DP mechanism.
    """
    if dp_epsilon <= 0:
        raise ValueError(f"dp_epsilon must be positive, got {dp_epsilon}")
    e = math.exp(dp_epsilon)
    c = math.exp(-dp_epsilon) / (e + 1.0)
    prob = np.empty((2, 2, 2))
    for x1 in (0, 1):
        for x2 in (0, 1):
            d = (1 - x1) + (1 - x2)
            p1 = c * math.exp(dp_epsilon * d)
            prob[x1, x2, 1] = p1
            prob[x1, x2, 0] = 1.0 - p1
    return DatabaseChannel(prob)


def table2_closed_form(r: float, dp_epsilon: float) -> float:
    """Leakage of the chained-ratio channel against the adversary who
    knows nothing and targets the first record, in closed form:

        ln( ((e^{2 eps} r + e^eps)/(r + 1)) /
            ((e^eps (r^2 - r) + r^3 - r^2 - 1)/(r^3 - r - 1)) )

    Increases with r and approaches 2 eps from below.
    """
    if r < 2:
        raise ValueError(f"parameter r must be at least 2, got {r}")
    if dp_epsilon <= 0:
        raise ValueError(f"dp_epsilon must be positive, got {dp_epsilon}")
    e = math.exp(dp_epsilon)
    num = (e * e * r + e) / (r + 1.0)
    den = (e * (r * r - r) + r**3 - r * r - 1.0) / (r**3 - r - 1.0)
    return math.log(num / den)


def load_oracle_instance(path):
    """Read a (distribution, kernel) pair from a structured text file.

    The document is a mapping with ``alphabet`` (list of states), ``pmf``
    (nested lists, one nesting level per record), and exactly one of
    ``kernel`` (per-record channel rows) or ``channel`` (whole-database
    output table, one nesting level per record plus the output axis).
    """
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise ValueError(f"{path} does not contain a mapping")
    try:
        alphabet = tuple(int(a) for a in doc["alphabet"])
        pmf = np.asarray(doc["pmf"], dtype=float)
    except KeyError as exc:
        raise ValueError(f"{path} is missing the {exc.args[0]!r} field") from None
    distribution = JointDiscreteDistribution(alphabet=alphabet, table=pmf)
    if ("kernel" in doc) == ("channel" in doc):
        raise ValueError(f"{path} must define exactly one of 'kernel' or 'channel'")
    if "kernel" in doc:
        return distribution, DiscreteMechanismKernel(np.asarray(doc["kernel"], dtype=float))
    return distribution, DatabaseChannel(np.asarray(doc["channel"], dtype=float))
