"""Core domain types: correlation models, validation reports, intervals,
adversaries, and exact discrete joint distributions.

All types are immutable after construction. Array fields are stored as
read-only float64/int64 numpy arrays so instances can be shared across
concurrent tasks. Validation of the statistical hypotheses behind each
bound is a pure function returning a :class:`ValidationReport`; the
constructors themselves only enforce structural well-formedness (shapes,
finiteness, probability ranges), because several workflows legitimately
build models that violate a hypothesis and then report the violation
(e.g. a transition matrix estimated from a sequence that never changes
state).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np
import yaml

from .errors import IndexOverlap, NonSquare, TooLarge

__all__ = [
    "Interval",
    "Violation",
    "ValidationReport",
    "LimitedGroupModel",
    "GaussianCorrelationModel",
    "MarkovChainModel",
    "CorrelationModel",
    "AdversarySpec",
    "JointDiscreteDistribution",
    "validate_limited_covariance",
    "validate_markov_model",
    "model_to_dict",
    "model_from_dict",
    "save_model",
    "load_model",
]

# Numeric tolerances used by validation. Published matrices in the wild are
# rounded to three decimals, hence the dedicated looser row-sum tolerance.
EIGENVALUE_FLOOR_REL = 1e-10
SYMMETRY_ATOL_REL = 1e-12
ROW_SUM_ATOL = 1e-9
ROW_SUM_ATOL_PUBLISHED = 5e-3
STATIONARITY_ATOL = 1e-9
STATIONARITY_ATOL_PUBLISHED = 5e-3
MASS_ATOL = 1e-12

# Hard tractability caps for exact enumeration.
MAX_ORACLE_RECORDS = 8
MAX_ORACLE_STATES = 4


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Interval:
    """A closed interval [low, high] in data units.

    Used both as a clipping range for numeric records and as the value
    range whose diameter feeds sensitivity computations.
    """

    low: float
    high: float

    def __post_init__(self):
        if not (np.isfinite(self.low) and np.isfinite(self.high)):
            raise ValueError("interval endpoints must be finite")
        if not self.low < self.high:
            raise ValueError(f"interval requires low < high, got [{self.low}, {self.high}]")

    @property
    def diameter(self) -> float:
        return float(self.high - self.low)

    def contains(self, value: float) -> bool:
        return self.low <= value <= self.high


@dataclass(frozen=True)
class Violation:
    """One failed validation condition.

    ``code`` is a stable machine-readable tag; ``message`` carries the
    offending indices and residuals for human consumption.
    """

    code: str
    message: str
    residual: float | None = None


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of validating a model against the hypotheses of a bound."""

    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def codes(self) -> set[str]:
        return {v.code for v in self.violations}

    def describe(self) -> str:
        if self.ok:
            return "valid"
        return "; ".join(v.message for v in self.violations)


def validate_limited_covariance(cov, sigma_sq: float, rho: float) -> ValidationReport:
    """Check that ``cov`` is a shared-variance covariance matrix with all
    pairwise correlations bounded by ``rho``.

    Conditions checked, each reported independently: symmetry, strict
    positive definiteness (smallest eigenvalue above ``1e-10 * sigma_sq``),
    constant diagonal equal to ``sigma_sq``, and ``|cov[i, j]| <=
    rho * sigma_sq`` off the diagonal. An empty violation list means the
    matrix is admissible for the Gaussian leakage bound.

    Raises :class:`NonSquare` for a non-square input; domain errors on the
    scalar parameters raise ``ValueError`` because no meaningful report can
    be produced for them.
    """
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise NonSquare(f"covariance must be square, got shape {cov.shape}")
    if not np.isfinite(sigma_sq) or sigma_sq <= 0:
        raise ValueError(f"sigma_sq must be positive, got {sigma_sq}")
    if not 0 <= rho <= 1:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    if not np.all(np.isfinite(cov)):
        raise ValueError("covariance contains non-finite entries")

    n = cov.shape[0]
    scale = max(1.0, sigma_sq)
    violations: list[Violation] = []

    asym = np.abs(cov - cov.T)
    if asym.max(initial=0.0) > SYMMETRY_ATOL_REL * scale:
        i, j = np.unravel_index(int(np.argmax(asym)), asym.shape)
        violations.append(
            Violation(
                "asymmetry",
                f"entries ({i},{j}) and ({j},{i}) differ by {asym[i, j]:.3e}",
                float(asym[i, j]),
            )
        )

    diag_err = np.abs(np.diag(cov) - sigma_sq)
    for i in np.flatnonzero(diag_err > SYMMETRY_ATOL_REL * scale):
        violations.append(
            Violation(
                "diagonal",
                f"diagonal entry ({i},{i}) = {cov[i, i]!r} deviates from sigma_sq by {diag_err[i]:.3e}",
                float(diag_err[i]),
            )
        )

    limit = rho * sigma_sq
    off = np.abs(cov.copy())
    np.fill_diagonal(off, 0.0)
    for i, j in zip(*np.nonzero(off > limit + SYMMETRY_ATOL_REL * scale)):
        if i < j:
            violations.append(
                Violation(
                    "correlation",
                    f"entry ({i},{j}) = {cov[i, j]!r} exceeds rho*sigma_sq = {limit!r}",
                    float(off[i, j] - limit),
                )
            )

    # Eigenvalue check on the symmetrized matrix so a tiny asymmetry does
    # not turn the PD check into a complex-eigenvalue problem.
    lam_min = float(np.linalg.eigvalsh((cov + cov.T) / 2.0).min()) if n else 0.0
    if n and lam_min <= EIGENVALUE_FLOOR_REL * sigma_sq:
        violations.append(
            Violation(
                "not_positive_definite",
                f"smallest eigenvalue {lam_min:.3e} is not above {EIGENVALUE_FLOOR_REL * sigma_sq:.3e}",
                lam_min,
            )
        )

    return ValidationReport(tuple(violations))


def _check_groups(groups, n: int, m: int) -> tuple[frozenset[int], ...]:
    normalized = tuple(frozenset(int(i) for i in g) for g in groups)
    seen: set[int] = set()
    for g in normalized:
        if not g:
            raise ValueError("empty correlation group")
        if len(g) > m:
            raise ValueError(f"group of size {len(g)} exceeds declared m={m}")
        if seen & g:
            raise ValueError("correlation groups must be disjoint")
        if any(i < 0 or i >= n for i in g):
            raise ValueError("group index out of range")
        seen |= g
    if seen != set(range(n)):
        raise ValueError("groups must partition all record indices")
    return normalized


@dataclass(frozen=True)
class LimitedGroupModel:
    """Correlation model that states only a bound m on the size of any
    correlated group of records, optionally with the groups themselves."""

    n: int
    m: int
    groups: tuple[frozenset[int], ...] | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"record count must be positive, got {self.n}")
        if not 1 <= self.m <= self.n:
            raise ValueError(f"need 1 <= m <= n, got m={self.m}, n={self.n}")
        if self.groups is not None:
            object.__setattr__(self, "groups", _check_groups(self.groups, self.n, self.m))


@dataclass(frozen=True, eq=False)
class GaussianCorrelationModel:
    """Multivariate Gaussian prior with shared variance and bounded
    pairwise correlation.

    Construction runs :func:`validate_limited_covariance` and rejects
    invalid matrices; a model instance is therefore always admissible for
    the Gaussian bound. When ``groups`` is declared, cross-group
    covariance entries must be exactly zero.
    """

    mean: np.ndarray
    covariance: np.ndarray
    sigma_sq: float
    rho: float
    m: int
    groups: tuple[frozenset[int], ...] | None = None

    def __post_init__(self):
        mean = _readonly(np.atleast_1d(self.mean))
        cov = _readonly(self.covariance)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)
        if mean.ndim != 1:
            raise ValueError("mean must be a vector")
        if cov.shape != (mean.size, mean.size):
            raise NonSquare(f"covariance shape {cov.shape} does not match mean length {mean.size}")
        if not np.all(np.isfinite(mean)):
            raise ValueError("mean contains non-finite entries")
        report = validate_limited_covariance(cov, self.sigma_sq, self.rho)
        if not report.ok:
            raise ValueError(f"invalid covariance: {report.describe()}")
        if not 1 <= self.m <= mean.size:
            raise ValueError(f"need 1 <= m <= n, got m={self.m}, n={mean.size}")
        if self.groups is not None:
            groups = _check_groups(self.groups, mean.size, self.m)
            object.__setattr__(self, "groups", groups)
            membership = {}
            for gi, g in enumerate(groups):
                for i in g:
                    membership[i] = gi
            for i in range(mean.size):
                for j in range(i + 1, mean.size):
                    if membership[i] != membership[j] and cov[i, j] != 0.0:
                        raise ValueError(
                            f"cross-group covariance ({i},{j}) = {cov[i, j]!r} must be exactly 0"
                        )

    @property
    def n(self) -> int:
        return int(self.mean.size)

    @classmethod
    def equicorrelated(
        cls,
        size: int,
        sigma_sq: float,
        rho: float,
        mean: float = 0.0,
        m: int | None = None,
    ) -> "GaussianCorrelationModel":
        """The canonical model with every off-diagonal equal to
        ``rho * sigma_sq``; positive definite for any rho < 1."""
        if not 0 <= rho < 1:
            raise ValueError(f"equicorrelated model requires rho in [0, 1), got {rho}")
        cov = np.full((size, size), rho * sigma_sq)
        np.fill_diagonal(cov, sigma_sq)
        return cls(
            mean=np.full(size, float(mean)),
            covariance=cov,
            sigma_sq=float(sigma_sq),
            rho=float(rho),
            m=size if m is None else m,
        )


@dataclass(frozen=True, eq=False)
class MarkovChainModel:
    """Finite time-homogeneous chain over states {0, ..., s-1} of a fixed
    length, given by a transition matrix and an initial distribution.

    The constructor enforces only structure (shapes, entries in [0, 1],
    initial distribution normalized). Whether the strict-positivity and
    stationarity hypotheses of the chain-specific bound hold is reported
    by :func:`validate_markov_model`, because estimated and published
    matrices routinely violate them and must still be representable.
    """

    num_states: int
    transition: np.ndarray
    initial: np.ndarray
    chain_length: int

    def __post_init__(self):
        P = _readonly(self.transition)
        w = _readonly(np.atleast_1d(self.initial))
        object.__setattr__(self, "transition", P)
        object.__setattr__(self, "initial", w)
        s = self.num_states
        if s < 1:
            raise ValueError(f"need at least one state, got {s}")
        if P.shape != (s, s):
            raise NonSquare(f"transition shape {P.shape}, expected ({s}, {s})")
        if w.shape != (s,):
            raise ValueError(f"initial distribution length {w.size}, expected {s}")
        if self.chain_length < 1:
            raise ValueError(f"chain length must be positive, got {self.chain_length}")
        if not (np.all(np.isfinite(P)) and np.all(np.isfinite(w))):
            raise ValueError("chain parameters contain non-finite entries")
        if P.min(initial=0.0) < -1e-12 or P.max(initial=0.0) > 1 + 1e-12:
            raise ValueError("transition entries must lie in [0, 1]")
        if w.min(initial=0.0) < -1e-12:
            raise ValueError("initial distribution entries must be nonnegative")
        if abs(float(w.sum()) - 1.0) > 1e-6:
            raise ValueError(f"initial distribution sums to {w.sum()!r}, expected 1")

    @classmethod
    def create(
        cls,
        transition,
        chain_length: int,
        initial=None,
    ) -> "MarkovChainModel":
        """Build a chain, computing the stationary initial distribution
        when none is supplied (requires strictly positive, row-stochastic
        transitions)."""
        P = np.asarray(transition, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise NonSquare(f"transition must be square, got shape {P.shape}")
        if initial is None:
            from .markov import stationary_distribution

            initial = stationary_distribution(P)
        return cls(
            num_states=P.shape[0],
            transition=P,
            initial=np.asarray(initial, dtype=float),
            chain_length=int(chain_length),
        )

    @classmethod
    def from_published(cls, transition, chain_length: int) -> "MarkovChainModel":
        """Build a chain from a published (decimal-rounded) transition
        matrix whose rows may miss 1 by up to 5e-3.

        The raw entries are kept verbatim in ``transition`` so that ratio
        statistics match the published values. The initial distribution is
        the stationary vector of the repaired matrix in which each row's
        residual is absorbed into its diagonal entry, which preserves the
        published off-diagonal transition rates.
        """
        P = np.asarray(transition, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise NonSquare(f"transition must be square, got shape {P.shape}")
        residual = np.abs(P.sum(axis=1) - 1.0)
        if residual.max(initial=0.0) > ROW_SUM_ATOL_PUBLISHED:
            bad = int(np.argmax(residual))
            raise ValueError(
                f"row {bad} sums to {P[bad].sum()!r}; beyond published-data tolerance "
                f"{ROW_SUM_ATOL_PUBLISHED}"
            )
        repaired = P.copy()
        for i in range(P.shape[0]):
            repaired[i, i] += 1.0 - P[i].sum()
        if np.diag(repaired).min(initial=1.0) <= 0:
            raise ValueError("diagonal repair produced a nonpositive self-transition")
        from .markov import stationary_distribution

        w = stationary_distribution(repaired)
        return cls(
            num_states=P.shape[0],
            transition=P,
            initial=w,
            chain_length=int(chain_length),
        )


CorrelationModel = Union[LimitedGroupModel, GaussianCorrelationModel, MarkovChainModel]


def validate_markov_model(model: MarkovChainModel, published: bool = False) -> ValidationReport:
    """Report violations of the hypotheses behind the chain-specific bound.

    Checks, in order: rows sum to 1 (tolerance 1e-9, or 5e-3 with
    ``published=True`` for decimal-rounded matrices), strictly positive
    transitions, the initial distribution is a probability vector, and the
    initial distribution is stationary in sup-norm under the same
    tolerance pairing. Violations are data, not exceptions.
    """
    P = model.transition
    w = model.initial
    row_tol = ROW_SUM_ATOL_PUBLISHED if published else ROW_SUM_ATOL
    stat_tol = STATIONARITY_ATOL_PUBLISHED if published else STATIONARITY_ATOL
    violations: list[Violation] = []

    row_err = np.abs(P.sum(axis=1) - 1.0)
    for i in np.flatnonzero(row_err > row_tol):
        violations.append(
            Violation(
                "row_sum",
                f"row {i} sums to {P[i].sum()!r} (residual {row_err[i]:.3e})",
                float(row_err[i]),
            )
        )

    for i, j in zip(*np.nonzero(P <= 0)):
        violations.append(
            Violation(
                "h1_zero_transition",
                f"transition ({i},{j}) = {P[i, j]!r} is not strictly positive",
                float(P[i, j]),
            )
        )

    w_sum_err = abs(float(w.sum()) - 1.0)
    if w_sum_err > row_tol:
        violations.append(
            Violation("initial_mass", f"initial distribution sums to {w.sum()!r}", w_sum_err)
        )
    if w.min(initial=0.0) < 0:
        violations.append(
            Violation("initial_negative", "initial distribution has a negative entry", float(w.min()))
        )

    stat_err = float(np.max(np.abs(w @ P - w))) if model.num_states else 0.0
    if stat_err > stat_tol:
        violations.append(
            Violation(
                "h2_not_stationary",
                f"sup-norm stationarity residual {stat_err:.3e} exceeds {stat_tol:.0e}",
                stat_err,
            )
        )

    return ValidationReport(tuple(violations))


@dataclass(frozen=True)
class AdversarySpec:
    """An adversary who knows the records in ``known`` and targets record
    ``target``; the remaining records are unknown and get marginalized."""

    target: int
    known: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "known", frozenset(int(i) for i in self.known))
        if self.target < 0:
            raise ValueError(f"target index must be nonnegative, got {self.target}")
        if any(i < 0 for i in self.known):
            raise ValueError("known indices must be nonnegative")
        if self.target in self.known:
            raise IndexOverlap(f"target index {self.target} also appears in the known set")

    def unknown(self, n: int) -> tuple[int, ...]:
        """Indices neither targeted nor known, for a database of n records."""
        self.check_range(n)
        return tuple(i for i in range(n) if i != self.target and i not in self.known)

    def check_range(self, n: int) -> None:
        if self.target >= n or any(i >= n for i in self.known):
            raise ValueError(f"adversary indices out of range for n={n}")


@dataclass(frozen=True, eq=False)
class JointDiscreteDistribution:
    """Exact joint pmf over tuples of states, stored as a dense array with
    one axis per record.

    Axis t indexes the state of record t through the shared ``alphabet``.
    Sizes are capped (n <= 8 records, at most 4 states) because this type
    exists to be enumerated exhaustively.
    """

    alphabet: tuple[int, ...]
    table: np.ndarray

    def __post_init__(self):
        alphabet = tuple(int(a) for a in self.alphabet)
        object.__setattr__(self, "alphabet", alphabet)
        if len(set(alphabet)) != len(alphabet):
            raise ValueError("alphabet contains duplicate states")
        s = len(alphabet)
        if s < 1:
            raise ValueError("alphabet is empty")
        if s > MAX_ORACLE_STATES:
            raise TooLarge(f"{s} states exceeds the exact-enumeration cap {MAX_ORACLE_STATES}")
        table = _readonly(self.table)
        object.__setattr__(self, "table", table)
        if table.ndim > MAX_ORACLE_RECORDS:
            raise TooLarge(
                f"{table.ndim} records exceeds the exact-enumeration cap {MAX_ORACLE_RECORDS}"
            )
        if table.shape != (s,) * table.ndim:
            raise ValueError(f"pmf shape {table.shape} inconsistent with {s} states")
        if table.min(initial=0.0) < 0:
            raise ValueError("pmf has a negative entry")
        mass_err = abs(float(table.sum()) - 1.0)
        if mass_err > MASS_ATOL:
            raise ValueError(f"pmf mass deviates from 1 by {mass_err:.3e}")

    @property
    def n(self) -> int:
        return int(self.table.ndim)

    @property
    def num_states(self) -> int:
        return len(self.alphabet)

    def prob(self, assignment: Sequence[int]) -> float:
        """Probability of a full database given as a tuple of states."""
        idx = tuple(self.alphabet.index(int(x)) for x in assignment)
        if len(idx) != self.n:
            raise ValueError(f"assignment length {len(idx)}, expected {self.n}")
        return float(self.table[idx])

    @classmethod
    def product(cls, marginals: Iterable[Sequence[float]], alphabet=None) -> "JointDiscreteDistribution":
        """Independent records: the joint pmf is the outer product of the
        per-record marginals (all over the same alphabet)."""
        margs = [np.asarray(m, dtype=float) for m in marginals]
        if not margs:
            raise ValueError("need at least one marginal")
        s = margs[0].size
        table = np.ones(())
        for m in margs:
            if m.size != s:
                raise ValueError("marginals have inconsistent sizes")
            table = np.multiply.outer(table, m)
        if alphabet is None:
            alphabet = tuple(range(s))
        return cls(alphabet=tuple(alphabet), table=table)


# ---------------------------------------------------------------------------
# Serialization: models to/from nested key-value configuration documents.
# ---------------------------------------------------------------------------

def model_to_dict(model: CorrelationModel) -> dict:
    """A plain nested mapping describing the model; matrices row-major."""
    if isinstance(model, LimitedGroupModel):
        out: dict = {"kind": "limited_group", "n": model.n, "m": model.m}
        if model.groups is not None:
            out["groups"] = [sorted(g) for g in model.groups]
        return out
    if isinstance(model, GaussianCorrelationModel):
        out = {
            "kind": "gaussian",
            "mean": [float(x) for x in model.mean],
            "covariance": [[float(x) for x in row] for row in model.covariance],
            "sigma_sq": float(model.sigma_sq),
            "rho": float(model.rho),
            "m": model.m,
        }
        if model.groups is not None:
            out["groups"] = [sorted(g) for g in model.groups]
        return out
    if isinstance(model, MarkovChainModel):
        return {
            "kind": "markov",
            "num_states": model.num_states,
            "transition": [[float(x) for x in row] for row in model.transition],
            "initial": [float(x) for x in model.initial],
            "chain_length": model.chain_length,
        }
    raise TypeError(f"not a correlation model: {type(model).__name__}")


def model_from_dict(doc: Mapping) -> CorrelationModel:
    """Inverse of :func:`model_to_dict`."""
    try:
        kind = doc["kind"]
    except KeyError:
        raise ValueError("model document lacks a 'kind' field") from None
    if kind == "limited_group":
        return LimitedGroupModel(
            n=int(doc["n"]), m=int(doc["m"]), groups=tuple(doc["groups"]) if "groups" in doc else None
        )
    if kind == "gaussian":
        return GaussianCorrelationModel(
            mean=np.asarray(doc["mean"], dtype=float),
            covariance=np.asarray(doc["covariance"], dtype=float),
            sigma_sq=float(doc["sigma_sq"]),
            rho=float(doc["rho"]),
            m=int(doc["m"]),
            groups=tuple(doc["groups"]) if "groups" in doc else None,
        )
    if kind == "markov":
        return MarkovChainModel(
            num_states=int(doc["num_states"]),
            transition=np.asarray(doc["transition"], dtype=float),
            initial=np.asarray(doc["initial"], dtype=float),
            chain_length=int(doc["chain_length"]),
        )
    raise ValueError(f"unknown model kind: {kind!r}")


def save_model(model: CorrelationModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(model_to_dict(model), fh, sort_keys=False)


def load_model(path) -> CorrelationModel:
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, Mapping):
        raise ValueError(f"model file {path} does not contain a mapping")
    return model_from_dict(doc)
