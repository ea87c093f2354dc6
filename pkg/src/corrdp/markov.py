"""Exact probability computations for finite Markov chains.

Everything here is exact up to floating point: stationary distributions
come from a null-space solve with a residual guarantee, and conditional
pmfs are computed by dynamic programming over the chain factorization
rather than Monte Carlo. The full-joint enumeration alternative lives in
the test oracles, not here, so chains of length ~10^3 stay tractable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import IndexOverlap, NotIrreducible, UnseenState, ZeroTransition
from .models import MarkovChainModel
from .seeding import generator

__all__ = [
    "GammaRatio",
    "gamma",
    "stationary_distribution",
    "conditional_pmf",
    "sample_chain",
    "estimate_transition",
]

STATIONARY_RESIDUAL = 1e-12


@dataclass(frozen=True)
class GammaRatio:
    """Largest-to-smallest transition probability ratio of a chain,
    together with the witnessing entries."""

    gamma: float
    max_entry: float
    min_entry: float
    arg_max: tuple[int, int]
    arg_min: tuple[int, int]


def gamma(model: MarkovChainModel) -> GammaRatio:
    """Ratio max P[x,y] / min P[x,y] over all transition entries.

    Raises :class:`ZeroTransition` when some entry is not strictly
    positive, since the ratio is then unbounded and the chain bound that
    consumes it does not apply.
    """
    P = model.transition
    if P.min() <= 0.0:
        i, j = np.unravel_index(int(np.argmin(P)), P.shape)
        raise ZeroTransition(
            f"transition ({i},{j}) = {P[i, j]!r}; the ratio requires strictly positive entries"
        )
    imax = np.unravel_index(int(np.argmax(P)), P.shape)
    imin = np.unravel_index(int(np.argmin(P)), P.shape)
    hi = float(P[imax])
    lo = float(P[imin])
    return GammaRatio(
        gamma=hi / lo,
        max_entry=hi,
        min_entry=lo,
        arg_max=(int(imax[0]), int(imax[1])),
        arg_min=(int(imin[0]), int(imin[1])),
    )


def _solve_stationary(P: np.ndarray, require_positive: bool) -> np.ndarray:
    """Null space of (P^T - I) normalized to a probability vector.

    With ``require_positive`` the matrix must be entrywise positive, which
    guarantees a unique solution. Without it (estimation use) a unique
    null direction is still demanded; ties raise :class:`NotIrreducible`.
    """
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ValueError(f"transition must be square, got shape {P.shape}")
    s = P.shape[0]
    row_err = np.abs(P.sum(axis=1) - 1.0)
    if row_err.max(initial=0.0) > 1e-9:
        bad = int(np.argmax(row_err))
        raise ValueError(f"row {bad} sums to {P[bad].sum()!r}; not a stochastic matrix")
    if require_positive and P.min() <= 0.0:
        raise NotIrreducible(
            "transition matrix has a zero entry; uniqueness of the stationary "
            "distribution is not guaranteed"
        )
    if s == 1:
        return np.ones(1)

    # Smallest singular vectors of (P^T - I); the null space holds w.
    A = P.T - np.eye(s)
    _, sing, vt = np.linalg.svd(A)
    if s > 1 and sing[-2] < 1e-10:
        raise NotIrreducible("stationary distribution is not unique (reducible chain)")
    w = vt[-1]
    total = w.sum()
    if abs(total) < 1e-12:
        raise NotIrreducible("null-space vector has zero mass; chain is degenerate")
    w = w / total
    if w.min() < -1e-12:
        raise NotIrreducible("stationary solve produced negative mass")
    w = np.clip(w, 0.0, None)
    w /= w.sum()

    # Polish by power iteration until the documented residual holds.
    for _ in range(maxit := 200):
        residual = float(np.max(np.abs(w @ P - w)))
        if residual <= STATIONARY_RESIDUAL:
            break
        w = w @ P
        w /= w.sum()
    else:
        raise NotIrreducible(
            f"power iteration failed to reach residual {STATIONARY_RESIDUAL} in {maxit} steps"
        )
    return w


def stationary_distribution(transition) -> np.ndarray:
    """The unique probability vector w with w P = w, for an entrywise
    positive stochastic matrix.

    The result satisfies ``max |wP - w| <= 1e-12`` and every entry lies in
    [min P, max P].
    """
    return _solve_stationary(np.asarray(transition, dtype=float), require_positive=True)


def _ordered_anchor_plan(
    n: int, unknown: Sequence[int], known_values: Mapping[int, int]
) -> tuple[list[int], dict[int, int]]:
    unknown = [int(i) for i in unknown]
    known = {int(i): int(v) for i, v in known_values.items()}
    overlap = set(unknown) & set(known)
    if overlap:
        raise IndexOverlap(f"indices {sorted(overlap)} appear both as unknown and known")
    if len(set(unknown)) != len(unknown):
        raise IndexOverlap("duplicate unknown indices")
    anchors = sorted(set(unknown) | set(known))
    if not anchors:
        raise ValueError("no indices supplied")
    if anchors[0] < 0 or anchors[-1] >= n:
        raise ValueError(f"indices out of range for a chain of length {n}")
    return anchors, known


def conditional_pmf(
    model: MarkovChainModel,
    unknown: Sequence[int],
    known_values: Mapping[int, int],
) -> np.ndarray:
    """Exact Pr[X_unknown = . | X_known = known_values] for a chain.

    Returns an array with one axis per unknown index, axes ordered by
    ascending position in the chain; entry [a, b, ...] is the joint
    conditional probability that the first unknown position (in chain
    order) is in state a, the second in state b, and so on. The array
    sums to 1 within 1e-12.

    The computation walks the sorted anchor positions (unknown and known
    together) once, carrying a tensor whose trailing axis is the state at
    the current position and whose leading axes record the states of the
    unknown anchors already passed. Gaps between anchors contribute powers
    of the transition matrix, memoized by exponent; positions after the
    last anchor marginalize to 1 and are skipped. Cost is
    O(#anchors * s^(u+2)) plus the matrix powers, so thousand-step chains
    are fine.
    """
    P = model.transition
    w = model.initial
    s = model.num_states
    anchors, known = _ordered_anchor_plan(model.chain_length, unknown, known_values)
    for i, v in known.items():
        if not 0 <= v < s:
            raise ValueError(f"known state {v} at index {i} is outside 0..{s - 1}")

    powers: dict[int, np.ndarray] = {1: P}

    def matpow(k: int) -> np.ndarray:
        if k not in powers:
            if k % 2 == 0:
                half = matpow(k // 2)
                powers[k] = half @ half
            else:
                powers[k] = matpow(k - 1) @ P
        return powers[k]

    eye = np.eye(s)
    # Invariant: carry[a_1, ..., a_f, y] = Pr[passed unknown anchors in
    # states a_1..a_f, passed known anchors at their fixed values, and the
    # chain is in state y at the anchor just processed].
    carry = w.copy()
    prev = 0
    for a in anchors:
        if a > prev:
            carry = carry @ matpow(a - prev)
        if a in known:
            mask = np.zeros(s)
            mask[known[a]] = 1.0
            carry = carry * mask
        else:
            # The anchor state becomes a new recorded axis; it coincides
            # with the current position, hence the identity factor.
            carry = carry[..., None, :] * eye
        prev = a

    joint = carry.sum(axis=-1)
    total = float(joint.sum())
    if total <= 0.0:
        raise ValueError("conditioning event has zero probability under the chain")
    out = joint / total
    return out.reshape((s,) * len(set(int(i) for i in unknown)))


def sample_chain(model: MarkovChainModel, seed: int) -> np.ndarray:
    """One trajectory of length ``model.chain_length``, deterministic per
    seed, sampled by inverse CDF from per-step uniforms."""
    rng = generator(seed)
    n = model.chain_length
    u = rng.random(n)
    states = np.empty(n, dtype=np.int64)
    init_cdf = np.cumsum(model.initial)
    trans_cdf = np.cumsum(model.transition, axis=1)
    states[0] = np.searchsorted(init_cdf, u[0], side="right")
    states[0] = min(states[0], model.num_states - 1)
    for t in range(1, n):
        row = trans_cdf[states[t - 1]]
        nxt = np.searchsorted(row, u[t], side="right")
        states[t] = min(nxt, model.num_states - 1)
    return states


def estimate_transition(sequence, num_states: int) -> MarkovChainModel:
    """Maximum-likelihood transition matrix from an observed sequence.

    Counts are not smoothed: a transition that never occurs stays zero and
    shows up as a strict-positivity violation in validation, rather than
    being papered over. A state that never occurs as a source leaves its
    row undefined, which raises :class:`UnseenState`.
    """
    seq = np.asarray(sequence, dtype=np.int64)
    if seq.ndim != 1 or seq.size < 2:
        raise ValueError("need a 1-d sequence with at least two observations")
    if num_states < 1:
        raise ValueError(f"num_states must be positive, got {num_states}")
    if seq.min() < 0 or seq.max() >= num_states:
        raise ValueError(
            f"sequence contains states outside 0..{num_states - 1}: "
            f"range [{seq.min()}, {seq.max()}]"
        )
    counts = np.zeros((num_states, num_states))
    np.add.at(counts, (seq[:-1], seq[1:]), 1.0)
    row_totals = counts.sum(axis=1)
    missing = np.flatnonzero(row_totals == 0)
    if missing.size:
        raise UnseenState(
            f"states {missing.tolist()} never occur as a transition source; "
            "their rows cannot be estimated"
        )
    P = counts / row_totals[:, None]
    w = _solve_stationary(P, require_positive=False)
    return MarkovChainModel(
        num_states=num_states,
        transition=P,
        initial=w,
        chain_length=int(seq.size),
    )
