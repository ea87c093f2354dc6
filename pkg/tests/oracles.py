"""Reference implementations the test suite trusts.

Everything in this file recomputes expected values from first principles:
direct enumeration over small state spaces, closed forms, and textbook
formulas, written without looking at the package internals. Tests compare
the package's fast routes against these slow ones, so a shared bug would
have to be written twice independently to slip through.
"""

import itertools
import math

import numpy as np
from scipy.stats import multivariate_normal

# ---------------------------------------------------------------------------
# Markov chains
# ---------------------------------------------------------------------------


def brute_joint_markov(initial, transition, n):
    """Full joint pmf of an n-step chain as an (s,)*n array, by walking
    every path."""
    w = np.asarray(initial, dtype=float)
    P = np.asarray(transition, dtype=float)
    s = w.size
    joint = np.zeros((s,) * n)
    for path in itertools.product(range(s), repeat=n):
        p = w[path[0]]
        for a, b in zip(path, path[1:]):
            p *= P[a, b]
        joint[path] = p
    return joint


def brute_conditional(joint, unknown, known_values):
    """Pr[X_unknown | X_known = values] by slicing the full joint and
    summing out everything else. Axes of the result follow sorted(unknown)."""
    n = joint.ndim
    unknown = sorted(int(i) for i in unknown)
    index = [slice(None)] * n
    for idx, val in known_values.items():
        index[int(idx)] = int(val)
    sub = joint[tuple(index)]
    remaining = [i for i in range(n) if i not in known_values]
    drop = tuple(ax for ax, i in enumerate(remaining) if i not in unknown)
    marg = sub.sum(axis=drop) if drop else sub
    total = marg.sum()
    if total <= 0:
        raise ZeroDivisionError("conditioning event has zero probability")
    return marg / total


def stationary_two_state(a, b):
    """Stationary vector of [[1-a, a], [b, 1-b]], closed form."""
    return np.array([b, a]) / (a + b)


def power_column_ratio(P, k):
    """Largest within-column max/min ratio of P^k."""
    Q = np.linalg.matrix_power(np.asarray(P, dtype=float), k)
    return float((Q.max(axis=0) / Q.min(axis=0)).max())


# ---------------------------------------------------------------------------
# Leakage oracles
# ---------------------------------------------------------------------------

# Conditioning events with mass at or below this are not usable adversary
# knowledge (matches the convention of skipping zero-probability priors).
_MASS_FLOOR = 1e-15


def product_channel(kernel, n):
    """Database-level channel of a per-record kernel: shape (s,)*n + (s**n,),
    output index = little-endian digits of the per-record outputs."""
    K = np.asarray(kernel, dtype=float)
    s = K.shape[0]
    ch = np.zeros((s,) * n + (s**n,))
    for x in itertools.product(range(s), repeat=n):
        for yi, y in enumerate(itertools.product(range(s), repeat=n)):
            p = 1.0
            for j in range(n):
                p *= K[x[j], y[j]]
            ch[x + (yi,)] = p
    return ch


def marginal_output_prob(table, channel, fixed, output):
    """Pr[Y = output | X_fixed], marginalizing unfixed records under the
    prior. Returns None when the conditioning event has ~zero mass."""
    n = table.ndim
    index = [slice(None)] * n
    for idx, val in fixed.items():
        index[int(idx)] = int(val)
    sub_t = table[tuple(index)]
    sub_c = channel[tuple(index) + (int(output),)]
    mass = float(np.sum(sub_t))
    if mass <= _MASS_FLOOR:
        return None
    return float(np.sum(sub_t * sub_c)) / mass


def brute_bdpl(table, channel):
    """Supremum leakage over every adversary (known set + values, target
    record, target value pair) and every single output. Slow and literal."""
    table = np.asarray(table, dtype=float)
    channel = np.asarray(channel, dtype=float)
    n = table.ndim
    s = table.shape[0]
    num_outputs = channel.shape[-1]
    best = -math.inf
    for i in range(n):
        others = [j for j in range(n) if j != i]
        for ksz in range(len(others) + 1):
            for K in itertools.combinations(others, ksz):
                for kv in itertools.product(range(s), repeat=ksz):
                    base = dict(zip(K, kv))
                    probs = {}
                    for a in range(s):
                        probs[a] = [
                            marginal_output_prob(table, channel, {**base, i: a}, y)
                            for y in range(num_outputs)
                        ]
                    for a in range(s):
                        if probs[a][0] is None:
                            continue
                        for b in range(s):
                            if a == b or probs[b][0] is None:
                                continue
                            for y in range(num_outputs):
                                pa, pb = probs[a][y], probs[b][y]
                                if pa <= 0.0:
                                    continue
                                if pb <= 0.0:
                                    return math.inf
                                best = max(best, math.log(pa / pb))
    return best


def brute_bdpl_sets(table, channel):
    """Like brute_bdpl but the sup also ranges over every non-empty proper
    SET of outputs. Exponential in the output count; keep instances tiny."""
    table = np.asarray(table, dtype=float)
    channel = np.asarray(channel, dtype=float)
    n = table.ndim
    s = table.shape[0]
    num_outputs = channel.shape[-1]
    if num_outputs > 12:
        raise ValueError("set-version oracle limited to 12 outputs")
    subsets = [
        [y for y in range(num_outputs) if mask >> y & 1]
        for mask in range(1, 2**num_outputs - 1)
    ]
    best = -math.inf
    for i in range(n):
        others = [j for j in range(n) if j != i]
        for ksz in range(len(others) + 1):
            for K in itertools.combinations(others, ksz):
                for kv in itertools.product(range(s), repeat=ksz):
                    base = dict(zip(K, kv))
                    rows = {}
                    for a in range(s):
                        row = [
                            marginal_output_prob(table, channel, {**base, i: a}, y)
                            for y in range(num_outputs)
                        ]
                        rows[a] = None if row[0] is None else np.array(row)
                    for a in range(s):
                        if rows[a] is None:
                            continue
                        for b in range(s):
                            if a == b or rows[b] is None:
                                continue
                            for ys in subsets:
                                pa = float(rows[a][ys].sum())
                                pb = float(rows[b][ys].sum())
                                if pa <= 0.0:
                                    continue
                                if pb <= 0.0:
                                    return math.inf
                                best = max(best, math.log(pa / pb))
    return best


def table2_pmf(r):
    """The two-record pmf family parameterized by r."""
    return np.array(
        [
            [1.0 / r**2, 1.0 / r**3],
            [(r - 1.0) / r**2, (r**3 - r**2 - 1.0) / r**3],
        ]
    )


def table2_channel_ref(eps):
    """Binary-output channel with equal e^eps steps between the four
    databases, anchored so that (1,1) has the largest acceptance odds."""
    c = math.exp(-eps) / (math.exp(eps) + 1.0)
    ch = np.zeros((2, 2, 2))
    for x1 in range(2):
        for x2 in range(2):
            d = (1 - x1) + (1 - x2)
            p1 = c * math.exp(eps * d)
            ch[x1, x2, 0] = 1.0 - p1
            ch[x1, x2, 1] = p1
    return ch


def table2_first_record_closed(r, eps):
    """Closed-form leakage of the no-knowledge adversary against the first
    record of the table2 family."""
    e = math.exp(eps)
    num = (e * e * r + e) / (r + 1.0)
    den = (e * (r**2 - r) + r**3 - r**2 - 1.0) / (r**3 - r - 1.0)
    return math.log(num / den)


# ---------------------------------------------------------------------------
# Randomized response
# ---------------------------------------------------------------------------


def _log_binom_pmf(k, n, p):
    if p <= 0.0:
        return 0.0 if k == 0 else -math.inf
    if p >= 1.0:
        return 0.0 if k == n else -math.inf
    return (
        math.lgamma(n + 1)
        - math.lgamma(k + 1)
        - math.lgamma(n - k + 1)
        + k * math.log(p)
        + (n - k) * math.log1p(-p)
    )


def rr_beta_exhaustive(n, n1, q, alpha):
    """P[|debiased count - n1| >= alpha] when each of n bits (n1 ones) is
    flipped independently with probability q, by summing over every
    (ones flipped, zeros flipped) pair."""
    total = 0.0
    for f1 in range(n1 + 1):
        lp1 = _log_binom_pmf(f1, n1, q)
        for f0 in range(n - n1 + 1):
            y = (n1 - f1) + f0
            est = (y - n * q) / (1.0 - 2.0 * q)
            if abs(est - n1) >= alpha:
                total += math.exp(lp1 + _log_binom_pmf(f0, n - n1, q))
    return min(total, 1.0)


def laplace_abs_quantile(beta, scale):
    """(1 - beta) quantile of |Laplace(scale)|."""
    return scale * math.log(1.0 / beta)


# ---------------------------------------------------------------------------
# Gaussian conditioning
# ---------------------------------------------------------------------------


def conditional_logpdf_via_joint(mean, cov, unknown, known, x_unknown, x_known):
    """log p(x_unknown | x_known) as log joint - log marginal, never
    forming a conditional distribution explicitly."""
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    unknown = list(unknown)
    known = list(known)
    x = np.empty(mean.size)
    x[unknown] = x_unknown
    x[known] = x_known
    order = unknown + known
    full = multivariate_normal(mean=mean[order], cov=cov[np.ix_(order, order)])
    marg = multivariate_normal(mean=mean[known], cov=cov[np.ix_(known, known)])
    return full.logpdf(np.concatenate([np.asarray(x_unknown), np.asarray(x_known)])) - marg.logpdf(
        np.asarray(x_known)
    )


def random_limited_covariance(rng, n, sigma_sq):
    """A random positive-definite matrix with constant diagonal sigma_sq,
    returned together with the smallest rho that certifies it."""
    A = rng.standard_normal((n, n + 3))
    S = A @ A.T
    d = np.sqrt(np.diag(S))
    corr = S / np.outer(d, d)
    cov = corr * sigma_sq
    off = np.abs(corr - np.eye(n))
    rho = float(off.max())
    return cov, min(rho + 1e-12, 0.999999)
