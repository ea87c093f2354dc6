"""Linear algebra for the Gaussian correlation model: conditioning,
eigenvalue floors, correlation estimation, and correlated sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg, stats

from .errors import DegenerateVariance, SingularConditioning
from .models import GaussianCorrelationModel
from .seeding import generator

__all__ = [
    "ConditionalGaussian",
    "conditional_gaussian",
    "gershgorin_floor",
    "estimate_max_pearson",
    "sample_gaussian_database",
]

SINGULARITY_FLOOR_REL = 1e-12


@dataclass(frozen=True, eq=False)
class ConditionalGaussian:
    """Distribution of the unconditioned coordinates of a joint Gaussian
    after fixing the coordinates in the conditioning set.

    ``mean_shift_matrix`` maps a change in the conditioning values to the
    induced change of the conditional mean; it is the reason a shifted
    query point under one condition has exactly the density of the
    unshifted point under another.
    """

    unknown_indices: tuple[int, ...]
    condition_indices: tuple[int, ...]
    mean_shift_matrix: np.ndarray
    cond_mean: np.ndarray
    cond_cov: np.ndarray

    def __post_init__(self):
        for name in ("mean_shift_matrix", "cond_mean", "cond_cov"):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        u = len(self.unknown_indices)
        k = len(self.condition_indices)
        if self.mean_shift_matrix.shape != (u, k):
            raise ValueError(
                f"shift matrix shape {self.mean_shift_matrix.shape}, expected ({u}, {k})"
            )
        if self.cond_mean.shape != (u,):
            raise ValueError(f"conditional mean length {self.cond_mean.size}, expected {u}")
        if self.cond_cov.shape != (u, u):
            raise ValueError(f"conditional covariance shape {self.cond_cov.shape}")
        if u:
            asym = float(np.abs(self.cond_cov - self.cond_cov.T).max())
            lam_min = float(np.linalg.eigvalsh(self.cond_cov).min())
            scale = max(1.0, float(np.abs(self.cond_cov).max()))
            if asym > 1e-9 * scale or lam_min < -1e-9 * scale:
                raise ValueError(
                    f"conditional covariance not PSD-symmetric (asym {asym:.2e}, "
                    f"min eigenvalue {lam_min:.2e})"
                )

    def log_density(self, x_unknown) -> float:
        """Log density of the conditional law at a point (singular
        covariances evaluated on their support)."""
        return float(
            stats.multivariate_normal.logpdf(
                np.asarray(x_unknown, dtype=float),
                mean=self.cond_mean,
                cov=self.cond_cov,
                allow_singular=True,
            )
        )


def conditional_gaussian(
    model: GaussianCorrelationModel,
    condition_indices,
    condition_values,
) -> ConditionalGaussian:
    """Condition the model's joint Gaussian on exact values for a subset
    of records.

    Returns the conditional distribution of the remaining records:
    mean = mu_U + S (x_T - mu_T) and covariance = Sigma_U - S Sigma_TU,
    where S is the cross-covariance times the inverse conditioning block,
    computed via a symmetric PD factorization (never an explicit inverse).

    Raises :class:`SingularConditioning` when the conditioning block has
    an eigenvalue at or below 1e-12 relative to the shared variance.
    """
    T = tuple(sorted(int(i) for i in condition_indices))
    x_T = np.atleast_1d(np.asarray(condition_values, dtype=float))
    if len(set(T)) != len(T):
        raise ValueError("duplicate condition indices")
    if x_T.shape != (len(T),):
        raise ValueError(f"{len(T)} condition indices but {x_T.size} values")
    n = model.n
    if T and (T[0] < 0 or T[-1] >= n):
        raise ValueError(f"condition indices out of range for n={n}")
    if not T:
        raise ValueError("empty conditioning set")

    U = tuple(i for i in range(n) if i not in set(T))
    cov = model.covariance
    mu = model.mean
    sig_T = cov[np.ix_(T, T)]
    sig_UT = cov[np.ix_(U, T)]
    sig_U = cov[np.ix_(U, U)]

    eigs = np.linalg.eigvalsh(sig_T)
    if float(np.abs(eigs).min()) <= SINGULARITY_FLOOR_REL * model.sigma_sq:
        raise SingularConditioning(
            f"conditioning block has eigenvalue {eigs[np.argmin(np.abs(eigs))]:.3e}, "
            f"within {SINGULARITY_FLOOR_REL} of singular relative to sigma_sq"
        )

    factor = linalg.cho_factor(sig_T, lower=True)
    # shift = Sigma_{U,T} Sigma_T^{-1}, solved column-block-wise.
    shift = linalg.cho_solve(factor, sig_UT.T).T
    cond_mean = mu[list(U)] + shift @ (x_T - mu[list(T)]) if U else np.zeros(0)
    cond_cov = sig_U - shift @ sig_UT.T
    cond_cov = (cond_cov + cond_cov.T) / 2.0

    return ConditionalGaussian(
        unknown_indices=U,
        condition_indices=T,
        mean_shift_matrix=shift if U else shift.reshape(0, len(T)),
        cond_mean=cond_mean,
        cond_cov=cond_cov if U else cond_cov.reshape(0, 0),
    )


def gershgorin_floor(model: GaussianCorrelationModel, k: int) -> float:
    """Lower bound (1 - k rho) sigma^2 on the smallest eigenvalue of any
    (k+1) x (k+1) principal submatrix of an admissible covariance.

    Follows from disc bounds: each row has diagonal sigma^2 and at most k
    off-diagonal entries of magnitude at most rho sigma^2. May be
    nonpositive, in which case it carries no information but is still the
    stated value.
    """
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    return float((1.0 - k * model.rho) * model.sigma_sq)


def estimate_max_pearson(data) -> float:
    """Largest absolute pairwise sample Pearson correlation among the
    members of a correlation group.

    ``data`` has one row per complete group and one column per group
    member (e.g. rows are families, columns are family roles). Requires at
    least two complete groups and two members. A constant column makes the
    coefficient undefined and raises :class:`DegenerateVariance`.
    """
    X = np.asarray(data, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-d group matrix, got shape {X.shape}")
    n_groups, width = X.shape
    if n_groups < 2:
        raise ValueError(f"need at least 2 complete groups, got {n_groups}")
    if width < 2:
        raise ValueError("need at least 2 group members to form a pair")
    variances = X.var(axis=0, ddof=1)
    dead = np.flatnonzero(variances == 0.0)
    if dead.size:
        raise DegenerateVariance(f"columns {dead.tolist()} have zero sample variance")
    corr = np.abs(np.corrcoef(X, rowvar=False))
    np.fill_diagonal(corr, 0.0)
    return float(corr.max())


def sample_gaussian_database(model: GaussianCorrelationModel, seed: int) -> np.ndarray:
    """One database draw from the model's joint Gaussian, deterministic
    per seed.

    Uses the lower Cholesky factor of the covariance applied to standard
    normals from the counter-based generator, so the same seed yields the
    same record values on every platform.
    """
    rng = generator(seed)
    z = rng.standard_normal(model.n)
    L = np.linalg.cholesky(model.covariance)
    return model.mean + L @ z
