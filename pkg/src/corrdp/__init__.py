"""Privacy calibration for correlated data.

Standard differential privacy understates what an informed adversary
learns when records are correlated. This package bounds that extra
leakage under three correlation models (bounded group size, Gaussian with
bounded pairwise correlation, stationary Markov chains), inverts the
bounds to calibrate noise, predicts the accuracy cost, and verifies all
of it against exact brute-force leakage on small discrete instances.
"""

from .accuracy import (
    AccuracyMethod,
    AccuracyReport,
    bdp_alpha,
    laplace_alpha,
    rr_accuracy_beta,
    rr_alpha_for_beta,
)
from .bounds import (
    BoundKind,
    CalibrationResult,
    calibrate,
    free_lunch_alpha_floor,
    gaussian_bound,
    gaussian_h,
    gaussian_improvement_threshold,
    general_bound,
    markov_bound,
    markov_vs_general_threshold,
)
from .data import (
    BinaryStateSeries,
    GroupedNumericDataset,
    generate_synthetic_iq,
    load_grouped_csv,
    load_state_series,
    split_by_day,
    threshold_series,
)
from .errors import (
    CorrdpError,
    DegenerateVariance,
    DomainError,
    IndexOverlap,
    InfeasibleCorrelation,
    InfeasibleTarget,
    MissingColumn,
    NoSolution,
    NonSquare,
    NotIrreducible,
    ParseError,
    SingularConditioning,
    TooLarge,
    UnseenState,
    ZeroTransition,
)
from .gaussian import (
    ConditionalGaussian,
    conditional_gaussian,
    estimate_max_pearson,
    gershgorin_floor,
    sample_gaussian_database,
)
from .harness import (
    ExperimentConfig,
    ExperimentResultRow,
    default_epsilon_grid,
    emit_results,
    run_experiment,
)
from .markov import (
    GammaRatio,
    conditional_pmf,
    estimate_transition,
    gamma,
    sample_chain,
    stationary_distribution,
)
from .mechanisms import (
    MechanismKind,
    MechanismSpec,
    QueryKind,
    QuerySpec,
    clip_database,
    evaluate_query,
    grr_perturb,
    laplace_mechanism,
    privatize,
    rr_bdp_flip_probability,
)
from .models import (
    AdversarySpec,
    GaussianCorrelationModel,
    Interval,
    JointDiscreteDistribution,
    LimitedGroupModel,
    MarkovChainModel,
    ValidationReport,
    Violation,
    load_model,
    save_model,
    validate_limited_covariance,
    validate_markov_model,
)
from .oracle import (
    BdplResult,
    DatabaseChannel,
    DiscreteMechanismKernel,
    Witness,
    exact_adversary_bdpl,
    exact_bdpl,
    grr_kernel,
    joint_from_markov,
    kernel_dp_leakage,
    load_oracle_instance,
    table2_channel,
    table2_closed_form,
    table2_distribution,
)
from .seeding import derive_key, generator

__version__ = "0.1.0"
