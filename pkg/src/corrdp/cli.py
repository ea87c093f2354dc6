"""Command-line interface.

Subcommands:
  calibrate  invert a bound: leakage target -> DP parameter
  bound      evaluate a bound: DP parameter -> leakage
  oracle     exact leakage of a small discrete instance
  estimate   correlation / transition-matrix estimation from files
  run        experiment sweep from a config file
  synth      generate synthetic datasets

Exit codes: 0 success, 2 bad configuration or input, 3 when the requested
target is infeasible (calibrate) or every result row is infeasible (run).
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys

import numpy as np

from . import data as datasets
from .bounds import (
    calibrate,
    gaussian_bound,
    gaussian_improvement_threshold,
    general_bound,
    markov_bound,
)
from .errors import CorrdpError
from .gaussian import estimate_max_pearson
from .harness import (
    _NAMED_TRANSITIONS,
    ExperimentResultRow,
    config_from_file,
    emit_results,
    run_experiment,
)
from .markov import estimate_transition, gamma as chain_gamma, sample_chain
from .models import (
    AdversarySpec,
    GaussianCorrelationModel,
    Interval,
    LimitedGroupModel,
    MarkovChainModel,
    validate_markov_model,
)
from .oracle import (
    exact_adversary_bdpl,
    exact_bdpl,
    load_oracle_instance,
    table2_channel,
    table2_closed_form,
    table2_distribution,
)

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3


def _print_calibration(result) -> None:
    print(f"bound: {result.bound.value}")
    print(f"target_epsilon: {result.target_epsilon:.4f}")
    print(f"dp_tau: {result.dp_tau:.4f}")
    h = "inf" if math.isinf(result.h_factor) else f"{result.h_factor:.4f}"
    print(f"h_factor: {h}")
    print(f"feasible: {str(result.feasible).lower()}")
    if result.bound.value == "markov":
        print(f"floor_epsilon: {result.floor_epsilon:.4f}")


def _cmd_calibrate(args) -> int:
    if args.bound == "general":
        model = LimitedGroupModel(n=max(args.m, 1), m=args.m)
        result = calibrate(args.epsilon, model)
    elif args.bound == "gaussian":
        model = GaussianCorrelationModel.equicorrelated(
            size=max(args.m, 2), sigma_sq=1.0, rho=args.rho, m=args.m
        )
        result = calibrate(args.epsilon, model, clip_diameter=args.diameter)
    else:
        if args.gamma is None:
            raise ValueError("calibrate markov needs --gamma")
        if args.epsilon <= 0:
            raise ValueError(f"target leakage must be positive, got {args.epsilon}")
        if args.gamma < 1:
            raise ValueError(f"gamma must be at least 1, got {args.gamma}")
        offset = 4.0 * math.log(args.gamma)
        tau = args.epsilon - offset
        if tau <= 0:
            print("bound: markov")
            print(f"target_epsilon: {args.epsilon:.4f}")
            print("dp_tau: 0.0000")
            print("h_factor: inf")
            print("feasible: false")
            print(f"floor_epsilon: {offset:.4f}")
            return EXIT_INFEASIBLE
        print("bound: markov")
        print(f"target_epsilon: {args.epsilon:.4f}")
        print(f"dp_tau: {tau:.4f}")
        print(f"h_factor: {args.epsilon / tau:.4f}")
        print("feasible: true")
        print(f"floor_epsilon: {offset:.4f}")
        return EXIT_OK
    _print_calibration(result)
    return EXIT_OK if result.feasible else EXIT_INFEASIBLE


def _cmd_bound(args) -> int:
    if args.bound == "compare-gaussian":
        return _compare_gaussian(args)
    if args.epsilon is None:
        raise ValueError(f"bound {args.bound} needs --epsilon")
    if args.bound == "general":
        value = general_bound(args.epsilon, args.m)
    elif args.bound == "gaussian":
        value = gaussian_bound(args.epsilon, args.m, args.rho, args.diameter)
    else:
        if args.gamma is None:
            raise ValueError("bound markov needs --gamma")
        value = markov_bound(args.epsilon, args.gamma)
    print(value)
    return EXIT_OK


def _compare_gaussian(args) -> int:
    """Sweep rho and tabulate the correlation-aware leakage bound against
    the group-size one, in result-row shape so the plotting scripts can
    consume it. The sweep value rides in the epsilon column (the schema's
    only numeric axis) and the bound in theoretical_alpha."""
    m = args.m
    if m < 2:
        raise ValueError("compare-gaussian needs --m of at least 2")
    if args.points < 2:
        raise ValueError("compare-gaussian needs at least 2 grid points")
    ceiling = 0.995 / (m - 2) if m > 2 else 0.995
    top = min(args.rho_max, ceiling) if args.rho_max is not None else min(
        0.995, 2.0 * gaussian_improvement_threshold(m), ceiling
    )
    tau = args.tau
    rows = []
    for rho in np.linspace(1e-3, top, args.points):
        rows.append(
            ExperimentResultRow(
                epsilon=float(rho),
                method="bdp_gaussian",
                dp_tau=tau,
                theoretical_alpha=gaussian_bound(tau, m, float(rho), args.diameter),
                empirical_q95=None,
                mape_percent=None,
            )
        )
        rows.append(
            ExperimentResultRow(
                epsilon=float(rho),
                method="bdp_general",
                dp_tau=tau,
                theoretical_alpha=general_bound(tau, m) * args.diameter,
                empirical_q95=None,
                mape_percent=None,
            )
        )
    text = emit_results(rows, args.format, args.out)
    if args.out is None:
        sys.stdout.write(text)
    else:
        print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    return EXIT_OK


def _cmd_oracle(args) -> int:
    if args.instance:
        distribution, kernel = load_oracle_instance(args.instance)
        label = args.instance
    elif args.fixture == "table2":
        eps = math.log(2.0) if args.eps_ln2 else args.epsilon
        if eps is None:
            raise ValueError("oracle --fixture table2 needs --epsilon or --eps-ln2")
        distribution = table2_distribution(args.r)
        kernel = table2_channel(eps)
        label = f"table2 r={args.r:g} epsilon={eps:.6f}"
    else:
        raise ValueError("oracle needs --instance FILE or --fixture table2")

    result = exact_bdpl(distribution, kernel)
    print(f"instance: {label}")
    print(f"bdpl: {result.bdpl:.6f}")
    w = result.witness
    known = ",".join(f"{t}={v}" for t, v in w.known_values) or "-"
    print(
        f"witness: target={w.adversary.target} known=[{known}] "
        f"values=({w.target_value},{w.target_alternative}) output={w.output}"
    )
    if args.fixture == "table2":
        eps = math.log(2.0) if args.eps_ln2 else args.epsilon
        first = exact_adversary_bdpl(
            distribution, kernel, AdversarySpec(target=0, known=frozenset())
        )
        print(f"first_record_adversary: {first:.6f}")
        print(f"closed_form_first_record: {table2_closed_form(args.r, eps):.6f}")
        print(f"two_eps: {2 * eps:.6f}")
    return EXIT_OK


def _cmd_estimate(args) -> int:
    if args.what == "pearson":
        clip = Interval(args.clip[0], args.clip[1])
        ds = datasets.load_grouped_csv(
            args.input, value_column=args.value_column, group_column=args.group_column, clip=clip
        )
        matrix = datasets.to_group_matrix(ds, size=args.group_size)
        print(f"records: {ds.n}")
        print(f"max_group_size: {ds.declared_m}")
        print(f"complete_groups: {matrix.shape[0]}")
        print(f"max_pearson: {estimate_max_pearson(matrix):.4f}")
        return EXIT_OK

    series = datasets.load_state_series(args.input)
    model = estimate_transition(series.array(), num_states=args.states)
    print(f"observations: {series.n}")
    for row in model.transition:
        print("  ".join(f"{p:.6f}" for p in row))
    print("initial: " + "  ".join(f"{p:.6f}" for p in model.initial))
    report = validate_markov_model(model)
    if report.ok:
        print(f"gamma: {chain_gamma(model).gamma:.4f}")
        print("hypotheses: ok")
    else:
        print("hypotheses: " + "; ".join(sorted(report.codes())))
    return EXIT_OK


def _cmd_run(args) -> int:
    config = config_from_file(args.config)
    if args.seed is not None:
        config = dataclasses.replace(config, master_seed=args.seed)
    rows = run_experiment(config)
    text = emit_results(rows, format=args.format, path=args.out)
    if args.out is None:
        sys.stdout.write(text)
    else:
        print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    if all(r.dp_tau is None for r in rows):
        return EXIT_INFEASIBLE
    return EXIT_OK


def _cmd_synth(args) -> int:
    if args.out is None:
        raise ValueError("synth needs --out PATH")
    seed = args.seed if args.seed is not None else 0
    if args.what == "iq":
        ds = datasets.generate_synthetic_iq(
            pairs=args.pairs, mu=args.mu, variance=args.variance, rho=args.rho, seed=seed
        )
        datasets.save_grouped_csv(ds, args.out)
        print(f"wrote {ds.n} records ({args.pairs} pairs) to {args.out}", file=sys.stderr)
        return EXIT_OK
    transition = _NAMED_TRANSITIONS.get(args.transition)
    if transition is None:
        raise ValueError(
            f"unknown transition {args.transition!r}; "
            f"expected one of {sorted(_NAMED_TRANSITIONS)}"
        )
    model = MarkovChainModel.from_published(np.asarray(transition), args.length)
    states = sample_chain(model, seed)
    series = datasets.BinaryStateSeries(
        states=tuple(int(s) for s in states), source_label=f"synthetic:{args.transition}"
    )
    datasets.save_state_series(series, args.out)
    print(f"wrote {series.n} states to {args.out}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corrdp",
        description="Calibrate privacy mechanisms for correlated data.",
    )
    # The global flags live on the top-level parser (defaults) and on every
    # subparser (SUPPRESS), so both orderings parse and the later position
    # never clobbers an explicitly given earlier one.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--seed",
        type=int,
        default=argparse.SUPPRESS,
        help="override the configured seed",
    )
    common.add_argument(
        "--format",
        choices=("csv", "json"),
        default=argparse.SUPPRESS,
        help="output format for tables",
    )
    common.add_argument(
        "--out", default=argparse.SUPPRESS, help="write output to this path"
    )
    parser.add_argument("--seed", type=int, default=None, help="override the configured seed")
    parser.add_argument(
        "--format", choices=("csv", "json"), default="csv", help="output format for tables"
    )
    parser.add_argument("--out", default=None, help="write output to this path")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="leakage target -> DP parameter", parents=[common])
    p.add_argument("bound", choices=("general", "gaussian", "markov"))
    p.add_argument("--epsilon", type=float, required=True, help="leakage target")
    p.add_argument("--m", type=int, default=1, help="group size bound")
    p.add_argument("--rho", type=float, default=0.0, help="max pairwise correlation")
    p.add_argument("--diameter", type=float, default=None, help="clip diameter")
    p.add_argument("--gamma", type=float, default=None, help="transition ratio")
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("bound", help="DP parameter -> leakage", parents=[common])
    p.add_argument("bound", choices=("general", "gaussian", "markov", "compare-gaussian"))
    p.add_argument("--epsilon", type=float, default=None, help="DP parameter")
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--diameter", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--tau", type=float, default=1.0, help="compare-gaussian: DP parameter")
    p.add_argument("--points", type=int, default=60, help="compare-gaussian: grid size")
    p.add_argument(
        "--rho-max", type=float, default=None, help="compare-gaussian: top of the rho sweep"
    )
    p.set_defaults(func=_cmd_bound)

    p = sub.add_parser("oracle", help="exact leakage of a discrete instance", parents=[common])
    p.add_argument("--instance", default=None, help="instance file (alphabet, pmf, kernel)")
    p.add_argument("--fixture", choices=("table2",), default=None)
    p.add_argument("--r", type=float, default=2.0, help="tightness family parameter")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--eps-ln2", action="store_true", help="use epsilon = ln 2")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("estimate", help="estimate correlation or transitions", parents=[common])
    p.add_argument("what", choices=("pearson", "transition"))
    p.add_argument("--input", required=True)
    p.add_argument("--value-column", default="value")
    p.add_argument("--group-column", default="group")
    p.add_argument("--clip", type=float, nargs=2, default=(0.0, 254.0), metavar=("LO", "HI"))
    p.add_argument("--group-size", type=int, default=None)
    p.add_argument("--states", type=int, default=2)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("run", help="run an experiment sweep from a config file", parents=[common])
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("synth", help="generate synthetic datasets", parents=[common])
    p.add_argument("what", choices=("iq", "chain"))
    p.add_argument("--pairs", type=int, default=1000)
    p.add_argument("--mu", type=float, default=100.0)
    p.add_argument("--variance", type=float, default=15.0)
    p.add_argument("--rho", type=float, default=0.45)
    p.add_argument("--transition", default="activity")
    p.add_argument("--length", type=int, default=288)
    p.set_defaults(func=_cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return EXIT_OK
    except (CorrdpError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
