"""Command-line interface: estimate, tune, simulate, benchmark, classify, spectrum.

Every command writes its outputs atomically and embeds the full run
configuration (including the seed) in each file. Exit codes: 0 on success,
2 for validation errors, 3 for numerical failures.
"""
import argparse
import os
import sys

import numpy as np

from . import estimators as est
from . import io
from .benchmark import METHODS, aggregate, run_benchmark
from .classify import NAIVE, PrecisionSource, SplitProtocol, split_benchmark
from .exceptions import ConfigurationError, InadmissibleError, NumericalError, ValidationError
from .matrix import as_data, as_symmetric, eigenvalues, sample_covariance
from .metrics import timed
from .simgen import FAMILIES, SimSpec, generate, sample_mvn
from .tuning import CvPlan, cv_select, lambda_max, plan_for, region_for

SCHEMA_VERSION = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _floats(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _names(text):
    return tuple(v.strip() for v in text.split(",") if v.strip())


def build_parser():
    parser = argparse.ArgumentParser(prog="jpen", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        if seed:
            p.add_argument("--seed", type=int, default=0)
        p.add_argument("--timing", action="store_true",
                       help="record wall times (makes outputs run-dependent)")

    variants = sorted(est.COVARIANCE_VARIANTS | est.PRECISION_VARIANTS | est.BASELINES)

    p = sub.add_parser("estimate", help="estimate a covariance or precision matrix")
    p.add_argument("--input", required=True)
    p.add_argument("--input-kind", choices=("data", "cov"), default="data")
    p.add_argument("--header", action="store_true")
    p.add_argument("--variant", choices=variants, default="corr")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--tune", action="store_true", help="choose (lambda, gamma) by CV")
    p.add_argument("--points", type=int, default=10)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--output", required=True, help="prefix for PREFIX.csv and PREFIX.json")
    common(p)

    p = sub.add_parser("tune", help="cross-validate (lambda, gamma) on a data matrix")
    p.add_argument("--input", required=True)
    p.add_argument("--header", action="store_true")
    p.add_argument("--variant", choices=variants, default="corr")
    p.add_argument("--lambda-grid", type=_floats)
    p.add_argument("--gamma-grid", type=_floats)
    p.add_argument("--points", type=int, default=10)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", required=True)
    common(p)

    p = sub.add_parser("simulate", help="generate a ground truth and a Gaussian sample")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--groups", type=int, help="hub: number of groups")
    p.add_argument("--rho", type=float, help="neighborhood: link strength")
    p.add_argument("--blocks", type=int, help="block: number of blocks")
    p.add_argument("--output", required=True,
                   help="prefix for PREFIX_sigma.csv, PREFIX_omega.csv, PREFIX_data.csv, PREFIX.json")
    common(p)

    p = sub.add_parser("benchmark", help="replicated simulation benchmark")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--replicates", type=int, default=50)
    p.add_argument("--methods", type=_names, default=("jpen-corr", "baseline-soft", "baseline-shrink"),
                   help=f"comma-separated subset of {','.join(METHODS)}")
    p.add_argument("--groups", type=int)
    p.add_argument("--rho", type=float)
    p.add_argument("--blocks", type=int)
    p.add_argument("--points", type=int, default=10)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--tol", type=float, default=1e-8, help="zero tolerance for sparsity rates")
    p.add_argument("--output", required=True, help="prefix for PREFIX.csv and PREFIX.json")
    common(p)

    p = sub.add_parser("classify", help="repeated-split LDA benchmark on a labeled CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--header", action="store_true")
    p.add_argument("--label-column", default="-1", help="index or (with --header) name")
    p.add_argument("--method", choices=sorted(est.PRECISION_VARIANTS | {NAIVE}), default="prec-corr")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--train-per-class", type=_ints, default=(27, 15))
    p.add_argument("--repeats", type=int, default=100)
    p.add_argument("--points", type=int, default=10)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", required=True)
    common(p)

    p = sub.add_parser("spectrum", help="eigenvalues of one or more matrices, long format")
    p.add_argument("--input", nargs="+", required=True)
    p.add_argument("--header", action="store_true")
    p.add_argument("--output", required=True)
    common(p, seed=False)
    return parser


def _run_config(args):
    cfg = {k: v for k, v in vars(args).items() if k != "timing"}
    return {"schemaVersion": SCHEMA_VERSION, **cfg}


def _check_paths(args):
    inputs = getattr(args, "input", None)
    inputs = inputs if isinstance(inputs, list) else [inputs]
    for path in inputs:
        if path is not None and not os.path.isfile(path):
            raise ConfigurationError(f"input file not found: {path}")
    out_dir = os.path.dirname(os.path.abspath(args.output))
    if not os.path.isdir(out_dir):
        raise ConfigurationError(f"output directory does not exist: {out_dir}")


def _family_params(args):
    params = {}
    for name in ("groups", "rho", "blocks"):
        v = getattr(args, name, None)
        if v is not None:
            params[name] = v
    return params


def _explicit_config(args):
    if args.lam is None or args.gamma is None:
        raise ConfigurationError("give both --lambda and --gamma, or --tune")
    return est.EstimatorConfig(args.lam, args.gamma)


def _require_admissible(variant, s, cfg):
    # fail before any inversion, and report the bound the user should respect
    if variant in est.BASELINES:
        return
    region = region_for(s, variant)
    if not region.contains(cfg.lam, cfg.gamma):
        bound = lambda_max(region, cfg.gamma)
        raise InadmissibleError(cfg.lam, cfg.gamma, bound)


def cmd_estimate(args):
    run = _run_config(args)
    m = io.read_matrix_csv(args.input, args.header)
    if args.input_kind == "data":
        x = as_data(m)
        s = sample_covariance(x)
    else:
        if args.tune:
            raise ConfigurationError("--tune needs --input-kind data")
        s = as_symmetric(m, "input covariance")

    def work():
        cv = None
        if args.tune:
            cv = cv_select(x, plan_for(x, args.variant, args.points, args.folds, args.seed), args.variant)
            cfg = cv.config
        else:
            cfg = _explicit_config(args)
            _require_admissible(args.variant, s, cfg)
        fit = est.estimate(args.variant, s, cfg)
        if fit.admissible is False:
            region = region_for(s, args.variant)
            raise InadmissibleError(cfg.lam, cfg.gamma, lambda_max(region, cfg.gamma))
        return fit, cv

    (fit, cv), seconds = timed(work)
    report = {**fit.report(), "runConfig": run, "seed": args.seed}
    if cv is not None:
        report["cv"] = cv.to_dict()
    if args.timing:
        report["wallTime"] = seconds
    io.write_matrix_csv(args.output + ".csv", fit.matrix, run)
    io.write_json(args.output + ".json", report)


def cmd_tune(args):
    run = _run_config(args)
    x = as_data(io.read_matrix_csv(args.input, args.header))
    plan = plan_for(x, args.variant, args.points, args.folds, args.seed)
    if args.lambda_grid or args.gamma_grid:
        plan = CvPlan(args.lambda_grid or plan.lambda_grid, args.gamma_grid or plan.gamma_grid,
                      args.folds, args.seed)
    cv, seconds = timed(cv_select, x, plan, args.variant)
    out = {**cv.to_dict(), "runConfig": run}
    if args.timing:
        out["wallTime"] = seconds
    if args.format == "json":
        io.write_json(args.output, out)
        return
    rows = []
    for i, lam in enumerate(plan.lambda_grid):
        for j, gamma in enumerate(plan.gamma_grid):
            loss = cv.loss_surface[i, j]
            rows.append({"lambda": lam, "gamma": gamma,
                         "loss": float(loss) if np.isfinite(loss) else None,
                         "admissible": bool(cv.admissible_mask[i, j]),
                         "selected": lam == cv.best_lambda and gamma == cv.best_gamma})
    io.write_rows_csv(args.output, rows, ("lambda", "gamma", "loss", "admissible", "selected"), run)


def cmd_simulate(args):
    run = _run_config(args)
    # the truth and the sample get independent streams from one seed
    truth_seed, sample_seed = (int(v) for v in np.random.SeedSequence(args.seed).generate_state(2))
    truth = generate(SimSpec(args.family, args.p, _family_params(args), truth_seed))
    x = sample_mvn(truth, args.n, sample_seed)
    sidecar = {**truth.sidecar(), "n": args.n, "seed": args.seed, "runConfig": run}
    io.write_matrix_csv(args.output + "_sigma.csv", truth.sigma, run)
    io.write_matrix_csv(args.output + "_omega.csv", truth.omega, run)
    io.write_matrix_csv(args.output + "_data.csv", x, run)
    io.write_json(args.output + ".json", sidecar)


def cmd_benchmark(args):
    run = _run_config(args)
    reports = run_benchmark(args.family, args.p, args.n, args.replicates, args.methods, args.seed,
                            _family_params(args), args.points, args.folds, args.tol)
    fields = list(reports[0].CSV_FIELDS) + (["wall_time"] if args.timing else [])
    io.write_rows_csv(args.output + ".csv", [r.row(args.timing) for r in reports], fields, run)
    summary = {"schemaVersion": SCHEMA_VERSION, "family": args.family, "p": args.p, "n": args.n,
               "seed": args.seed, "methods": aggregate(reports), "runConfig": run}
    if args.timing:
        summary["wallTime"] = {m: float(sum(r.wall_time for r in reports if r.method == m))
                               for m in args.methods}
    io.write_json(args.output + ".json", summary)


def cmd_classify(args):
    run = _run_config(args)
    label = args.label_column
    x, y = io.read_labeled_csv(args.input, args.header, label)
    source = PrecisionSource(args.method, args.lam, args.gamma, args.points, args.folds, args.seed)
    protocol = SplitProtocol(args.train_per_class, args.repeats, args.seed)
    result, seconds = timed(split_benchmark, x, y, protocol, source)
    out = {**result.to_dict(args.method, x.shape[1]), "seed": args.seed, "runConfig": run}
    if args.timing:
        out["wallTime"] = seconds
    if args.format == "json":
        io.write_json(args.output, out)
        return
    row = {"method": args.method, "p": x.shape[1], "repeats": result.errors.size,
           "mean_error_percent": out["meanErrorPercent"], "stderr_percent": out["stdErrorPercent"]}
    io.write_rows_csv(args.output, [row], tuple(row), run)


def cmd_spectrum(args):
    run = _run_config(args)
    rows = []
    for path in args.input:
        m = as_symmetric(io.read_matrix_csv(path, args.header), path)
        for i, v in enumerate(eigenvalues(m).values):
            rows.append({"source": path, "index": i, "eigenvalue": float(v)})
    io.write_rows_csv(args.output, rows, ("source", "index", "eigenvalue"), run)


COMMANDS = {
    "estimate": cmd_estimate,
    "tune": cmd_tune,
    "simulate": cmd_simulate,
    "benchmark": cmd_benchmark,
    "classify": cmd_classify,
    "spectrum": cmd_spectrum,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        _check_paths(args)
        COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"jpen {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"jpen {args.command}: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
