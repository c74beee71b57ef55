"""Command-line entry point: `svr <subcommand>`.

Subcommands mirror the library layers: curve-info (geometry reports),
synth (dataset generation), fit / predict (the estimator), tune
(theory-driven parameter selection), experiment (convergence studies).
Tabular output is plain CSV on stdout or in the --out file.
"""

import argparse
import math
import sys

from .curves import CurveSpec, build_curve, geometry_report, \
    normalize_to_reach
from .estimator import fit, predict
from .experiments import run_experiment
from .persist import (experiment_config_from_file, fit_config_from_file,
                      load_dataset, load_model, model_from_config,
                      save_dataset, save_model, save_predictions)
from .synthesis import Dataset, sample_dataset
from .tuning import (C_gamma_f, M_star, assumption_report,
                     constants_from_model, l_max, select_noiseless,
                     select_noisy, select_wide)

CURVE_INFO_HEADER = ("kind,d,len,reach,max_curvature,"
                     "srank_sum,srank_count,complexity")
TUNE_HEADER = "l,j,regime,C_gamma_f,M_star,l_max,n_min"


def _cmd_curve_info(args):
    kwargs = {"kind": args.kind.replace("-", "_"), "d": args.d}
    if args.length is not None:
        kwargs["length"] = args.length
    if args.kappa is not None:
        kwargs["kappa"] = args.kappa
    curve = build_curve(CurveSpec(**kwargs), grid_size=args.grid)
    if args.normalize_reach is not None:
        curve = normalize_to_reach(curve, args.normalize_reach)
    rep = geometry_report(curve)
    print(CURVE_INFO_HEADER)
    print(",".join(str(v) for v in (
        rep.kind, rep.d, repr(rep.length), repr(rep.reach),
        repr(rep.max_curvature), repr(rep.stable_rank_sum),
        rep.stable_rank_count, repr(rep.complexity))))


def _cmd_synth(args):
    model = model_from_config(args.model)
    ds = sample_dataset(model, args.n, args.seed)
    if args.no_oracle:
        ds = Dataset(X=ds.X, Y=ds.Y, oracle_t=None, oracle_tangent=None,
                     seed=ds.seed)
    save_dataset(args.out, ds)


def _cmd_fit(args):
    ds = load_dataset(args.data)
    config = fit_config_from_file(args.config)
    save_model(args.out, fit(ds.X, ds.Y, config))


def _cmd_predict(args):
    model = load_model(args.model)
    ds = load_dataset(args.data)
    save_predictions(args.out, predict(model, ds.X))


def _maybe(fn, *fn_args):
    try:
        return fn(*fn_args)
    except ValueError:
        return math.nan


def _cmd_tune(args):
    model = model_from_config(args.model)
    abs_const = dict(pair.split("=", 1) for pair in args.abs_const)
    abs_const = {key: float(value) for key, value in abs_const.items()}
    tc = constants_from_model(model, abs_const or None)
    if args.regime == "noiseless":
        sel = select_noiseless(tc, args.n)
    elif args.regime == "wide":
        sel = select_wide(tc)
    else:
        sel = select_noisy(tc, args.n)
    report = assumption_report(model, tc)
    print(TUNE_HEADER)
    print(",".join(str(v) for v in (
        sel.l, sel.j, sel.regime,
        repr(_maybe(C_gamma_f, tc)), repr(_maybe(M_star, tc)),
        repr(_maybe(l_max, tc)), report.n_min_noisy)))


def _cmd_experiment(args):
    config = experiment_config_from_file(args.config, out=args.out)
    rows = run_experiment(config)
    failed = sum(r.failed for r in rows)
    print(f"{len(rows)} rows -> {args.out}"
          + (f" ({failed} failed)" if failed else ""), file=sys.stderr)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="svr", description="Significant-vector regression toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curve-info", help="geometry report for one curve")
    p.add_argument("--kind", required=True,
                   choices=["line", "arc", "meyer-staircase", "meyer-helix"])
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--length", type=float)
    p.add_argument("--kappa", type=float)
    p.add_argument("--normalize-reach", type=float)
    p.add_argument("--grid", type=int, default=1000)
    p.set_defaults(func=_cmd_curve_info)

    p = sub.add_parser("synth", help="sample a dataset from a model config")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--no-oracle", action="store_true",
                   help="drop the generating parameter columns")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("fit", help="fit a model to a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("predict", help="predict with a fitted model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("tune", help="theory-driven parameter selection")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--regime", choices=["noisy", "noiseless", "wide"],
                   default="noisy")
    p.add_argument("--abs-const", action="append", default=[],
                   metavar="KEY=VALUE",
                   help="override one absolute constant (repeatable)")
    p.set_defaults(func=_cmd_tune)

    p = sub.add_parser("experiment", help="run a convergence study")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ValueError, OSError) as exc:
        print(f"svr: error: {exc}", file=sys.stderr)
        raise SystemExit(2)


if __name__ == "__main__":
    main()
