"""Command-line entry point: ``mixcurv sample|fit|predict|benchmark``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from . import bench
from . import io as mio
from .forest import ForestConfig
from .product import parse_signature
from .sampler import MixtureConfig, sample_mixture
from .tree import TASKS, FitConfig

log = logging.getLogger("mixcurv")

EXIT_VALIDATION = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _signature_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mixcurv", description="Decision trees and random forests on product manifolds.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sample", help="draw a Gaussian mixture dataset")
    s.add_argument("--signature", required=True, help='e.g. "H5:-1 x S5:1"')
    s.add_argument("--points", type=int, default=1000)
    s.add_argument("--clusters", type=int, default=4)
    s.add_argument("--variance-scale", type=float, default=1.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--matrix-file", help="store X in this CSV file (relative to --out)")
    s.add_argument("--out", required=True)

    f = sub.add_parser("fit", help="fit a tree or forest to a dataset file")
    f.add_argument("--data", required=True)
    f.add_argument("--task", choices=TASKS, help="defaults to the dataset's task")
    f.add_argument("--space", choices=bench.SPACES, default="product")
    f.add_argument("--max-depth", type=int, default=3)
    f.add_argument("--min-samples-split", type=int, default=2)
    f.add_argument("--min-impurity-decrease", type=float, default=0.0)
    f.add_argument("--forest", action="store_true")
    f.add_argument("--trees", type=int, default=12)
    f.add_argument("--bootstrap", action=argparse.BooleanOptionalAction, default=True)
    f.add_argument("--feature-subsample", type=int)
    f.add_argument("--workers", type=int, default=1)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--out", required=True)

    r = sub.add_parser("predict", help="apply a fitted model to a dataset file")
    r.add_argument("--model", required=True)
    r.add_argument("--data", required=True)
    r.add_argument("--out", required=True)

    b = sub.add_parser("benchmark", help="run the synthetic benchmarks")
    b.add_argument("which", choices=("figure1", "table1"))
    b.add_argument("--trials", type=int)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", required=True)
    b.add_argument("--curvatures", type=_float_list, help="figure1 curvature grid, comma-separated")
    b.add_argument("--signatures", type=_signature_list, help="table1 signatures, comma-separated")
    b.add_argument("--dim", type=int, default=2, help="figure1 component dimension")
    b.add_argument("--curvature", type=float, default=1.0, help="table1 |K| for curved factors")
    b.add_argument("--points", type=int, default=1000)
    b.add_argument("--variance-scale", type=float, default=1.0)
    b.add_argument("--workers", type=int, default=1)
    return p


def _sample(args):
    cfg = MixtureConfig(parse_signature(args.signature), args.clusters, args.points, args.variance_scale, args.seed)
    draw = sample_mixture(cfg)
    meta = {
        "generator": "gaussian-mixture",
        "seed": args.seed,
        "clusters": args.clusters,
        "points": args.points,
        "variance_scale": args.variance_scale,
        "weights": draw.weights.tolist(),
    }
    ds = mio.LabeledDataset(cfg.signature, draw.X, draw.labels, "classification", meta)
    mio.save_dataset(args.out, ds, args.matrix_file)
    log.info("wrote %d points on %s to %s", len(draw.labels), cfg.signature, args.out)


def _fit(args):
    ds = mio.load_dataset(args.data)
    task = args.task or ds.task
    tcfg = FitConfig(args.max_depth, args.min_samples_split, args.min_impurity_decrease, task)
    if args.forest:
        cfg = ForestConfig(args.trees, args.bootstrap, args.feature_subsample, args.seed, tcfg)
    else:
        if args.feature_subsample is not None:
            raise ValueError("--feature-subsample requires --forest")
        cfg = tcfg
    model = bench.fit_space(args.space, ds.signature, ds.X, ds.y, cfg, n_jobs=args.workers)
    mio.save_model(args.out, model)
    log.info("wrote %s model to %s", args.space, args.out)


def _predict(args):
    model = mio.load_model(args.model)
    ds = mio.load_dataset(args.data)
    if model.signature is not None and str(model.signature) != str(ds.signature):
        raise ValueError(f"model was fit on '{model.signature}' but data is on '{ds.signature}'")
    pred = model.predict(ds.X)
    if model.estimator.task == "classification":
        mio.save_predictions(args.out, pred, model.predict_proba(ds.X), model.estimator.classes)
    else:
        mio.save_predictions(args.out, pred)


def _benchmark(args):
    common = dict(seed=args.seed, n_points=args.points, variance_scale=args.variance_scale, n_jobs=args.workers)
    if args.which == "figure1":
        if args.signatures:
            raise ValueError("--signatures applies to table1 only")
        kw = dict(common, dim=args.dim)
        if args.curvatures:
            kw["curvatures"] = args.curvatures
        result = bench.run_figure1(trials=args.trials or 20, **kw)
    else:
        if args.curvatures:
            raise ValueError("--curvatures applies to figure1 only")
        sigs = [parse_signature(s) for s in args.signatures] if args.signatures else None
        result = bench.run_table1(trials=args.trials or 10, signatures=sigs, curvature=args.curvature, **common)
    mio.write_json(args.out, result)
    print(bench.format_table(result))


COMMANDS = {"sample": _sample, "fit": _fit, "predict": _predict, "benchmark": _benchmark}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"mixcurv: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"mixcurv: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return 0


if __name__ == "__main__":
    sys.exit(main())
