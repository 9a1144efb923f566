"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data or schema error, 3 solver
non-convergence.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import report
from .centrality import ConvergenceError, ZeroBlockError
from .clustering import cluster
from .estimation import fit_hyperparams, row_log_probs
from .metrics import pairwise_f_measure, rand_index, v_measure
from .model import EigenModel
from .persist import ModelFileError, load_model, save_model
from .sampling import RandomSource
from .schema import DataError, Dataset, Schema, SchemaError, dump_dataset, format_cell, read_dataset, read_schema
from .tasks import classify, generate, impute, loo_cross_validate, outlier_scores, regress

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CONVERGENCE = 0, 1, 2, 3

log = logging.getLogger("eigenprob")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--data", help="CSV file (training data, or query rows when --model is given)")
    p.add_argument("--schema", help="schema JSON for --data")
    p.add_argument("--model", help="model file written by 'fit'")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--alpha", type=float, help="override the discrete sharpening exponent")
    p.add_argument("--beta", type=float, help="override the Beta concentration")
    p.add_argument("--damping", type=float, help="solver damping (cluster: membership damping, default 0.85)")
    p.add_argument("--loo", choices=("on", "off"), default="on", help="mask each row's own object (default on)")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--plot", action="store_true", help="also write PNG figures next to --out")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="eigenprob", description="Probability estimation on mixed tabular data "
                                                   "via personalized centrality on a bipartite graph.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("fit", parents=[common], help="grid-search alpha and beta, write a model file")
    for name, helptext in (("classify", "most likely value of a discrete target for each query row"),
                           ("regress", "conditional mean of a continuous target for each query row")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--target", required=True)
    p = sub.add_parser("impute", parents=[common], help="fill blank cells of the query rows")
    p.add_argument("--mode", choices=("most_likely", "random"), default="most_likely")
    p = sub.add_parser("outliers", parents=[common], help="joint log-probability scores and histogram")
    p.add_argument("--threshold", type=float)
    p.add_argument("--bins", type=int, default=30)
    p = sub.add_parser("generate", parents=[common], help="synthetic rows")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--method", choices=("chain", "gibbs"), default="chain")
    p.add_argument("--burn-in", type=int, default=10)
    p.add_argument("--thinning", type=int, default=1)
    p = sub.add_parser("cluster", parents=[common], help="soft clustering of the training rows")
    p.add_argument("-K", type=int, required=True)
    p.add_argument("--truth", help="column holding reference labels; excluded from the graph and scored")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=500)
    sub.add_parser("loglik", parents=[common], help="total and per-row joint log-likelihood")
    p = sub.add_parser("loo-cv", parents=[common], help="leave-one-out classification accuracy")
    p.add_argument("--target", required=True)
    return parser


def _sidecar(out: Optional[str], suffix: str) -> Optional[Path]:
    if out is None:
        return None
    p = Path(out)
    return p.with_name(p.stem + suffix)


def _emit(args, header, rows) -> None:
    text = report.write_table(args.out, header, rows, args.format)
    if args.out is None:
        sys.stdout.write(text)


def _write_meta(args, **extra) -> None:
    path = _sidecar(args.out, ".meta.json")
    if path is None:
        return
    meta = {"command": args.command, "seed": args.seed, **extra}
    path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _apply_overrides(model: EigenModel, args, solver_damping: bool = True) -> EigenModel:
    if args.alpha is not None or args.beta is not None:
        model = model.with_hyper(args.alpha, args.beta)
    if solver_damping and args.damping is not None:
        model = model.with_config(damping=args.damping)
    return model


def _training_model(args, solver_damping: bool = True) -> EigenModel:
    """Model from --model, or built from --data/--schema."""
    if args.model:
        model = load_model(args.model)
    elif args.data and args.schema:
        model = EigenModel.from_dataset(read_dataset(args.data, read_schema(args.schema)))
    else:
        raise UsageError("need --model, or both --data and --schema")
    return _apply_overrides(model, args, solver_damping)


def _query_model(args):
    """Model from --model plus query rows read from --data under the model's schema."""
    if not args.model:
        raise UsageError(f"{args.command} requires --model")
    model = _apply_overrides(load_model(args.model), args)
    if args.data:
        queries = read_dataset(args.data, model.schema)
    else:
        queries = model.dataset
    return model, queries


def _target(model: EigenModel, name: str) -> int:
    try:
        return model.schema.index(name)
    except SchemaError:
        raise UsageError(f"unknown attribute {name!r}") from None


def cmd_fit(args) -> None:
    if not (args.data and args.schema):
        raise UsageError("fit requires --data and --schema")
    if not args.out:
        raise UsageError("fit requires --out for the model file")
    model = _apply_overrides(EigenModel.from_dataset(read_dataset(args.data, read_schema(args.schema))), args)
    alpha, beta, surface = fit_hyperparams(model, loo=args.loo == "on", threads=args.threads)
    model = model.with_hyper(alpha, beta)
    save_model(model, args.out, args.data)
    surface_path = _sidecar(args.out, ".surface.csv")
    report.write_table(surface_path, ("alpha", "beta", "loglik"), surface.rows(), "csv")
    if args.plot:
        report.plot_surface(surface, _sidecar(args.out, ".surface.png"))
    print(f"alpha={alpha:g} beta={beta:g} loglik={surface.values.max():.6f}")


def cmd_classify(args) -> None:
    model, queries = _query_model(args)
    t = _target(model, args.target)
    spec = model.schema[t]
    if not spec.is_discrete:
        raise UsageError(f"target {spec.name!r} is continuous; use regress")
    header = ["row", "prediction", *[f"p_{v}" for v in spec.values]]
    rows = []
    for i, point in enumerate(queries.values):
        label, pmf = classify(model, point, t)
        rows.append([i, spec.values[label], *pmf.probabilities])
    _emit(args, header, rows)


def cmd_regress(args) -> None:
    model, queries = _query_model(args)
    t = _target(model, args.target)
    if model.schema[t].is_discrete:
        raise UsageError(f"target {args.target!r} is discrete; use classify")
    _emit(args, ["row", "prediction"], [[i, regress(model, p, t)] for i, p in enumerate(queries.values)])


def cmd_impute(args) -> None:
    model, queries = _query_model(args)
    root = RandomSource(args.seed)
    out = queries.values.copy()
    for i, point in enumerate(queries.values):
        missing = np.flatnonzero(np.isnan(point))
        if missing.size:
            out[i] = impute(model, point, missing, args.mode, root.substream(i))
    filled = Dataset(model.schema, out)
    if args.format == "csv":
        text = dump_dataset(filled)
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    else:
        _emit(args, model.schema.names, [[format_cell(s, v) for s, v in zip(model.schema, r)] for r in out])
    _write_meta(args, mode=args.mode)


def cmd_outliers(args) -> None:
    model = _training_model(args)
    external = read_dataset(args.data, model.schema) if (args.model and args.data) else None
    rep = outlier_scores(model, external, args.threshold, loo=args.loo == "on", bins=args.bins,
                         threads=args.threads)
    flagged = np.zeros(rep.scores.size, dtype=bool)
    flagged[rep.flagged] = True
    _emit(args, ["row", "score", "flagged"], [[i, s, f] for i, (s, f) in enumerate(zip(rep.scores, flagged))])
    hist = report.histogram_rows(rep.bin_edges, rep.bin_counts)
    hist_path = _sidecar(args.out, ".histogram.csv")
    text = report.write_table(hist_path, report.HISTOGRAM_HEADER, hist, "csv")
    if hist_path is None:
        sys.stdout.write(text)
    if args.plot and args.out:
        report.plot_histogram(rep.bin_edges, rep.bin_counts, _sidecar(args.out, ".png"), threshold=rep.threshold)
    log.info("threshold %.6f, %d rows flagged", rep.threshold, rep.flagged.size)


def cmd_generate(args) -> None:
    from .sampling import GibbsConfig
    model = _training_model(args)
    if args.n < 0:
        raise UsageError("-n must be >= 0")
    gibbs = GibbsConfig(args.burn_in, args.burn_in, args.thinning) if args.method == "gibbs" else None
    data = generate(model, args.n, args.method, args.seed, gibbs, args.threads)
    if args.format == "csv":
        text = dump_dataset(data)
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    else:
        _emit(args, model.schema.names, [[data.label(i, j) for j in range(data.n_cols)] for i in range(data.n_rows)])
    if args.plot and args.out and data.n_rows:
        report.plot_marginals(model.dataset, data, _sidecar(args.out, ".marginals.png"))
    _write_meta(args, n=args.n, method=args.method, alpha=model.hyper.alpha, beta=model.hyper.beta)


def cmd_cluster(args) -> None:
    model = _training_model(args, solver_damping=False)
    dataset = model.dataset
    truth = None
    if args.truth:
        t = _target(model, args.truth)
        truth = dataset.values[:, t]
        keep = [j for j in range(dataset.n_cols) if j != t]
        dataset = Dataset(Schema(tuple(dataset.schema[j] for j in keep)), dataset.values[:, keep])
        model = EigenModel.from_dataset(dataset)
    damping = 0.85 if args.damping is None else args.damping
    state = cluster(model.graph, args.K, damping, RandomSource(args.seed), args.tol, args.max_iter,
                    threads=args.threads)
    if not state.converged:
        raise ConvergenceError(f"clustering did not converge in {state.iterations} iterations "
                               f"(residual {state.residual:.3g})")
    header = ["row", *[f"y_{k}" for k in range(args.K)], "label"]
    _emit(args, header, [[i, *state.memberships[i], int(state.labels[i])] for i in range(dataset.n_rows)])
    extra = {"K": args.K, "damping": damping, "iterations": state.iterations, "restarts": state.restarts}
    if truth is not None:
        ok = ~np.isnan(truth)
        scores = {"v_measure": v_measure(state.labels[ok], truth[ok]),
                  "rand": rand_index(state.labels[ok], truth[ok]),
                  "f_measure": pairwise_f_measure(state.labels[ok], truth[ok])}
        extra.update(scores)
        print(" ".join(f"{k}={v:.4f}" for k, v in scores.items()), file=sys.stderr)
    _write_meta(args, **extra)


def cmd_loglik(args) -> None:
    model = _training_model(args)
    external = read_dataset(args.data, model.schema) if (args.model and args.data) else None
    scores = row_log_probs(model, external, loo=args.loo == "on", threads=args.threads)
    if args.out:
        report.write_table(args.out, ["row", "score"], enumerate(scores), args.format)
    print(f"loglik={scores.sum():.6f}")


def cmd_loo_cv(args) -> None:
    model = _training_model(args)
    t = _target(model, args.target)
    spec = model.schema[t]
    if not spec.is_discrete:
        raise UsageError(f"target {spec.name!r} is continuous")
    cv = loo_cross_validate(model, t, args.threads)
    if args.out:
        report.write_table(args.out, ["row", "truth", "prediction"],
                           [[i, spec.values[a], spec.values[b]] for i, (a, b) in enumerate(zip(cv.truth, cv.predictions))],
                           args.format)
    print(f"accuracy={cv.accuracy:.6f}")


COMMANDS = {"fit": cmd_fit, "classify": cmd_classify, "regress": cmd_regress, "impute": cmd_impute,
            "outliers": cmd_outliers, "generate": cmd_generate, "cluster": cmd_cluster,
            "loglik": cmd_loglik, "loo-cv": cmd_loo_cv}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"eigenprob {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"eigenprob {args.command}: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (SchemaError, DataError, ModelFileError, ZeroBlockError, OSError) as exc:
        print(f"eigenprob {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"eigenprob {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
