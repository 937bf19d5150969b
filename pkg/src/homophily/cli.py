"""Command-line entry point: ``homophily {stats,correlate,evaluate,sweep,report,synth}``."""

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Optional

from . import __version__
from .attributes import (ATTRIBUTE_LABELS, ATTRIBUTES, CorrelationMatrix, attribute_values, box_stats,
                         correlation_matrix, load_attributes)
from .errors import HomophilyError
from .estimator import evaluate, load_labels, predict
from .graph import GraphStats, graph_stats, load_graph
from .sweep import (CURVE_COLUMNS, DEFAULT_COVERAGE_FLOOR, DIRECTIONS, curve_rows, format_table,
                    normalize_direction, run_experiment, sweep)
from .significance import DEFAULT_ALPHA
from .synth import ATTRIBUTES_FILE, EDGES_FILE, LABELS_FILE, emit, generate, load_config

SCHEMA_VERSION = 1
log = logging.getLogger("homophily")


class UsageError(Exception):
    pass


@dataclass
class DatasetPaths:
    name: str
    edges: Optional[Path] = None
    labels: Optional[Path] = None
    attributes: Optional[Path] = None

    def require(self, *kinds):
        for kind in kinds:
            path = getattr(self, kind)
            if path is None:
                raise UsageError(f"dataset {self.name!r}: no {kind} file given")
            if not path.is_file():
                raise FileNotFoundError(f"dataset {self.name!r}: {kind} file not found: {path}")


def collect_datasets(args) -> List[DatasetPaths]:
    """Directories (standard file names) first, then explicit --edges/--labels/--attributes groups."""
    out = []
    for d in args.datasets:
        d = Path(d)
        if not d.is_dir():
            raise FileNotFoundError(f"dataset directory not found: {d}")
        out.append(DatasetPaths(d.resolve().name, d / EDGES_FILE, d / LABELS_FILE, d / ATTRIBUTES_FILE))
    groups = [args.edges or [], args.labels or [], args.attributes or []]
    n = max(map(len, groups))
    for k, g in zip(("--edges", "--labels", "--attributes"), groups):
        if g and len(g) != n:
            raise UsageError(f"{k} given {len(g)} time(s) but {n} dataset(s) were described")
    for i in range(n):
        paths = [Path(g[i]) if g else None for g in groups]
        first = next(p for p in paths if p is not None)
        out.append(DatasetPaths(first.stem, *paths))
    if not out:
        raise UsageError("no dataset given (pass a dataset directory or --edges/--labels/--attributes)")
    if args.name:
        if len(args.name) != len(out):
            raise UsageError(f"--name given {len(args.name)} time(s) for {len(out)} dataset(s)")
        out = [replace(d, name=nm) for d, nm in zip(out, args.name)]
    return out


def load_dataset(d: DatasetPaths, need_attributes=False):
    d.require("edges", "labels")
    labels = load_labels(d.labels)
    g = load_graph(d.edges, user_universe=labels.keys())
    attrs = None
    if need_attributes:
        d.require("attributes")
        attrs = load_attributes(d.attributes)
    return g, labels, attrs


def _envelope(command, body):
    return {"schema_version": SCHEMA_VERSION, "command": command, **body}


def _dump_json(obj):
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _aligned(header, rows, right=()):
    rows = [[str(c) for c in r] for r in rows]
    widths = [max(len(header[i]), *(len(r[i]) for r in rows)) if rows else len(header[i])
              for i in range(len(header))]

    def fmt(r):
        return "  ".join(c.rjust(w) if i in right else c.ljust(w)
                         for i, (c, w) in enumerate(zip(r, widths))).rstrip()

    rule = "-" * len(fmt(header))
    return "\n".join([fmt(header), rule, *map(fmt, rows), rule]) + "\n"


def _emit(args, stem, text, ext):
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{stem}.{ext}").write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


_EXT = {"json": "json", "csv": "csv", "table": "txt"}


def cmd_stats(args):
    rows = []
    for d in collect_datasets(args):
        if d.labels is not None:
            g, _, _ = load_dataset(d)
        else:
            d.require("edges")
            g = load_graph(d.edges)
        rows.append((d.name, graph_stats(g)))
    if args.format == "json":
        text = _dump_json(_envelope("stats", {"datasets": [{"dataset": n, **s.to_dict()} for n, s in rows]}))
    else:
        header = ["dataset", *GraphStats.COLUMNS]
        cells = [[n, *s.row()] for n, s in rows]
        text = _csv_text(header, cells) if args.format == "csv" else _aligned(header, cells, right=range(1, 7))
    _emit(args, "stats", text, _EXT[args.format])
    return 0


BOX_COLUMNS = ("dataset", "attribute", "p5", "p25", "p50", "p75", "p95", "mean")


def cmd_correlate(args):
    results = []
    for d in collect_datasets(args):
        d.require("attributes")
        t = load_attributes(d.attributes)
        if len(t) == 0:
            raise HomophilyError(f"attribute file {d.attributes} holds no users")
        corr = correlation_matrix(t)
        boxes = [(a, box_stats(attribute_values(t, a, t.ids))) for a in ATTRIBUTES]
        results.append((d.name, corr, boxes))
    if args.format == "json":
        body = {"datasets": [{
            "dataset": name,
            "correlation": corr.to_dict(),
            "box_stats": [{"attribute": a, **b.to_dict()} for a, b in boxes],
        } for name, corr, boxes in results]}
        text = _dump_json(_envelope("correlate", body))
    elif args.format == "csv":
        corr_rows = [[name, *("" if v is None else repr(v) for v in corr.values())] for name, corr, _ in results]
        box_rows = [[name, a, *(repr(v) for v in (b.p5, b.p25, b.p50, b.p75, b.p95, b.mean))]
                    for name, _, boxes in results for a, b in boxes]
        text = (_csv_text(["dataset", "friends_followers", "friends_ratio", "followers_ratio"], corr_rows)
                + "\n" + _csv_text(BOX_COLUMNS, box_rows))
    else:
        corr_rows = [[name, *corr.row()] for name, corr, _ in results]
        box_rows = [[name, ATTRIBUTE_LABELS[a], *(f"{v:.3f}" for v in (b.p5, b.p25, b.p50, b.p75, b.p95, b.mean))]
                    for name, _, boxes in results for a, b in boxes]
        text = (_aligned(["dataset", *CorrelationMatrix.COLUMNS],
                         corr_rows, right=(1, 2, 3))
                + "\n" + _aligned(list(BOX_COLUMNS), box_rows, right=range(2, 8)))
    _emit(args, "correlate", text, _EXT[args.format])
    return 0


def cmd_evaluate(args):
    results = []
    for d in collect_datasets(args):
        g, labels, _ = load_dataset(d)
        res = evaluate(g, labels, workers=args.workers)
        if res.accuracy is None:
            log.warning("dataset %s: no user has a labelled neighbour; accuracy is undefined", d.name)
        results.append((d.name, res))
    if args.format == "json":
        text = _dump_json(_envelope("evaluate", {"datasets": [{"dataset": n, **r.to_dict()} for n, r in results]}))
    else:
        header = ["dataset", "n_correct", "n_estimable", "n_universe", "accuracy", "coverage"]
        if args.format == "csv":
            cells = [[n, r.n_correct, r.n_estimable, r.n_universe,
                      "" if r.accuracy is None else repr(r.accuracy), repr(r.coverage)] for n, r in results]
            text = _csv_text(header, cells)
        else:
            cells = [[n, r.n_correct, r.n_estimable, r.n_universe,
                      "-" if r.accuracy is None else f"{r.accuracy:.3f}", f"{r.coverage:.3f}"] for n, r in results]
            text = _aligned(header, cells, right=range(1, 6))
    _emit(args, "evaluate", text, _EXT[args.format])
    return 0


def cmd_sweep(args):
    direction = normalize_direction(args.direction)
    results = []
    for d in collect_datasets(args):
        g, labels, t = load_dataset(d, need_attributes=True)
        res = sweep(g, labels, t, args.attribute, direction, coverage_floor=args.coverage_floor,
                    workers=args.workers)
        if res.best is None:
            log.warning("dataset %s: no threshold keeps coverage above %g", d.name, args.coverage_floor)
        results.append((d.name, res))
    curves = {n: _csv_text(CURVE_COLUMNS, curve_rows(r)) for n, r in results}
    if args.out:
        for n, text in curves.items():
            _emit(args, f"curve_{n}_{args.attribute}_{direction}", text, "csv")
    if args.format == "json":
        text = _dump_json(_envelope("sweep", {"datasets": [{"dataset": n, **r.to_dict()} for n, r in results]}))
    elif args.format == "csv":
        text = "".join(curves[n] for n, _ in results)
    else:
        cells = []
        for n, r in results:
            b = r.best
            cells.append([n, ATTRIBUTE_LABELS.get(args.attribute, "-"), direction,
                          "-" if b is None else f"{b.threshold:.6g}",
                          "-" if r.selected.accuracy is None else f"{r.selected.accuracy:.3f}",
                          f"{r.selected.coverage:.3f}",
                          "-" if r.baseline.accuracy is None else f"{r.baseline.accuracy:.3f}",
                          f"{r.baseline.coverage:.3f}"])
        text = _aligned(["dataset", "attribute", "filter", "threshold", "accuracy", "coverage",
                         "baseline_acc", "baseline_cov"], cells, right=range(3, 8))
    _emit(args, "sweep", text, _EXT[args.format])
    return 0


def cmd_report(args):
    reports = []
    for d in collect_datasets(args):
        g, labels, t = load_dataset(d, need_attributes=True)
        preds = predict(g, labels, workers=args.workers)
        reports.append(run_experiment(g, labels, t, dataset=d.name, coverage_floor=args.coverage_floor,
                                      alpha=args.alpha, predictions=preds))
    if args.format == "json":
        text = _dump_json(_envelope("report", {"reports": [r.to_dict() for r in reports]}))
    elif args.format == "csv":
        header = ["dataset", "attribute", "filter", "threshold", "accuracy", "coverage",
                  "n_correct", "n_estimable", "significant"]
        cells = []
        for rep in reports:
            for r in rep.rows:
                res = r.result
                cells.append([rep.dataset, r.attribute or "", r.direction,
                              "" if r.threshold is None else repr(r.threshold),
                              "" if res is None or res.accuracy is None else repr(res.accuracy),
                              "" if res is None else repr(res.coverage),
                              "" if res is None else res.n_correct,
                              "" if res is None else res.n_estimable,
                              int(r.significant)])
        text = _csv_text(header, cells)
    else:
        text = format_table(reports)
    _emit(args, "report", text, _EXT[args.format])
    return 0


def cmd_synth(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if not args.out:
        raise UsageError("synth needs --out DIR")
    ds = generate(cfg)
    for path in emit(ds, args.out):
        log.info("wrote %s", path)
    return 0


def _unit_interval(name, upper=1.0, closed_upper=False):
    def parse(text):
        v = float(text)
        ok = 0.0 < v <= upper if closed_upper else 0.0 < v < upper
        if not ok:
            bracket = "]" if closed_upper else ")"
            raise argparse.ArgumentTypeError(f"{name} must lie in (0, {upper}{bracket}")
        return v
    return parse


def _workers(text):
    if text == "auto":
        return "auto"
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("--workers takes a positive integer or 'auto'") from None
    if v < 1:
        raise argparse.ArgumentTypeError("--workers takes a positive integer or 'auto'")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="homophily", description="Measure location homophily with neighbour majority-vote estimation.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("datasets", nargs="*", help="dataset directories holding edges.tsv, labels.tsv, attributes.tsv")
    common.add_argument("--edges", action="append", help="edge file (repeat for more datasets)")
    common.add_argument("--labels", action="append", help="label file (repeat for more datasets)")
    common.add_argument("--attributes", action="append", help="attribute file (repeat for more datasets)")
    common.add_argument("--name", action="append", help="dataset name, in dataset order")
    common.add_argument("--out", help="write outputs into this directory instead of stdout")
    common.add_argument("--format", choices=("json", "csv", "table"), default="table")
    common.add_argument("--coverage-floor", type=_unit_interval("--coverage-floor"), default=DEFAULT_COVERAGE_FLOOR)
    common.add_argument("--alpha", type=_unit_interval("--alpha", 0.5, closed_upper=True), default=DEFAULT_ALPHA)
    common.add_argument("--workers", type=_workers, default=1)
    common.add_argument("-q", "--quiet", action="store_true", help="only warnings and errors on stderr")

    sub.add_parser("stats", parents=[common], help="graph statistics per dataset").set_defaults(func=cmd_stats)
    sub.add_parser("correlate", parents=[common], help="attribute correlations and box statistics"
                   ).set_defaults(func=cmd_correlate)
    sub.add_parser("evaluate", parents=[common], help="unfiltered accuracy and coverage").set_defaults(func=cmd_evaluate)
    sp = sub.add_parser("sweep", parents=[common], help="threshold sweep for one filter")
    sp.add_argument("--attribute", choices=ATTRIBUTES, required=True)
    sp.add_argument("--direction", type=normalize_direction, default="HighCut",
                    help=f"one of {', '.join(DIRECTIONS)}")
    sp.set_defaults(func=cmd_sweep)
    sub.add_parser("report", parents=[common], help="five-row filter comparison with significance marks"
                   ).set_defaults(func=cmd_report)
    sy = sub.add_parser("synth", help="generate a synthetic dataset")
    sy.add_argument("--config", required=True, help="JSON config (or an existing manifest.json)")
    sy.add_argument("--out", help="output directory")
    sy.add_argument("--seed", type=int, help="override the config seed")
    sy.add_argument("-q", "--quiet", action="store_true")
    sy.set_defaults(func=cmd_synth)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(name)s: %(levelname)s: %(message)s", stream=sys.stderr, force=True)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (HomophilyError, OSError, ValueError) as exc:
        print(f"homophily {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
