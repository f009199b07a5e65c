"""Batch front-end: segment, similarity, anomaly, and serve subcommands.

Exit codes: 0 success, 2 I/O failure, 3 parse failure, 4 evaluation failure.
With --report DIR the subcommands also render figures next to the delimited
output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import anomaly as anomaly_mod
from .engine import evaluate, export_tree_csv, verify_partition
from .errors import CsvError, EvaluationError, QueryError, SegtreeError
from .guidance import sibling_distances
from .query import parse_query
from .series import iso_utc, parse_csv

EXIT_IO = 2
EXIT_PARSE = 3
EXIT_EVAL = 4


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="segtree", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    seg = sub.add_parser("segment", help="evaluate a query file into a segment tree")
    _series_query_args(seg)
    seg.add_argument("--out", required=True, help="output path for the tree")
    seg.add_argument("--format", choices=("csv", "json"), default="csv")
    seg.add_argument("--verify", action="store_true",
                     help="re-check the exact-partition invariant on the produced tree")
    seg.add_argument("--report", help="directory for rendered figures")

    sim = sub.add_parser("similarity", help="mean sibling DTW distances for a node's children")
    _series_query_args(sim)
    sim.add_argument("--node", help="parent node id (default: tree root)")
    sim.add_argument("--dimensions", help="comma-separated dimension names")
    sim.add_argument("--out", required=True)
    sim.add_argument("--format", choices=("csv", "json"), default="csv")
    sim.add_argument("--report", help="directory for rendered figures")

    ano = sub.add_parser("anomaly", help="point-anomaly detection over a series range")
    ano.add_argument("--series", required=True)
    ano.add_argument("--dimension", help="dimension to analyze (default: first numeric)")
    ano.add_argument("--detectors", default="mad", help="comma list of mad,lof,shesd,io_tc")
    ano.add_argument("--from", dest="from_", type=int, default=None)
    ano.add_argument("--to", type=int, default=None)
    ano.add_argument("--bins", type=int, default=20)
    ano.add_argument("--normalization", default="absolute",
                     choices=("absolute", "per_bin_percent", "per_type_percent"))
    ano.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                     help="detector parameter, e.g. mad_c=3 lof_k=10 shesd_period=24")
    ano.add_argument("--out", required=True)
    ano.add_argument("--format", choices=("csv", "json"), default="csv")
    ano.add_argument("--report", help="directory for rendered figures")

    srv = sub.add_parser("serve", help="launch the JSON service")
    srv.add_argument("--host", default=os.environ.get("SEGTREE_HOST", "127.0.0.1"))
    srv.add_argument("--port", type=int, default=int(os.environ.get("SEGTREE_PORT", "8765")))
    srv.add_argument("--workers", type=int, default=None, help="evaluation threads per query")
    srv.add_argument("--session-log", help="append-log file for session persistence")
    return p


def _series_query_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--series", required=True, help="CSV file with a timestamp column")
    p.add_argument("--query", required=True, help="query JSON file")
    p.add_argument("--threads", type=int, default=1, help="worker threads for evaluation")
    p.add_argument("--bookmarks", help="file with one bookmarked node id per line")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "segment":
            return _cmd_segment(args)
        if args.command == "similarity":
            return _cmd_similarity(args)
        if args.command == "anomaly":
            return _cmd_anomaly(args)
        if args.command == "serve":
            return _cmd_serve(args)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (CsvError, QueryError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except SegtreeError as exc:
        print(f"evaluation error: {exc}", file=sys.stderr)
        return EXIT_EVAL
    return 0


def _read(path: str) -> bytes:
    with open(path, "rb") as f:
        return f.read()


def _load_inputs(args):
    series = parse_csv(_read(args.series), source_name=os.path.basename(args.series))
    query = parse_query(_read(args.query).decode("utf-8"))
    bookmarks: set[str] = set()
    if getattr(args, "bookmarks", None):
        bookmarks = {
            ln.strip() for ln in _read(args.bookmarks).decode().splitlines() if ln.strip()
        }
    return series, query, bookmarks


def _cmd_segment(args) -> int:
    series, query, bookmarks = _load_inputs(args)
    tree = evaluate(query, series, bookmarks=bookmarks, workers=max(1, args.threads))
    for w in tree.warnings:
        print(f"warning: level {w['level']} [{w['from']}, {w['to']}]: {w['message']}", file=sys.stderr)
    if args.verify:
        problems = verify_partition(tree)
        if problems:
            for msg in problems:
                print(f"partition violation: {msg}", file=sys.stderr)
            return EXIT_EVAL
    data = export_tree_csv(tree) if args.format == "csv" else tree.to_json().encode()
    with open(args.out, "wb") as f:
        f.write(data)
    if args.report:
        from . import report

        os.makedirs(args.report, exist_ok=True)
        report.segment_overview(tree, os.path.join(args.report, "segments.png"))
    print(f"wrote {args.out}: {tree.node_count} nodes")
    return 0


def _cmd_similarity(args) -> int:
    series, query, bookmarks = _load_inputs(args)
    tree = evaluate(query, series, bookmarks=bookmarks, workers=max(1, args.threads))
    parent = tree.node(args.node) if args.node else tree.root
    dims = [d for d in (args.dimensions or "").split(",") if d] or None
    sims = sibling_distances(tree, parent.id, dims)
    if args.format == "json":
        data = json.dumps([sm.to_dict() for sm in sims], separators=(",", ":")).encode()
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["node_id", "from", "to", "d_bar", "domain_min", "domain_max",
                    "midpoint", "color_position"])
        from .guidance import color_position

        for sm in sims:
            node = tree.node(sm.node_id)
            w.writerow([sm.node_id, node.from_, node.to, repr(sm.d_bar),
                        repr(sm.scale_domain[0]), repr(sm.scale_domain[1]),
                        repr(sm.scale_domain[2]), repr(color_position(sm.d_bar, sm.scale_domain))])
        data = buf.getvalue().encode()
    with open(args.out, "wb") as f:
        f.write(data)
    if args.report and sims:
        from . import report

        os.makedirs(args.report, exist_ok=True)
        report.similarity_figure(sims, os.path.join(args.report, "similarity.png"))
    print(f"wrote {args.out}: {len(sims)} siblings")
    return 0


def _cmd_anomaly(args) -> int:
    series = parse_csv(_read(args.series), source_name=os.path.basename(args.series))
    dim_name = args.dimension
    if not dim_name:
        numeric = [d for d in series.dimensions if d.kind == "numeric"]
        if not numeric:
            raise EvaluationError("series has no numeric dimension")
        dim_name = numeric[0].name
    dim = series.dimension(dim_name)
    from_ = args.from_ or 1
    to = args.to or series.n
    view = series.view(from_, to)
    params = {}
    for kv in args.param:
        if "=" not in kv:
            raise QueryError(f"--param expects KEY=VALUE, got {kv!r}")
        k, v = kv.split("=", 1)
        params[k.strip()] = float(v)
    detectors = [d for d in args.detectors.split(",") if d]
    local = anomaly_mod.run_detectors(view.dimension(dim_name).values, detectors, params)
    anomalies = [anomaly_mod.PointAnomaly(a.index + from_ - 1, a.type, a.score) for a in local]
    hist = anomaly_mod.aggregate(anomalies, from_, to, args.bins, args.normalization)
    overlay = anomaly_mod.density_overlay(anomalies, from_, to)

    if args.format == "json":
        data = json.dumps(
            {
                "dimension": dim_name,
                "from": from_,
                "to": to,
                "anomalies": [a.to_dict() for a in anomalies],
                "histogram": hist.to_dict(),
                "overlay": overlay,
            },
            separators=(",", ":"),
        ).encode()
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "timestamp", "type", "score"])
        for a in anomalies:
            w.writerow([a.index, iso_utc(int(series.timestamps[a.index - 1])), a.type, repr(a.score)])
        data = buf.getvalue().encode()
    with open(args.out, "wb") as f:
        f.write(data)
    if args.report:
        from . import report

        os.makedirs(args.report, exist_ok=True)
        hist_path = os.path.join(args.report, "histogram.csv")
        with open(hist_path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["bin"] + list(anomaly_mod.ANOMALY_TYPES))
            for b, row in enumerate(hist.counts):
                w.writerow([b] + [repr(v) for v in row])
        report.anomaly_figure(
            np.arange(from_, to + 1), view.dimension(dim_name).values, anomalies,
            overlay, hist, os.path.join(args.report, "anomalies.png"), dimension=dim_name,
        )
    print(f"wrote {args.out}: {len(anomalies)} anomalies ({dim.kind} dimension {dim_name!r})")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import SessionStore, create_app

    store = SessionStore(args.session_log or os.environ.get("SEGTREE_SESSION_LOG") or None)
    app = create_app(store=store, workers=args.workers)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


if __name__ == "__main__":
    sys.exit(main())
