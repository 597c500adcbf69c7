"""Command line front end.

Subcommands:
  generate     materialize a preset or parsed edge list as a QCOO container
  run          reduced-precision sweep with golden-referenced rank metrics
  convergence  per-iteration L2 deltas for each format
  validate     structural audit of a QCOO file plus a stream spot-check

`run` writes metrics.csv (one row per request, format and cutoff),
metrics_aggregate.csv (mean and median across requests) and provenance.json
into the output directory. Rows are fully sorted so repeated runs produce
byte-identical files regardless of --threads.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .fixedpoint import FxFormat
from .graph import (
    QCOO_MAGIC,
    CooGraph,
    normalize,
    packets,
    read_qcoo,
    requantize,
    validate,
    write_qcoo,
)
from .metrics import MetricsReport, RankingPair, build_report, order_by_score
from .ppr import PprConfig, RankBatch, run as ppr_run
from .spmv import spmv_oracle_float, spmv_oracle_quantized, spmv_stream
from . import datagen

CSV_COLUMNS = [
    "graph",
    "format_bits",
    "kappa",
    "iterations",
    "request_id",
    "N",
    "errors",
    "edit_distance",
    "ndcg",
    "precision",
    "mae",
    "kendall_tau",
]

AGG_COLUMNS = [
    "graph",
    "format_bits",
    "kappa",
    "iterations",
    "N",
    "stat",
    "errors",
    "edit_distance",
    "ndcg",
    "precision",
    "mae",
    "kendall_tau",
]

CONV_FLOOR = 1e-7  # rows below this norm are not emitted


def _parse_formats(text: str) -> list[str]:
    toks = [t.strip() for t in text.split(",") if t.strip()]
    if not toks:
        raise ValueError("need at least one format")
    for t in toks:
        if t in ("f64", "f32"):
            continue
        FxFormat(int(t))  # raises on a bad width
    return toks


def _parse_cutoffs(text: str) -> list[int]:
    ns = sorted({int(t) for t in text.split(",") if t.strip()})
    if not ns or ns[0] < 1:
        raise ValueError(f"cutoffs must be positive integers, got {text!r}")
    return ns


def _fmt_of(tok: str) -> FxFormat | None:
    return None if tok in ("f64", "f32") else FxFormat(int(tok))


def _dtype_of(tok: str):
    return np.float32 if tok == "f32" else np.float64


def _load_graph(source: str, seed: int | None) -> tuple[str, CooGraph]:
    """Resolve a preset name, QCOO path or SNAP path to a float graph."""
    if source in datagen.PRESETS:
        edges = datagen.generate(datagen.preset(source, seed))
        return source, normalize(edges, None)
    path = Path(source)
    if not path.exists():
        raise FileNotFoundError(f"{source!r} is neither a preset nor a file")
    with open(path, "rb") as fh:
        magic = fh.read(len(QCOO_MAGIC))
    if magic == QCOO_MAGIC:
        g = read_qcoo(path)
        if g.fmt is not None:
            g = requantize(g, None)
        return path.stem, g
    edges, _ = datagen.parse_snap(path)
    return path.stem, normalize(edges, None)


def _chunks(ids: np.ndarray, size: int) -> list[np.ndarray]:
    return [ids[i : i + size] for i in range(0, len(ids), size)]


def _sample_requests(num_vertices: int, count: int, seed: int) -> np.ndarray:
    if count > num_vertices:
        raise ValueError(f"{count} requests exceed {num_vertices} vertices")
    rng = np.random.default_rng(seed)
    ids = rng.choice(num_vertices, size=count, replace=False)
    return np.sort(ids)


def _evaluate_chunk(
    g: CooGraph,
    tok: str,
    chunk: np.ndarray,
    golden_scores: np.ndarray,
    golden_orders: np.ndarray,
    req_index: dict[int, int],
    args,
) -> list[MetricsReport]:
    cfg = PprConfig(
        alpha=args.alpha,
        max_iter=args.iters,
        fmt=_fmt_of(tok),
        float_dtype=_dtype_of(tok),
        kappa=len(chunk),
        engine=args.engine,
    )
    batch, _ = ppr_run(g, cfg, chunk)
    scores = batch.scores()
    reports = []
    for j, vertex in enumerate(chunk.tolist()):
        r = req_index[vertex]
        col = scores[:, j]
        pair = RankingPair(
            golden_order=golden_orders[r],
            candidate_order=order_by_score(col, max(args.cutoff_list)),
            golden_scores=golden_scores[:, r],
            candidate_scores=col,
        )
        reports.append(
            build_report(
                pair,
                args.cutoff_list,
                graph=args.graph_id,
                format_bits=tok,
                kappa=args.kappa,
                iterations=args.iters,
                request_id=vertex,
            )
        )
    return reports


def _write_csv(path: Path, columns: list[str], rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([row[c] for c in columns])


def _provenance(path: Path, **payload) -> None:
    payload["package_version"] = __version__
    payload["library_versions"] = {
        "numpy": np.__version__,
        "scipy": __import__("scipy").__version__,
        "networkx": __import__("networkx").__version__,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_generate(args) -> int:
    if args.snap is not None:
        edges, _ = datagen.parse_snap(args.snap)
        graph_id = Path(args.snap).stem
    else:
        edges = datagen.generate(datagen.preset(args.graph, args.seed))
        graph_id = args.graph
    fmt = None if args.frac_bits is None else FxFormat(args.frac_bits)
    g = normalize(edges, fmt)
    write_qcoo(g, args.out)
    _provenance(
        Path(str(args.out) + ".json"),
        command="generate",
        graph=graph_id,
        num_vertices=g.num_vertices,
        num_edges=g.num_edges,
        format_bits=None if fmt is None else fmt.frac_bits,
        seed=args.seed,
    )
    print(f"{args.out}: {g.num_vertices} vertices, {g.num_edges} arcs, format {g.fmt or 'f64'}")
    return 0


def _run_golden(g: CooGraph, ids: np.ndarray, args) -> tuple[np.ndarray, np.ndarray]:
    iters = args.golden_iters if args.golden_iters is not None else max(100, args.iters)
    cfg = PprConfig(alpha=args.alpha, max_iter=iters, kappa=args.kappa)
    scores = np.empty((g.num_vertices, len(ids)), dtype=np.float64)
    pos = 0
    for chunk in _chunks(ids, args.kappa):
        batch, _ = ppr_run(g, cfg, chunk)
        scores[:, pos : pos + len(chunk)] = batch.scores()
        pos += len(chunk)
    orders = np.empty((len(ids), g.num_vertices), dtype=np.int32)
    for r in range(len(ids)):
        orders[r] = order_by_score(scores[:, r])
    return scores, orders


def cmd_run(args) -> int:
    t0 = time.monotonic()
    args.cutoff_list = _parse_cutoffs(args.cutoffs)
    toks = _parse_formats(args.formats)
    graph_id, gf = _load_graph(args.graph, None)
    args.graph_id = graph_id
    ids = _sample_requests(gf.num_vertices, args.requests, args.seed)
    req_index = {v: i for i, v in enumerate(ids.tolist())}

    golden_scores, golden_orders = _run_golden(gf, ids, args)

    variants: dict[str, CooGraph] = {}
    for tok in toks:
        fmt = _fmt_of(tok)
        variants[tok] = gf if fmt is None else requantize(gf, fmt)
        if fmt is None:
            variants[tok].csr(_dtype_of(tok))  # build shared caches up front
        else:
            variants[tok].dest_groups()

    tasks = [(tok, chunk) for tok in toks for chunk in _chunks(ids, args.kappa)]
    reports: list[MetricsReport] = []
    with ThreadPoolExecutor(max_workers=args.threads) as pool:
        futs = [
            pool.submit(
                _evaluate_chunk,
                variants[tok],
                tok,
                chunk,
                golden_scores,
                golden_orders,
                req_index,
                args,
            )
            for tok, chunk in tasks
        ]
        for fut in futs:
            reports.extend(fut.result())

    rows = [row for rep in reports for row in rep.rows()]
    rows.sort(key=lambda r: (r["request_id"], r["format_bits"], r["N"]))

    agg_rows = []
    numeric = ["errors", "edit_distance", "ndcg", "precision", "mae", "kendall_tau"]
    for tok in sorted(toks):
        for n in args.cutoff_list:
            cell = [r for r in rows if r["format_bits"] == tok and r["N"] == n]
            for stat, fn in (("mean", np.mean), ("median", np.median)):
                agg = {
                    "graph": graph_id,
                    "format_bits": tok,
                    "kappa": args.kappa,
                    "iterations": args.iters,
                    "N": n,
                    "stat": stat,
                }
                for col in numeric:
                    agg[col] = float(fn([r[col] for r in cell]))
                agg_rows.append(agg)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        written.append(out / "metrics.csv")
        _write_csv(written[-1], CSV_COLUMNS, rows)
        written.append(out / "metrics_aggregate.csv")
        _write_csv(written[-1], AGG_COLUMNS, agg_rows)
        written.append(out / "provenance.json")
        _provenance(
            written[-1],
            command="run",
            graph=graph_id,
            source=args.graph,
            num_vertices=gf.num_vertices,
            num_edges=gf.num_edges,
            formats=toks,
            kappa=args.kappa,
            iterations=args.iters,
            golden_iterations=args.golden_iters or max(100, args.iters),
            alpha=args.alpha,
            requests=ids.tolist(),
            seed=args.seed,
            engine=args.engine,
            threads=args.threads,
            cutoffs=args.cutoff_list,
            elapsed_seconds=round(time.monotonic() - t0, 3),
        )
    except BaseException:
        for p in written:
            p.unlink(missing_ok=True)
        raise
    print(f"{len(rows)} metric rows for {len(toks)} formats -> {out}")
    return 0


def cmd_convergence(args) -> int:
    t0 = time.monotonic()
    toks = _parse_formats(args.formats)
    graph_id, gf = _load_graph(args.graph, None)
    ids = _sample_requests(gf.num_vertices, args.requests, args.seed)

    rows = []
    mean_rows = []
    for tok in sorted(toks):
        fmt = _fmt_of(tok)
        g = gf if fmt is None else requantize(gf, fmt)
        cfg = PprConfig(
            alpha=args.alpha,
            max_iter=args.iters,
            fmt=fmt,
            float_dtype=_dtype_of(tok),
            kappa=args.kappa,
            engine=args.engine,
            track_convergence=True,
        )
        curves = np.empty((args.iters, len(ids)), dtype=np.float64)
        pos = 0
        for chunk in _chunks(ids, args.kappa):
            _, trace = ppr_run(g, cfg, chunk)
            curves[:, pos : pos + len(chunk)] = trace.norms
            pos += len(chunk)
        for j, vertex in enumerate(ids.tolist()):
            for t in range(args.iters):
                norm = float(curves[t, j])
                if norm < CONV_FLOOR:
                    break
                rows.append(
                    {
                        "graph": graph_id,
                        "format_bits": tok,
                        "request_id": vertex,
                        "iteration": t + 1,
                        "l2_norm": norm,
                    }
                )
        means = curves.mean(axis=1)
        for t in range(args.iters):
            if means[t] < CONV_FLOOR:
                break
            mean_rows.append(
                {
                    "graph": graph_id,
                    "format_bits": tok,
                    "iteration": t + 1,
                    "l2_norm": float(means[t]),
                }
            )

    rows.sort(key=lambda r: (r["request_id"], r["format_bits"], r["iteration"]))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        written.append(out / "convergence.csv")
        _write_csv(
            written[-1],
            ["graph", "format_bits", "request_id", "iteration", "l2_norm"],
            rows,
        )
        written.append(out / "convergence_mean.csv")
        _write_csv(written[-1], ["graph", "format_bits", "iteration", "l2_norm"], mean_rows)
        written.append(out / "provenance.json")
        _provenance(
            written[-1],
            command="convergence",
            graph=graph_id,
            source=args.graph,
            formats=toks,
            kappa=args.kappa,
            iterations=args.iters,
            alpha=args.alpha,
            requests=ids.tolist(),
            seed=args.seed,
            engine=args.engine,
            norm_floor=CONV_FLOOR,
            elapsed_seconds=round(time.monotonic() - t0, 3),
        )
    except BaseException:
        for p in written:
            p.unlink(missing_ok=True)
        raise
    print(f"{len(rows)} trace rows for {len(toks)} formats -> {out}")
    return 0


def cmd_validate(args) -> int:
    g = read_qcoo(args.path)
    findings = validate(g)
    for d in findings:
        print(f"FINDING {d.kind}: {d.message}")

    mismatch = False
    m = min(g.num_edges, args.samples)
    if m:
        sub = CooGraph(
            x=g.x[:m],
            y=g.y[:m],
            val=g.val[:m],
            num_vertices=g.num_vertices,
            dangling=g.dangling,
            fmt=g.fmt,
        )
        rng = np.random.default_rng(args.seed)
        kappa = 2
        if g.fmt is not None:
            values = rng.integers(0, g.fmt.scale + 1, size=(g.num_vertices, kappa))
        else:
            values = rng.random((g.num_vertices, kappa))
        p = RankBatch(values=values, personalization=np.arange(kappa), fmt=g.fmt)
        got = spmv_stream(packets(sub, 8), p)
        if g.fmt is not None:
            ref = spmv_oracle_quantized(sub, p)
            mismatch = not np.array_equal(got.values, ref.values)
        else:
            ref = spmv_oracle_float(sub, p.values)
            mismatch = not np.allclose(got.values, ref, rtol=1e-9, atol=1e-12)
        if mismatch:
            print(f"FINDING StreamMismatch: stream and reference disagree on {m} sampled arcs")
        else:
            print(f"stream agrees with reference on {m} sampled arcs")

    status = "clean" if not findings and not mismatch else "invalid"
    print(f"{args.path}: {g.num_vertices} vertices, {g.num_edges} arcs, {status}")
    return 0 if status == "clean" else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qppr",
        description="Reduced-precision batched PageRank over streaming COO SpMV.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a preset or parsed edge list as QCOO")
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph", help=f"preset name ({', '.join(sorted(datagen.PRESETS))})")
    src.add_argument("--snap", help="path to a 'src dst' edge list file")
    g.add_argument("--out", required=True, help="output .qcoo path")
    g.add_argument("--frac-bits", type=int, default=None, help="store fixed Q1.f values")
    g.add_argument("--seed", type=int, default=None, help="override the preset seed")
    g.set_defaults(func=cmd_generate)

    shared = {
        "--kappa": dict(type=int, default=8, help="batch width (requests per pass)"),
        "--alpha": dict(type=float, default=0.85, help="damping factor"),
        "--seed": dict(type=int, default=7, help="request sampling seed"),
        "--engine": dict(choices=["vector", "stream"], default="vector"),
    }

    r = sub.add_parser("run", help="precision sweep with golden-referenced metrics")
    r.add_argument("--graph", required=True, help="preset name, QCOO path or edge list path")
    r.add_argument("--formats", default="f64,f32,25,23,21,19", help="comma list: f64, f32, or frac bits")
    r.add_argument("--iters", type=int, default=10, help="iterations per candidate run")
    r.add_argument("--golden-iters", type=int, default=None, help="default max(100, --iters)")
    r.add_argument("--requests", type=int, default=100, help="personalization vertices sampled")
    r.add_argument("--cutoffs", default="10,20,50", help="comma list of top-N cutoffs")
    r.add_argument("--threads", type=int, default=1, help="worker threads over (format, batch)")
    r.add_argument("--out", required=True, help="output directory")
    for flag, kw in shared.items():
        r.add_argument(flag, **kw)
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("convergence", help="per-iteration L2 deltas per format")
    c.add_argument("--graph", required=True, help="preset name, QCOO path or edge list path")
    c.add_argument("--formats", default="f64,25,23,21,19", help="comma list: f64, f32, or frac bits")
    c.add_argument("--iters", type=int, default=30, help="iterations to trace")
    c.add_argument("--requests", type=int, default=8, help="personalization vertices sampled")
    c.add_argument("--out", required=True, help="output directory")
    for flag, kw in shared.items():
        c.add_argument(flag, **kw)
    c.set_defaults(func=cmd_convergence)

    v = sub.add_parser("validate", help="audit a QCOO file")
    v.add_argument("path", help="QCOO file to check")
    v.add_argument("--samples", type=int, default=4096, help="arcs for the stream spot-check")
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
