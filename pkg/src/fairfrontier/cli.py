"""End-to-end driver: ingest, build, serve, and selection-log summaries."""

from __future__ import annotations

import argparse
import datetime
import json
import sys
from collections import Counter
from decimal import Decimal, InvalidOperation
from pathlib import Path

from . import __version__
from .classifier import TrainConfig
from .dataset import build_balanced, filter_records, parse_raw
from .frontier import GridConfig, build_family
from .store import export_artifact, export_records, load_artifact, load_records, read_selections, sha256_hex


def parse_threshold_spec(spec: str) -> list[float]:
    """Expand "start:stop:step" (decimal notation) into an inclusive grid."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"threshold spec must be start:stop:step, got {spec!r}")
    try:
        start, stop, step = (Decimal(p) for p in parts)
    except InvalidOperation:
        raise ValueError(f"threshold spec has non-numeric parts: {spec!r}") from None
    if step <= 0:
        raise ValueError("threshold step must be > 0")
    if not (0 <= start <= stop <= 1):
        raise ValueError("thresholds must lie in [0, 1] with start <= stop")
    values = []
    v = start
    while v <= stop:
        values.append(float(v))
        v += step
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairfrontier",
        description="Build and explore recidivism model families spanning error/disparity trade-offs.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="parse and filter a raw defendant table")
    p_ingest.add_argument("--input", required=True, help="raw comma-separated table")
    p_ingest.add_argument("--out", required=True, help="canonical dataset file to write")
    p_ingest.add_argument("--rejects", help="optional rejects report (one JSON object per line)")

    p_build = sub.add_parser("build", help="train the model family and write the artifact")
    p_build.add_argument("--dataset", required=True, help="canonical dataset file from ingest")
    p_build.add_argument("--attribute", required=True, choices=("race", "gender"))
    p_build.add_argument("--per-group-n", type=int, default=1500)
    p_build.add_argument("--seed", type=int, default=0)
    p_build.add_argument("--grid-k", type=int, default=9, help="weight levels per axis")
    p_build.add_argument("--grid-range", type=float, default=4.0, help="weight range bound r (grid spans [1/r, r])")
    p_build.add_argument("--thresholds", default="0:1:0.05", help="start:stop:step")
    p_build.add_argument("--train-fraction", type=float, default=0.7)
    p_build.add_argument("--l2", type=float, default=1e-4)
    p_build.add_argument("--max-iterations", type=int, default=5000)
    p_build.add_argument("--tolerance", type=float, default=1e-6)
    p_build.add_argument("--eval-scope", choices=("full", "test"), default="full")
    p_build.add_argument("--workers", type=int, default=1)
    p_build.add_argument("--stamp", action="store_true", help="record wall-clock build time (breaks byte-reproducibility)")
    p_build.add_argument("--out", required=True)

    p_serve = sub.add_parser("serve", help="host an artifact for the explorer UI")
    p_serve.add_argument("--artifact", required=True)
    p_serve.add_argument("--selections", default="selections.log", help="selection log path")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--ui", help="directory of built UI assets to serve at /")

    p_sel = sub.add_parser("selections", help="selection-log utilities")
    sel_sub = p_sel.add_subparsers(dest="selections_command", required=True)
    p_sum = sel_sub.add_parser("summarize", help="per-model and per-threshold selection counts")
    p_sum.add_argument("--log", required=True)

    return parser


def _cmd_ingest(args: argparse.Namespace) -> int:
    data = Path(args.input).read_bytes()
    parsed = parse_raw(data)
    filtered = filter_records(parsed.records)
    provenance = {
        "source": Path(args.input).name,
        "source_sha256": sha256_hex(data),
        "rows_parsed": len(parsed.records),
        "rows_rejected": len(parsed.rejects),
        "removed": filtered.removed,
        "rows_kept": len(filtered.records),
    }
    Path(args.out).write_bytes(export_records(filtered.records, provenance))
    if args.rejects:
        with open(args.rejects, "w", encoding="utf-8") as fh:
            for reject in parsed.rejects:
                fh.write(json.dumps({"line": reject.line, "reason": reject.reason}) + "\n")
    removed = ", ".join(f"{k}={v}" for k, v in filtered.removed.items())
    print(
        f"parsed={len(parsed.records)} rejected={len(parsed.rejects)} "
        f"kept={len(filtered.records)} removed: {removed}"
    )
    print(f"wrote {args.out}")
    return 0


def _cmd_build(args: argparse.Namespace) -> int:
    records, _provenance = load_records(Path(args.dataset).read_bytes())
    dataset = build_balanced(records, args.attribute, args.per_group_n, args.seed)
    thresholds = parse_threshold_spec(args.thresholds)
    built_at = (
        datetime.datetime.now(datetime.timezone.utc).isoformat() if args.stamp else None
    )
    artifact = build_family(
        dataset,
        thresholds,
        GridConfig(levels=args.grid_k, span=args.grid_range),
        TrainConfig(
            l2_lambda=args.l2,
            max_iterations=args.max_iterations,
            gradient_tolerance=args.tolerance,
        ),
        train_fraction=args.train_fraction,
        eval_scope=args.eval_scope,
        workers=args.workers,
        built_at=built_at,
        dataset_provenance={"source_sha256": _provenance.get("source_sha256")},
    )
    Path(args.out).write_bytes(export_artifact(artifact))
    meta = artifact.metadata
    print(
        f"attribute={meta['attribute']} models={len(artifact.models)} "
        f"thresholds={len(meta['thresholds'])} test_accuracy={meta['test_accuracy']:.4f}"
    )
    print(f"wrote {args.out}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    artifact = load_artifact(Path(args.artifact).read_bytes())
    app = create_app(artifact, args.selections, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _cmd_summarize(args: argparse.Namespace) -> int:
    selections = read_selections(args.log)
    by_model = Counter(r.model_id for r in selections)
    by_threshold = Counter(r.threshold for r in selections)
    print(f"selections: {len(selections)}")
    print("by model:")
    for model_id, count in sorted(by_model.items(), key=lambda kv: (-kv[1], kv[0])):
        print(f"  {model_id}  {count}")
    print("by threshold:")
    for threshold, count in sorted(by_threshold.items(), key=lambda kv: (-kv[1], kv[0])):
        print(f"  {threshold:g}  {count}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "ingest":
            return _cmd_ingest(args)
        if args.command == "build":
            return _cmd_build(args)
        if args.command == "serve":
            return _cmd_serve(args)
        if args.command == "selections":
            return _cmd_summarize(args)
    except FileNotFoundError as exc:
        print(f"error: no such file: {exc.filename}", file=sys.stderr)
        return 1
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError("unreachable")


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
