"""Command-line entry point: one subcommand per pipeline stage.

Stages exchange files only.  Every stage writes into ``<out-dir>/<stage>/``
via temp file + rename, embeds the config hash in each output and records
input and output hashes in ``<out-dir>/manifest.json``.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import logging
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import pandas as pd

from . import __version__
from .config import PipelineConfig
from .dbcv import LabeledPointSet, dbcv_score, proportional_sample, read_labels, read_points
from .egonet import EgoNetworkSnapshot, snapshot_rows
from .errors import ConfigError, DataError, EgoShiftError, MissingStageError
from .ingest import (
    apply_topic_sidecar,
    build_text_corpus,
    parse_interactions,
    read_store,
    read_topic_sidecar,
    records_to_frame,
    with_periods,
    write_store,
)
from .pipeline import (
    METRICS,
    active_tie_table,
    compute_cohort,
    compute_frequencies,
    compute_polarity,
    compute_snapshots,
    compute_topics,
    interval_tables,
    metric_series,
    run_stats,
)
from .synth import generate_cohort

log = logging.getLogger("egoshift")

STAGES = ("synth", "ingest", "cohort", "egonet", "signed", "topics", "stats", "dbcv", "report")
PIPELINE = ("synth", "ingest", "cohort", "egonet", "signed", "topics", "stats", "report")

# files each stage must leave behind for its consumers
PRODUCTS = {
    "synth": ("records.jsonl", "ground_truth.json"),
    "ingest": ("records.jsonl", "ingest_report.json"),
    "cohort": ("cohort.csv", "filter_report.json"),
    "egonet": ("sizes.csv", "active_ties.csv"),
    "signed": ("polarity.csv", "signed_ties.csv"),
    "topics": ("topics.csv",),
    "stats": ("tests.csv", "period_means.csv", "growth_differences.csv", "exclusions.json"),
    "report": ("index.json",),
}


# --------------------------------------------------------------------------
# file plumbing


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def atomic_write(path: Path, writer: Callable[[io.TextIOBase], None]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            writer(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: Path, obj: dict) -> None:
    atomic_write(path, lambda fh: fh.write(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False, default=_json_default) + "\n"))


def _json_default(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    raise TypeError(f"not JSON serialisable: {type(v)}")


def _clean(obj):
    """Replace non-finite floats with None so JSON stays strict."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)) and not math.isfinite(obj):
        return None
    return obj


def write_csv(path: Path, table: pd.DataFrame, config_hash: str) -> None:
    def writer(fh):
        fh.write(f"# config_hash: {config_hash}\n")
        table.to_csv(fh, index=False, float_format="%.10g", lineterminator="\n")

    atomic_write(path, writer)


def read_csv(path: Path, **kw) -> pd.DataFrame:
    return pd.read_csv(path, comment="#", **kw)


def embedded_hash(path: Path) -> Optional[str]:
    """Config hash stamped into a stage output (first-line comment or JSON key)."""
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
    if first.startswith("# config_hash:"):
        return first.split(":", 1)[1].strip()
    if path.suffix == ".json":
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh).get("config_hash")
    return None


# --------------------------------------------------------------------------
# stage context


@dataclass
class Context:
    cfg: PipelineConfig
    out_dir: Path
    jobs: int = 1

    @property
    def config_hash(self) -> str:
        return self.cfg.config_hash()

    def stage_dir(self, stage: str) -> Path:
        return self.out_dir / stage

    def require(self, stage: str) -> Path:
        """Directory of an upstream stage, checked for completeness and config match."""
        d = self.stage_dir(stage)
        for name in PRODUCTS[stage]:
            p = d / name
            if not p.exists():
                raise MissingStageError(stage, p)
            stamp = embedded_hash(p)
            if stamp is not None and stamp != self.config_hash:
                raise MissingStageError(stage, f"{p}, produced under config {stamp[:12]}; rerun it")
        return d

    def record(self, stage: str, inputs: list[Path], outputs: list[Path]) -> None:
        manifest_path = self.out_dir / "manifest.json"
        manifest = {"stages": {}}
        if manifest_path.exists():
            try:
                manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
            except ValueError:
                log.warning("manifest unreadable; starting a new one")
        manifest["config_hash"] = self.config_hash
        manifest["config"] = self.cfg.to_dict()
        manifest["version"] = __version__

        def rel(p: Path) -> str:
            try:
                return str(p.resolve().relative_to(self.out_dir.resolve()))
            except ValueError:
                return str(p)

        manifest.setdefault("stages", {})[stage] = {
            "inputs": {rel(p): sha256_file(p) for p in sorted(inputs)},
            "outputs": {rel(p): sha256_file(p) for p in sorted(outputs)},
        }
        manifest["stages"] = dict(sorted(manifest["stages"].items()))
        write_json(manifest_path, _clean(manifest))


def _store_writer(frame: pd.DataFrame, config_hash: str):
    def writer(fh):
        fh.write(f"# config_hash: {config_hash}\n")
        write_store(frame, fh)

    return writer


# --------------------------------------------------------------------------
# stages


def stage_synth(ctx: Context, args) -> None:
    frame, truth = generate_cohort(ctx.cfg.synth, ctx.cfg.period_schedule)
    d = ctx.stage_dir("synth")
    store, gt = d / "records.jsonl", d / "ground_truth.json"
    atomic_write(store, _store_writer(frame, ctx.config_hash))
    write_json(gt, {"config_hash": ctx.config_hash, **truth.to_dict()})
    ctx.record("synth", [], [store, gt])
    log.info("synth: %d records for %d egos", len(frame), ctx.cfg.synth.n_users)


def stage_ingest(ctx: Context, args) -> None:
    src = Path(args.input) if getattr(args, "input", None) else ctx.require("synth") / "records.jsonl"
    if not src.exists():
        raise DataError(f"input not found: {src}")
    schedule = ctx.cfg.period_schedule
    records, stats = parse_interactions(src, schedule)
    frame = records_to_frame(records)
    inputs = [src]
    if getattr(args, "topics", None):
        sidecar = Path(args.topics)
        frame = apply_topic_sidecar(frame, read_topic_sidecar(sidecar))
        inputs.append(sidecar)
    d = ctx.stage_dir("ingest")
    store, rep = d / "records.jsonl", d / "ingest_report.json"
    atomic_write(store, _store_writer(frame, ctx.config_hash))
    outputs = [store, rep]
    report = {"config_hash": ctx.config_hash, "records": stats.to_dict()}
    if frame["text"].notna().any():
        entries, cstats = build_text_corpus(records, schedule)
        corpus = d / "corpus.jsonl"

        def write_corpus(fh):
            fh.write(f"# config_hash: {ctx.config_hash}\n")
            for e in entries:
                fh.write(json.dumps({"ego_id": e.ego_id, "period": e.period, "text": e.text}, ensure_ascii=False) + "\n")

        atomic_write(corpus, write_corpus)
        report["corpus"] = cstats.to_dict()
        outputs.append(corpus)
    write_json(rep, report)
    ctx.record("ingest", inputs, outputs)
    log.info("ingest: %d records kept, %d malformed", stats.retained, stats.malformed)


def _load_ingested(ctx: Context) -> tuple[pd.DataFrame, Path]:
    store = ctx.require("ingest") / "records.jsonl"
    return with_periods(read_store(store), ctx.cfg.period_schedule), store


def _load_cohort(ctx: Context) -> tuple[list[str], Path]:
    path = ctx.require("cohort") / "cohort.csv"
    users = read_csv(path, dtype={"ego": str})["ego"].tolist()
    return sorted(users), path


def stage_cohort(ctx: Context, args) -> None:
    frame, store = _load_ingested(ctx)
    users, report = compute_cohort(frame, ctx.cfg)
    d = ctx.stage_dir("cohort")
    cpath, rpath = d / "cohort.csv", d / "filter_report.json"
    write_csv(cpath, pd.DataFrame({"ego": users}), ctx.config_hash)
    write_json(rpath, _clean({"config_hash": ctx.config_hash, **report.to_dict()}))
    ctx.record("cohort", [store], [cpath, rpath])
    log.info("cohort: %d users", len(users))


def _snapshot_chunk(payload):
    freq, users, cfg = payload
    return compute_snapshots(freq, users, cfg)


def _snapshot_json(s: EgoNetworkSnapshot) -> dict:
    return {
        "ego": s.ego_id,
        "rings": [sorted(r) for r in s.rings],
        "ring_means": s.ring_means,
        "circle_sizes": [len(c) for c in s.circles],
        "active_size": s.active_size,
        "bandwidth": s.bandwidth,
    }


def stage_egonet(ctx: Context, args) -> None:
    frame, store = _load_ingested(ctx)
    users, cpath = _load_cohort(ctx)
    cfg = ctx.cfg
    freq = compute_frequencies(frame, cfg, users)
    if ctx.jobs > 1 and len(users) > 1:
        chunks = [users[i :: ctx.jobs] for i in range(ctx.jobs)]
        payloads = [(freq[freq["ego_id"].isin(set(c))], c, cfg) for c in chunks if c]
        snaps = {}
        with ProcessPoolExecutor(max_workers=ctx.jobs) as pool:
            for part in pool.map(_snapshot_chunk, payloads):
                snaps.update(part)
    else:
        snaps = compute_snapshots(freq, users, cfg)
    snaps = dict(sorted(snaps.items()))
    d = ctx.stage_dir("egonet")
    sizes_path, ties_path = d / "sizes.csv", d / "active_ties.csv"
    write_csv(sizes_path, snapshot_rows(snaps.values()), ctx.config_hash)
    write_csv(ties_path, active_tie_table(freq, cfg), ctx.config_hash)
    outputs = [sizes_path, ties_path]
    for p in cfg.period_schedule:
        path = d / f"snapshots_I{p.index}.json"
        items = [_snapshot_json(s) for (ego, k), s in snaps.items() if k == p.index]
        write_json(path, _clean({"config_hash": ctx.config_hash, "period": p.index, "label": p.label, "snapshots": items}))
        outputs.append(path)
    ctx.record("egonet", [store, cpath], outputs)
    log.info("egonet: %d snapshots", len(snaps))


def stage_signed(ctx: Context, args) -> None:
    frame, store = _load_ingested(ctx)
    ties_path = ctx.require("egonet") / "active_ties.csv"
    active = read_csv(ties_path, dtype={"ego_id": str, "alter_id": str})
    signed, pct, excluded = compute_polarity(frame, active, ctx.cfg)
    d = ctx.stage_dir("signed")
    s_path, p_path, e_path = d / "signed_ties.csv", d / "polarity.csv", d / "excluded_ties.csv"
    write_csv(s_path, signed, ctx.config_hash)
    write_csv(p_path, pct, ctx.config_hash)
    write_csv(e_path, excluded[["ego_id", "period", "alter_id"]], ctx.config_hash)
    ctx.record("signed", [store, ties_path], [s_path, p_path, e_path])
    log.info("signed: %d ties, %d without labels", len(signed), len(excluded))


def stage_topics(ctx: Context, args) -> None:
    frame, store = _load_ingested(ctx)
    users, cpath = _load_cohort(ctx)
    table = compute_topics(frame, users)
    path = ctx.stage_dir("topics") / "topics.csv"
    write_csv(path, table, ctx.config_hash)
    ctx.record("topics", [store, cpath], [path])


def stage_stats(ctx: Context, args) -> None:
    sizes_path = ctx.require("egonet") / "sizes.csv"
    pol_path = ctx.require("signed") / "polarity.csv"
    top_path = ctx.require("topics") / "topics.csv"
    users, cpath = _load_cohort(ctx)
    sizes = read_csv(sizes_path, dtype={"ego": str, "circle_sizes": str})
    pol = read_csv(pol_path, dtype={"ego": str})
    topics = read_csv(top_path, dtype={"ego": str})
    n_periods = len(ctx.cfg.period_schedule)
    series = metric_series(users, n_periods, sizes, pol, topics)
    report = run_stats(series, ctx.cfg)
    means, diffs = interval_tables(series, ctx.cfg.stats.ci_level)
    d = ctx.stage_dir("stats")
    paths = {name: d / name for name in ("tests.csv", "tests.json", "period_means.csv", "growth_differences.csv", "exclusions.json")}
    write_csv(paths["tests.csv"], report.table(), ctx.config_hash)
    write_json(paths["tests.json"], _clean({"config_hash": ctx.config_hash, "tests": [r.to_dict() for r in report.rows]}))
    write_csv(paths["period_means.csv"], means, ctx.config_hash)
    write_csv(paths["growth_differences.csv"], diffs, ctx.config_hash)
    excl = {m: {k: {str(i): n for i, n in v.items()} for k, v in e.items()} for m, e in report.exclusions.items()}
    write_json(paths["exclusions.json"], {"config_hash": ctx.config_hash, "cohort_size": len(users), "exclusions": excl})
    ctx.record("stats", [cpath, sizes_path, pol_path, top_path], list(paths.values()))
    n_rej = len(report.rejections())
    log.info("stats: %d tests, %d rejected", len(report.rows), n_rej)


# table layouts of the report bundle: (file stem, metrics)
REPORT_TABLES = (
    ("table_active_size", ("active_size",)),
    ("table_rings", ("n_rings",)),
    ("table_polarity", ("pct_negative", "pct_positive")),
    ("table_topics", ("unique_topics",)),
)


def stage_report(ctx: Context, args) -> None:
    d_stats = ctx.require("stats")
    tests = read_csv(d_stats / "tests.csv")
    means = read_csv(d_stats / "period_means.csv")
    diffs = read_csv(d_stats / "growth_differences.csv")
    d = ctx.stage_dir("report")
    outputs = []
    for stem, metrics in REPORT_TABLES:
        path = d / f"{stem}.csv"
        write_csv(path, tests[tests["metric"].isin(metrics)].reset_index(drop=True), ctx.config_hash)
        outputs.append(path)
    for metric in METRICS:
        for kind, table in (("means", means), ("growth_differences", diffs)):
            path = d / f"figure_{metric}_{kind}.csv"
            write_csv(path, table[table["metric"] == metric].drop(columns="metric").reset_index(drop=True), ctx.config_hash)
            outputs.append(path)
    rejected = tests.melt(
        id_vars=["metric", "periods"], value_vars=["h0_minus_outcome", "h0_plus_outcome"], var_name="hypothesis", value_name="outcome"
    )
    rejected = rejected[rejected["outcome"] == "REJECTED"]
    with open(d_stats / "exclusions.json", encoding="utf-8") as fh:
        excl = json.load(fh)
    index = {
        "config_hash": ctx.config_hash,
        "cohort_size": excl["cohort_size"],
        "exclusions": excl["exclusions"],
        "files": sorted(p.name for p in outputs),
        "rejections": [
            {"metric": m, "periods": p, "hypothesis": h.replace("_outcome", "")}
            for m, p, h in zip(rejected["metric"], rejected["periods"], rejected["hypothesis"])
        ],
    }
    ipath = d / "index.json"
    write_json(ipath, index)
    ctx.record("report", [d_stats / n for n in PRODUCTS["stats"]], outputs + [ipath])


def stage_dbcv(ctx: Context, args) -> None:
    if not args.points or not args.labels:
        raise ConfigError("dbcv needs --points and --labels")
    pts_path, lab_path = Path(args.points), Path(args.labels)
    try:
        data = LabeledPointSet(read_points(pts_path), read_labels(lab_path))
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot load points/labels: {exc}") from exc
    sample = args.sample if args.sample is not None else ctx.cfg.dbcv.sample
    metric = args.metric or ctx.cfg.dbcv.metric
    seed = ctx.cfg.seed
    scored = data
    if sample is not None and sample < data.n:
        try:
            scored = proportional_sample(data, sample, seed)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    try:
        score = dbcv_score(scored, metric=metric)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    path = ctx.stage_dir("dbcv") / "dbcv.json"
    write_json(path, _clean({"config_hash": ctx.config_hash, "n_points": data.n, "n_scored": scored.n, "sample_seed": seed, "metric": metric, **score.to_dict()}))
    ctx.record("dbcv", [pts_path, lab_path], [path])
    print(f"DBCV {score.overall:.6f} over {scored.n} points")


HANDLERS = {
    "synth": stage_synth,
    "ingest": stage_ingest,
    "cohort": stage_cohort,
    "egonet": stage_egonet,
    "signed": stage_signed,
    "topics": stage_topics,
    "stats": stage_stats,
    "dbcv": stage_dbcv,
    "report": stage_report,
}


def run_stage(name: str, ctx: Context, args=None) -> None:
    if name not in HANDLERS:
        raise ConfigError(f"unknown stage {name!r}")
    HANDLERS[name](ctx, args or argparse.Namespace())


# --------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML or JSON configuration file")
    common.add_argument("--jobs", type=int, default=None, help="worker processes for per-ego work")
    common.add_argument("--seed", type=int, default=None, help="override the config seed (also seeds synth)")
    common.add_argument("--out-dir", default=None, help="output root (default: ./egoshift-out)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="egoshift", description="Longitudinal ego-network analysis pipeline.", parents=[common])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="stage", required=True)
    for name in STAGES:
        p = sub.add_parser(name, parents=[common], help=f"run the {name} stage")
        if name == "ingest":
            p.add_argument("--input", help="interaction log (jsonl or csv); default: synth output")
            p.add_argument("--topics", help="CSV sidecar with columns id,topic")
        if name == "dbcv":
            p.add_argument("--points", help="points file (.csv, or packed binary)")
            p.add_argument("--labels", help="labels file, one integer per line (-1 = noise)")
            p.add_argument("--sample", type=int, default=None, help="proportional sample size")
            p.add_argument("--metric", default=None, help="distance metric (default euclidean)")
    sub.add_parser("pipeline", parents=[common], help="run " + " -> ".join(PIPELINE))
    return parser


def _merge(ns: argparse.Namespace, top: dict) -> None:
    # subcommand values win; fall back to the ones given before the subcommand
    for key, val in top.items():
        if getattr(ns, key, None) is None:
            setattr(ns, key, val)


def make_context(args) -> Context:
    cfg = PipelineConfig.load(args.config) if args.config else PipelineConfig.from_dict({})
    if args.seed is not None:
        cfg.seed = int(args.seed)
        cfg.synth.seed = int(args.seed)
    jobs = args.jobs if args.jobs is not None else 1
    if jobs < 1:
        raise ConfigError("--jobs must be at least 1")
    out = Path(args.out_dir or "egoshift-out")
    return Context(cfg.validate(), out, jobs)


def main(argv=None) -> int:
    parser = build_parser()
    top_keys = ("config", "jobs", "seed", "out_dir")
    raw = list(sys.argv[1:] if argv is None else argv)
    # parse once to learn values placed before the subcommand
    pre, _ = build_parser_pre().parse_known_args(raw)
    args = parser.parse_args(raw)
    _merge(args, {k: getattr(pre, k) for k in top_keys})
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        ctx = make_context(args)
        stages = PIPELINE if args.stage == "pipeline" else (args.stage,)
        for name in stages:
            run_stage(name, ctx, args)
    except EgoShiftError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


def build_parser_pre() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config")
    p.add_argument("--jobs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir")
    return p


if __name__ == "__main__":
    sys.exit(main())
