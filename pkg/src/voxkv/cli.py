"""Command-line harness: trace generation, simulation, analysis, sweeps and
the bundled report.

Exit codes: 0 success, 2 usage/config problems (including malformed traces
and artifact/config hash mismatches), 3 resource exhaustion.  Every command
is deterministic given (config, seed) and records the config hash in its
outputs; commands that consume earlier artifacts refuse hash mismatches.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import analysis, plots
from .cachesim import run_trace
from .config import (build_camera, build_cost, build_hierarchy_from, build_scene,
                     build_store, build_trajectory, build_world, config_hash,
                     load_config, resolve_config, trace_config_hash)
from .errors import CapacityError, ConfigError
from .mapper import read_trace, run_mapping, write_depth_frame

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RESOURCE = 3


def _write_json(path, doc) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _resolved(args) -> dict:
    raw = load_config(args.config) if args.config else {}
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    if getattr(args, "seed", None) is not None:
        raw = {**raw, "seed": args.seed}
    if getattr(args, "profile", None):
        cache = dict(raw.get("cache", {}))
        cache["profile"] = args.profile
        raw = {**raw, "cache": cache}
    return resolve_config(raw)


def _check_hash(out: Path, cfg: dict) -> str:
    """Verify earlier artifacts in ``out`` were produced by this config.

    Only the trace-determining sections are compared, so cache profile and
    cost settings may vary when replaying an existing trace.
    """
    meta_path = out / "store_stats.json"
    if not meta_path.exists():
        raise ConfigError(f"missing input {meta_path}; run gen-trace first")
    with open(meta_path) as fh:
        meta = json.load(fh)
    if meta.get("trace_config_hash") != trace_config_hash(cfg):
        raise ConfigError("config hash mismatch: artifacts in the output directory "
                          "were generated from a different configuration")
    return config_hash(cfg)


def cmd_gen_trace(args) -> int:
    cfg = _resolved(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    world = build_world(cfg)
    scene = build_scene(cfg)
    intr, max_range = build_camera(cfg)
    poses = build_trajectory(cfg)
    store = build_store(cfg, world.block_side)

    frame_sink = None
    if cfg["dump_depth_frames"]:
        frames_dir = out / "frames"
        frames_dir.mkdir(exist_ok=True)
        frame_sink = lambda i, frame: write_depth_frame(
            frames_dir / f"frame_{i:04d}.dpf", frame)

    trace, ustats = run_mapping(scene, poses, intr, store, world,
                                mode=cfg["integrator"]["mode"], max_range=max_range,
                                weight_max=cfg["integrator"]["weight_max"],
                                frame_sink=frame_sink)
    trace.write_csv(out / "trace.csv")
    _write_json(out / "store_stats.json", {
        "config_hash": config_hash(cfg),
        "trace_config_hash": trace_config_hash(cfg),
        "seed": cfg["seed"],
        "store_kind": store.kind,
        "stats": store.stats.as_dict(),
        "footprint": store.footprint_report(),
        "update_stats": ustats.as_dict(),
    })
    print(f"gen-trace: {len(trace)} events over {ustats.frames} frames, "
          f"{ustats.distinct_blocks} distinct blocks -> {out / 'trace.csv'}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _resolved(args)
    out = Path(args.out)
    h = _check_hash(out, cfg)
    with open(out / "store_stats.json") as fh:
        store_meta = json.load(fh)
    trace = read_trace(out / "trace.csv")
    hierarchy = build_hierarchy_from(cfg)
    cost = build_cost(cfg)

    class _Probe:
        avg_probe_steps = store_meta["stats"]["avg_probe_steps"]

    stats, report = run_trace(trace, hierarchy, cost, _Probe())
    stats["config_hash"] = h
    stats["profile"] = cfg["cache"]["profile"]
    report["config_hash"] = h
    _write_json(out / "sim_stats.json", stats)
    _write_json(out / "cost_report.json", report)
    print(f"simulate: {report['accesses']} accesses, hit rate "
          f"{report['hit_rate']:.4f}, access speedup {report['access_speedup']:.2f}x, "
          f"overall {report['overall_speedup']:.2f}x")
    return EXIT_OK


def cmd_analyze(args) -> int:
    cfg = _resolved(args)
    out = Path(args.out)
    h = _check_hash(out, cfg)
    trace = read_trace(out / "trace.csv")
    adir = out / "analysis"
    adir.mkdir(exist_ok=True)

    hist = analysis.reuse_gap_histogram(trace, cfg["analyze"]["gap_bucket_max_exp"])
    analysis.write_gap_histogram_csv(adir / "gap_histogram.csv", hist)
    rows = analysis.distinct_blocks(trace, group_by_frame=True)
    analysis.write_distinct_csv(adir / "distinct_blocks.csv", rows)
    curve = analysis.hit_rate_curve(trace, cfg["analyze"]["fa_capacities"])
    analysis.write_hit_rate_csv(adir / "hit_rate_curve.csv", curve)

    gaps_le_150 = sum(1 for g in analysis.iter_gaps(trace) if g <= 150)
    _write_json(adir / "analysis_summary.json", {
        "config_hash": h,
        "accesses": hist.accesses,
        "distinct_blocks": hist.distinct_keys,
        "gaps_total": hist.total_gaps,
        "gaps_le_150": gaps_le_150,
        "gaps_le_150_fraction": gaps_le_150 / hist.total_gaps if hist.total_gaps else 0.0,
        "per_frame_distinct": rows,
    })
    print(f"analyze: {hist.accesses} accesses, {hist.distinct_keys} distinct blocks, "
          f"{gaps_le_150}/{hist.total_gaps} gaps within 150 accesses")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _resolved(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = analysis.resolution_sweep(cfg)
    analysis.write_sweep_csv(out / "sweep.csv", rows)
    _write_json(out / "sweep_meta.json", {
        "config_hash": config_hash(cfg),
        "rows": rows,
    })
    for r in rows:
        print(f"sweep: voxel {r['voxel_size']:g} m -> {r['updates']} voxels updated, "
              f"{r['accesses']} accesses, hit rate {r['hit_rate']:.4f}")
    return EXIT_OK


def cmd_report(args) -> int:
    cfg = _resolved(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rc = cmd_gen_trace(args)
    if rc:
        return rc
    rc = cmd_simulate(args)
    if rc:
        return rc
    rc = cmd_analyze(args)
    if rc:
        return rc
    rc = cmd_sweep(args)
    if rc:
        return rc

    fp_rows = analysis.footprint_report(
        ["hash", "flat_hta"], cfg["report"]["footprint_entries"],
        cfg["report"]["footprint_load_factors"], cfg["world"]["block_side"])
    analysis.write_footprint_csv(out / "footprint.csv", fp_rows)
    from .stores import (BUCKET_HEAD_BYTES, BYTES_PER_VOXEL, CHAIN_NODE_BYTES,
                         OCTREE_NODE_BYTES)
    _write_json(out / "footprint_model.json", {
        "constants": {
            "bytes_per_voxel": BYTES_PER_VOXEL,
            "bucket_head_bytes": BUCKET_HEAD_BYTES,
            "chain_node_bytes": CHAIN_NODE_BYTES,
            "octree_node_bytes": OCTREE_NODE_BYTES,
        },
        "formulas": {
            "hash": "bucket_count*bucket_head_bytes + entries*chain_node_bytes"
                    " + entries*block_side^3*bytes_per_voxel",
            "flat_hta": "bucket_count*line_bytes"
                        " + entries*block_side^3*bytes_per_voxel",
            "octree": "internal_nodes*octree_node_bytes"
                      " + entries*block_side^3*bytes_per_voxel",
        },
    })

    with open(out / "cost_report.json") as fh:
        cost_report = json.load(fh)
    trace = read_trace(out / "trace.csv")
    hist = analysis.reuse_gap_histogram(trace, cfg["analyze"]["gap_bucket_max_exp"])
    distinct_rows = analysis.distinct_blocks(trace, group_by_frame=True)
    curve = analysis.hit_rate_curve(trace, cfg["analyze"]["fa_capacities"])
    with open(out / "sweep_meta.json") as fh:
        sweep_rows = json.load(fh)["rows"]

    figures = out / "figures"
    figures.mkdir(exist_ok=True)
    plots.plot_gap_histogram(hist, figures / "gap_histogram.png")
    plots.plot_distinct_blocks(distinct_rows, figures / "distinct_blocks.png")
    plots.plot_hit_rate_curve(curve, cost_report["hit_rate"], figures / "hit_rate_curve.png")
    plots.plot_sweep(sweep_rows, figures / "resolution_sweep.png")
    plots.plot_footprint(fp_rows, figures / "footprint.png")

    outputs = []
    for path in sorted(out.rglob("*")):
        if path.is_dir() or path.name == "manifest.json":
            continue
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        outputs.append({"path": str(path.relative_to(out)),
                        "sha256": digest,
                        "bytes": path.stat().st_size})
    _write_json(out / "manifest.json", {
        "config_hash": config_hash(cfg),
        "trace_config_hash": trace_config_hash(cfg),
        "seed": cfg["seed"],
        "inputs": {"config": args.config or "defaults", "resolved": cfg},
        "outputs": outputs,
    })
    print(f"report: {len(outputs)} artifacts bundled under {out}")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="voxkv",
        description="Voxel-block mapping workbench and reserved-way cache simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON run configuration (defaults when omitted)")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, help="override the configured seed")
        p.add_argument("--profile", help="override the cache profile name")
        p.set_defaults(func=func)
        return p

    add("gen-trace", cmd_gen_trace,
        "render frames along the trajectory, integrate them, write the access trace")
    add("simulate", cmd_simulate,
        "replay an access trace through the reserved-way cache hierarchy")
    add("analyze", cmd_analyze,
        "reuse gaps, distinct blocks and hit-rate curves from a trace")
    add("sweep", cmd_sweep,
        "run the mapper and simulator across the configured voxel sizes")
    add("report", cmd_report,
        "full pipeline into one directory with figures and a manifest")
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
