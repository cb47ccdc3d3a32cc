"""Trace and statistics analyses: reuse gaps, distinct-block counts,
hit-rate curves, resolution sweeps and footprint models.

All functions are pure: re-running over the same inputs yields identical
rows and identical CSV bytes.  "Accesses" means lookup and insert events;
remove events occupy sequence positions but are not accesses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .cachesim import CostModelConfig, FullyAssociativeBuffer, build_hierarchy, run_trace
from .errors import ConfigError
from .grid import WorldConfig
from .mapper import Trace, run_mapping
from .stores import BYTES_PER_VOXEL, BUCKET_HEAD_BYTES, CHAIN_NODE_BYTES

GAP_BUCKET_MAX_EXP = 20


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _write_csv(path, header: str, rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


# ---------------------------------------------------------------------------
# Reuse gaps
# ---------------------------------------------------------------------------

def iter_gaps(trace: Trace):
    """Sequence-index deltas between consecutive accesses to the same key."""
    last: dict = {}
    for seq, op, _, key in trace.events:
        if op == "R":
            continue
        prev = last.get(key)
        if prev is not None:
            yield seq - prev
        last[key] = seq


@dataclass
class GapHistogram:
    """Power-of-two gap buckets [2^i, 2^(i+1)) plus an overflow bucket.

    Total bucket mass equals accesses minus distinct keys: every access to
    a key after its first contributes exactly one gap.
    """

    edges: list            # (lo, hi) per bucket; hi of the last is inf
    counts: list
    accesses: int
    distinct_keys: int

    @property
    def total_gaps(self) -> int:
        return sum(self.counts)

    def rows(self):
        return [(lo, hi, c) for (lo, hi), c in zip(self.edges, self.counts)]


def reuse_gap_histogram(trace: Trace, max_exp: int = GAP_BUCKET_MAX_EXP) -> GapHistogram:
    if max_exp < 1:
        raise ConfigError("max_exp must be >= 1")
    edges = [(1 << i, 1 << (i + 1)) for i in range(max_exp)]
    edges.append((1 << max_exp, math.inf))
    counts = [0] * (max_exp + 1)
    accesses = 0
    keys: set = set()
    last: dict = {}
    for seq, op, _, key in trace.events:
        if op == "R":
            continue
        accesses += 1
        keys.add(key)
        prev = last.get(key)
        if prev is not None:
            gap = seq - prev
            idx = min(gap.bit_length() - 1, max_exp)
            counts[idx] += 1
        last[key] = seq
    return GapHistogram(edges, counts, accesses, len(keys))


def write_gap_histogram_csv(path, hist: GapHistogram) -> None:
    _write_csv(path, "gap_bucket_lo,gap_bucket_hi,count", hist.rows())


# ---------------------------------------------------------------------------
# Distinct blocks
# ---------------------------------------------------------------------------

def distinct_blocks(trace: Trace, group_by_frame: bool = True):
    """Distinct keys accessed, either per frame or over the whole trace."""
    if not group_by_frame:
        return len({key for _, op, _, key in trace.events if op != "R"})
    per_frame: dict[int, set] = {}
    for _, op, frame, key in trace.events:
        if op == "R":
            continue
        per_frame.setdefault(frame, set()).add(key)
    return [(frame, len(keys)) for frame, keys in sorted(per_frame.items())]


def write_distinct_csv(path, rows) -> None:
    _write_csv(path, "frame,distinct_blocks", rows)


# ---------------------------------------------------------------------------
# Hit-rate curve
# ---------------------------------------------------------------------------

def hit_rate_curve(trace: Trace, capacities) -> list[tuple[int, float]]:
    """Fully-associative LRU hit rate per capacity; capacities ascending."""
    capacities = list(capacities)
    if not capacities:
        raise ConfigError("need at least one capacity")
    if any(b <= a for a, b in zip(capacities, capacities[1:])):
        raise ConfigError("capacities must be sorted strictly ascending")
    rows = []
    for cap in capacities:
        buf = FullyAssociativeBuffer(cap)
        hits = 0
        accesses = 0
        for _, op, _, key in trace.events:
            if op == "R":
                continue
            accesses += 1
            if buf.access(key):
                hits += 1
        rows.append((cap, hits / accesses if accesses else 0.0))
    return rows


def write_hit_rate_csv(path, rows) -> None:
    _write_csv(path, "capacity,hit_rate", rows)


# ---------------------------------------------------------------------------
# Resolution sweep
# ---------------------------------------------------------------------------

def resolution_sweep(config: dict, voxel_sizes=None) -> list[dict]:
    """Run the mapper and the cache simulator once per voxel size.

    ``config`` is a resolved run configuration; per row, ``updates`` counts
    distinct voxels written per frame (summed over frames), the quantity
    that scales with the inverse-cubed voxel size, while ``update_ops``
    carries the raw fusion-operation count.
    """
    from . import config as configmod

    sizes = list(voxel_sizes if voxel_sizes is not None else config["sweep"]["voxel_sizes"])
    if not sizes:
        raise ConfigError("need at least one voxel size")
    rows = []
    for size in sizes:
        world = WorldConfig(voxel_size=size,
                            block_side=config["world"]["block_side"],
                            truncation_dist=config["world"]["truncation_dist"],
                            clear_radius=config["world"]["clear_radius"])
        scene = configmod.build_scene(config)
        intr, max_range = configmod.build_camera(config)
        poses = configmod.build_trajectory(config)
        store = configmod.build_store(config, world.block_side)
        trace, ustats = run_mapping(scene, poses, intr, store, world,
                                    mode=config["integrator"]["mode"],
                                    max_range=max_range,
                                    weight_max=config["integrator"]["weight_max"])
        hierarchy = configmod.build_hierarchy_from(config)
        cost = configmod.build_cost(config)
        _, report = run_trace(trace, hierarchy, cost, store.stats)
        access_cycles = report["baseline_cycles"]
        update_cycles = ustats.updates * cost.c_update
        denom = access_cycles + update_cycles
        rows.append({
            "voxel_size": size,
            "accesses": ustats.block_accesses,
            "distinct": ustats.distinct_blocks,
            "updates": ustats.distinct_voxels,
            "update_ops": ustats.updates,
            "hit_rate": report["hit_rate"],
            "modeled_cycles": report["mechanism_cycles"],
            "baseline_cycles": report["baseline_cycles"],
            "access_fraction_modeled": access_cycles / denom if denom else 0.0,
            "access_speedup": report["access_speedup"],
        })
    return rows


def write_sweep_csv(path, rows) -> None:
    _write_csv(path, "voxel_size,accesses,distinct,updates,hit_rate,modeled_cycles",
               [(r["voxel_size"], r["accesses"], r["distinct"], r["updates"],
                 r["hit_rate"], r["modeled_cycles"]) for r in rows])


# ---------------------------------------------------------------------------
# Footprint model
# ---------------------------------------------------------------------------

def model_footprint(kind: str, entries: int, load_factor: float,
                    block_side: int = 8) -> dict:
    """Byte model for a store sized to hold ``entries`` at ``load_factor``.

    chained hash: buckets = entries/lf heads of 8 bytes plus one 28-byte
    node per entry.  flat_hta: pair slots = entries/lf packed 3 per 64-byte
    line.  Payload is entries * block_side^3 * 8 bytes either way.  The
    octree's footprint depends on key geometry, not load factor, and is
    reported from live instances instead.
    """
    if load_factor <= 0:
        raise ConfigError("load_factor must be positive")
    if entries < 0:
        raise ConfigError("entries must be >= 0")
    payload = entries * block_side ** 3 * BYTES_PER_VOXEL
    if kind == "hash":
        buckets = max(1, math.ceil(entries / load_factor))
        index = buckets * BUCKET_HEAD_BYTES + entries * CHAIN_NODE_BYTES
    elif kind == "flat_hta":
        slots = max(1, math.ceil(entries / load_factor))
        buckets = math.ceil(slots / 3)
        index = buckets * 64
    else:
        raise ConfigError(f"no load-factor footprint model for store kind {kind!r}")
    return {
        "store_kind": kind,
        "load_factor": load_factor,
        "entries": entries,
        "bucket_count": buckets,
        "model_bytes_index": index,
        "model_bytes_payload": payload,
    }


def footprint_report(kinds, entries: int, load_factors, block_side: int = 8) -> list[dict]:
    """Model footprints per store kind per load factor, with each kind's
    index bytes expressed as a ratio over the chained hash at the same
    load factor."""
    rows = []
    for lf in load_factors:
        base = model_footprint("hash", entries, lf, block_side)
        for kind in kinds:
            row = model_footprint(kind, entries, lf, block_side)
            row["ratio_vs_chained"] = row["model_bytes_index"] / base["model_bytes_index"]
            rows.append(row)
    return rows


def write_footprint_csv(path, rows) -> None:
    _write_csv(path, "store_kind,load_factor,entries,index_bytes,payload_bytes,ratio_vs_chained",
               [(r["store_kind"], r["load_factor"], r["entries"], r["model_bytes_index"],
                 r["model_bytes_payload"], r["ratio_vs_chained"]) for r in rows])
