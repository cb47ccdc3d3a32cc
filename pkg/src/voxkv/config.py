"""Run configuration: one JSON document, fully validated up front.

Unknown keys are rejected at every nesting level, every field has a
documented default, and the canonical (defaults-resolved, key-sorted)
serialization is hashed so artifacts can refuse mismatched reuse.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math

from .cachesim import CostModelConfig, KvCacheHierarchy, build_hierarchy
from .errors import ConfigError
from .grid import WorldConfig
from .mapper import CameraIntrinsics, make_trajectory
from .scene import Box, Plane, SceneSpec, Sphere
from .stores import make_store

DEFAULT_CONFIG = {
    "seed": 0,
    "world": {
        "voxel_size": 0.05,
        "block_side": 8,
        "truncation_dist": 0.15,
        "clear_radius": 0.15,
    },
    "scene": {
        # plane offset off the voxel lattice so band edges do not align with
        # center planes at round voxel sizes
        "primitives": [
            {"kind": "plane", "normal": [0.0, 0.0, 1.0], "offset": 0.013},
            {"kind": "sphere", "center": [0.0, 0.0, 0.35], "radius": 0.25},
        ],
        "domain_min": [-4.0, -4.0, -1.0],
        "domain_max": [4.0, 4.0, 4.0],
    },
    "camera": {
        "fx": 80.0, "fy": 80.0, "cx": 32.0, "cy": 24.0,
        "width": 64, "height": 48, "max_range": 10.0,
    },
    "trajectory": {
        "kind": "orbit",
        "center": [0.0, 0.0, 0.0],
        "radius": 0.4,
        "height": 3.0,
        "frames": 8,
        "start_angle_deg": 0.0,
    },
    "integrator": {"mode": "tsdf", "weight_max": 100.0},
    "store": {"kind": "hash", "bucket_count": 4096, "max_blocks": 500000},
    "cache": {"profile": "cpu-table5", "overrides": {}},
    "cost": {
        "c_hash": 30.0,
        "c_probe": 40.0,
        "insert_cost": 2.0,
        "access_fraction": 0.5,
        "level_energy": [1.0, 4.0],
        "store_probe_energy": 10.0,
        "store_hash_energy": 5.0,
        "c_update": 10.0,
    },
    "analyze": {
        "fa_capacities": [64, 128, 256, 512, 1024, 2048, 4096, 8192, 16384],
        "gap_bucket_max_exp": 20,
    },
    "sweep": {"voxel_sizes": [0.15, 0.10, 0.05]},
    "report": {
        "footprint_entries": 10000,
        "footprint_load_factors": [0.25, 0.5, 1.0, 2.0],
    },
    "dump_depth_frames": False,
}

_TRAJECTORY_DEFAULTS = {
    "orbit": DEFAULT_CONFIG["trajectory"],
    "line": {
        "kind": "line",
        "start": [0.0, 0.0, 2.0],
        "step": [0.2, 0.0, 0.0],
        "frames": 8,
    },
}

_STORE_DEFAULTS = {
    "hash": DEFAULT_CONFIG["store"],
    "octree": {"kind": "octree", "root_extent_blocks": 256, "max_blocks": 500000},
    "flat_hta": {"kind": "flat_hta", "bucket_count": 16384, "pairs_per_bucket": 3,
                 "max_blocks": 500000},
}

_PRIMITIVE_FIELDS = {
    "plane": {"normal", "offset"},
    "sphere": {"center", "radius"},
    "box": {"min_corner", "max_corner"},
}


def _merge(section: str, defaults: dict, user: dict) -> dict:
    if not isinstance(user, dict):
        raise ConfigError(f"section {section!r} must be an object")
    unknown = set(user) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in section {section!r}")
    out = copy.deepcopy(defaults)
    out.update(copy.deepcopy(user))
    return out


def _require_number(section: str, key: str, value, minimum=None):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{section}.{key} must be a finite number")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{section}.{key} must be >= {minimum}")


def load_config(path) -> dict:
    try:
        with open(path, "r") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc


def resolve_config(user: dict | None = None) -> dict:
    """Merge a user document over the defaults and validate everything."""
    user = user or {}
    if not isinstance(user, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = set(user) - set(DEFAULT_CONFIG)
    if unknown:
        raise ConfigError(f"unknown top-level config key(s) {sorted(unknown)}")

    cfg: dict = {}
    seed = user.get("seed", DEFAULT_CONFIG["seed"])
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    cfg["seed"] = seed

    cfg["world"] = _merge("world", DEFAULT_CONFIG["world"], user.get("world", {}))
    WorldConfig(**cfg["world"])  # raises on bad geometry

    scene = _merge("scene", DEFAULT_CONFIG["scene"], user.get("scene", {}))
    prims = scene["primitives"]
    if not isinstance(prims, list) or not prims:
        raise ConfigError("scene.primitives must be a non-empty list")
    for i, prim in enumerate(prims):
        if not isinstance(prim, dict) or "kind" not in prim:
            raise ConfigError(f"scene.primitives[{i}] must be an object with a 'kind'")
        kind = prim["kind"]
        if kind not in _PRIMITIVE_FIELDS:
            raise ConfigError(f"unknown primitive kind {kind!r}")
        unknown = set(prim) - _PRIMITIVE_FIELDS[kind] - {"kind"}
        if unknown:
            raise ConfigError(f"unknown key(s) {sorted(unknown)} in {kind} primitive")
        missing = _PRIMITIVE_FIELDS[kind] - set(prim)
        if missing:
            raise ConfigError(f"missing key(s) {sorted(missing)} in {kind} primitive")
    cfg["scene"] = scene
    build_scene({"scene": scene})  # raises on bad values

    cam = _merge("camera", DEFAULT_CONFIG["camera"], user.get("camera", {}))
    _require_number("camera", "max_range", cam["max_range"], minimum=0.0)
    cfg["camera"] = cam
    CameraIntrinsics(fx=cam["fx"], fy=cam["fy"], cx=cam["cx"], cy=cam["cy"],
                     width=cam["width"], height=cam["height"])

    traj_user = user.get("trajectory", {})
    if not isinstance(traj_user, dict):
        raise ConfigError("section 'trajectory' must be an object")
    kind = traj_user.get("kind", DEFAULT_CONFIG["trajectory"]["kind"])
    if kind not in _TRAJECTORY_DEFAULTS:
        raise ConfigError(f"unknown trajectory kind {kind!r}")
    traj = _merge("trajectory", _TRAJECTORY_DEFAULTS[kind], traj_user)
    if isinstance(traj["frames"], bool) or not isinstance(traj["frames"], int) or traj["frames"] < 1:
        raise ConfigError("trajectory.frames must be an integer >= 1")
    cfg["trajectory"] = traj
    build_trajectory({"trajectory": traj})

    integ = _merge("integrator", DEFAULT_CONFIG["integrator"], user.get("integrator", {}))
    if integ["mode"] not in ("tsdf", "esdf", "both"):
        raise ConfigError("integrator.mode must be tsdf, esdf or both")
    _require_number("integrator", "weight_max", integ["weight_max"], minimum=1.0)
    cfg["integrator"] = integ

    store_user = user.get("store", {})
    if not isinstance(store_user, dict):
        raise ConfigError("section 'store' must be an object")
    skind = store_user.get("kind", DEFAULT_CONFIG["store"]["kind"])
    if skind not in _STORE_DEFAULTS:
        raise ConfigError(f"unknown store kind {skind!r}")
    cfg["store"] = _merge("store", _STORE_DEFAULTS[skind], store_user)
    build_store(cfg, cfg["world"]["block_side"])  # raises on bad parameters

    cache = _merge("cache", DEFAULT_CONFIG["cache"], user.get("cache", {}))
    cfg["cache"] = cache
    build_hierarchy(cache["profile"], cache["overrides"], reserve=False)

    cost = _merge("cost", DEFAULT_CONFIG["cost"], user.get("cost", {}))
    cfg["cost"] = cost
    build_cost(cfg)

    analyze = _merge("analyze", DEFAULT_CONFIG["analyze"], user.get("analyze", {}))
    caps = analyze["fa_capacities"]
    if (not isinstance(caps, list) or not caps
            or any(isinstance(c, bool) or not isinstance(c, int) or c < 1 for c in caps)
            or any(b <= a for a, b in zip(caps, caps[1:]))):
        raise ConfigError("analyze.fa_capacities must be ascending positive integers")
    if not isinstance(analyze["gap_bucket_max_exp"], int) or analyze["gap_bucket_max_exp"] < 1:
        raise ConfigError("analyze.gap_bucket_max_exp must be an integer >= 1")
    cfg["analyze"] = analyze

    sweep = _merge("sweep", DEFAULT_CONFIG["sweep"], user.get("sweep", {}))
    sizes = sweep["voxel_sizes"]
    if not isinstance(sizes, list) or not sizes:
        raise ConfigError("sweep.voxel_sizes must be a non-empty list")
    for s in sizes:
        _require_number("sweep", "voxel_sizes[]", s)
        if s <= 0:
            raise ConfigError("sweep voxel sizes must be positive")
        if s > cfg["world"]["truncation_dist"]:
            raise ConfigError("sweep voxel sizes must not exceed truncation_dist")
    cfg["sweep"] = sweep

    report = _merge("report", DEFAULT_CONFIG["report"], user.get("report", {}))
    if not isinstance(report["footprint_entries"], int) or report["footprint_entries"] < 0:
        raise ConfigError("report.footprint_entries must be a non-negative integer")
    lfs = report["footprint_load_factors"]
    if not isinstance(lfs, list) or not lfs or any(
            isinstance(x, bool) or not isinstance(x, (int, float)) or x <= 0 for x in lfs):
        raise ConfigError("report.footprint_load_factors must be positive numbers")
    cfg["report"] = report

    dump = user.get("dump_depth_frames", DEFAULT_CONFIG["dump_depth_frames"])
    if not isinstance(dump, bool):
        raise ConfigError("dump_depth_frames must be a boolean")
    cfg["dump_depth_frames"] = dump
    return cfg


def config_hash(resolved: dict) -> str:
    canonical = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# config sections that determine the generated trace; cache/cost/analysis
# settings may vary when replaying an existing trace
TRACE_SECTIONS = ("seed", "world", "scene", "camera", "trajectory",
                  "integrator", "store")


def trace_config_hash(resolved: dict) -> str:
    subset = {k: resolved[k] for k in TRACE_SECTIONS}
    canonical = json.dumps(subset, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# Builders from a resolved configuration
# ---------------------------------------------------------------------------

def build_world(cfg: dict) -> WorldConfig:
    return WorldConfig(**cfg["world"])


def build_scene(cfg: dict) -> SceneSpec:
    prims = []
    for prim in cfg["scene"]["primitives"]:
        kind = prim["kind"]
        if kind == "plane":
            prims.append(Plane(prim["normal"], prim["offset"]))
        elif kind == "sphere":
            prims.append(Sphere(prim["center"], prim["radius"]))
        else:
            prims.append(Box(prim["min_corner"], prim["max_corner"]))
    return SceneSpec(tuple(prims),
                     domain_min=cfg["scene"].get("domain_min", [-5.0, -5.0, -5.0]),
                     domain_max=cfg["scene"].get("domain_max", [5.0, 5.0, 5.0]))


def build_camera(cfg: dict) -> tuple[CameraIntrinsics, float]:
    cam = cfg["camera"]
    intr = CameraIntrinsics(fx=cam["fx"], fy=cam["fy"], cx=cam["cx"], cy=cam["cy"],
                            width=cam["width"], height=cam["height"])
    return intr, cam["max_range"]


def build_trajectory(cfg: dict):
    traj = dict(cfg["trajectory"])
    kind = traj.pop("kind")
    if kind == "orbit":
        traj["start_angle"] = math.radians(traj.pop("start_angle_deg", 0.0))
    return make_trajectory(kind, traj)


def build_store(cfg: dict, block_side: int):
    params = dict(cfg["store"])
    kind = params.pop("kind")
    return make_store(kind, block_side, **params)


def build_hierarchy_from(cfg: dict, profile: str | None = None,
                         debug: bool = False) -> KvCacheHierarchy:
    cache = cfg["cache"]
    return build_hierarchy(profile or cache["profile"], cache["overrides"], debug=debug)


def build_cost(cfg: dict) -> CostModelConfig:
    c = cfg["cost"]
    return CostModelConfig(
        c_hash=c["c_hash"], c_probe=c["c_probe"], insert_cost=c["insert_cost"],
        access_fraction=c["access_fraction"], level_energy=tuple(c["level_energy"]),
        store_probe_energy=c["store_probe_energy"],
        store_hash_energy=c["store_hash_energy"], c_update=c["c_update"])
