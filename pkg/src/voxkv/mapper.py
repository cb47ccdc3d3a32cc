"""Depth rendering and TSDF/ESDF map updates over a block store.

Every block fetch performed during integration goes through the store's
get-or-allocate path and is appended to an access trace, which is the input
to the cache simulator.  Integration of one frame is strictly serial: the
event order in the trace is part of the contract, and identical inputs
produce a byte-identical trace file.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, TraceFormatError
from .grid import BlockKey, VoxelCoord, WorldConfig, world_to_voxel
from .scene import SceneSpec, scene_sdf
from .stores import BlockStore

TRACE_HEADER = "seq,op,frame,kx,ky,kz"
TRACE_OPS = ("L", "I", "R")

DEPTH_MAGIC = b"DPF1"
_DEPTH_HEADER = struct.Struct("<4sII")

_WORLD_UP = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole model; pixel (u, v) back-projects along ((u-cx)/fx, (v-cy)/fy, 1)."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ConfigError("focal lengths must be positive")
        if self.width < 1 or self.height < 1:
            raise ConfigError("image dimensions must be >= 1")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ConfigError("principal point must lie inside the image")


@dataclass(frozen=True, eq=False)
class Pose:
    """Camera-to-world transform; rotation columns are the camera axes."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=np.float64)
        t = np.asarray(self.translation, dtype=np.float64)
        if r.shape != (3, 3) or t.shape != (3,):
            raise ConfigError("pose needs a 3x3 rotation and a 3-vector translation")
        if np.max(np.abs(r.T @ r - np.eye(3))) > 1e-9:
            raise ConfigError("rotation is not orthonormal within 1e-9")
        if abs(np.linalg.det(r) - 1.0) > 1e-9:
            raise ConfigError("rotation determinant must be +1 within 1e-9")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @property
    def optical_axis(self) -> np.ndarray:
        return self.rotation[:, 2]


@dataclass(eq=False)
class DepthFrame:
    """Row-major depths in meters; 0 marks an invalid pixel."""

    width: int
    height: int
    depths: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.depths, dtype=np.float32).reshape(-1)
        if d.size != self.width * self.height:
            raise ConfigError("depth buffer size does not match width*height")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise ConfigError("depths must be finite and >= 0")
        self.depths = d


# ---------------------------------------------------------------------------
# Access trace
# ---------------------------------------------------------------------------

class Trace:
    """Ordered (seq, op, frame, key) events; seq starts at 0 and increments."""

    __slots__ = ("events", "_last_frame")

    def __init__(self):
        self.events: list[tuple[int, str, int, BlockKey]] = []
        self._last_frame = 0

    def append(self, op: str, key: BlockKey, frame: int) -> None:
        if frame < self._last_frame:
            raise ConfigError("frame ids must be non-decreasing")
        self._last_frame = frame
        self.events.append((len(self.events), op, frame, key))

    def __len__(self) -> int:
        return len(self.events)

    def accesses(self) -> int:
        """Map accesses: lookup and insert events (removes are bookkeeping)."""
        return sum(1 for _, op, _, _ in self.events if op != "R")

    def write_csv(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write(TRACE_HEADER + "\n")
            for seq, op, frame, key in self.events:
                fh.write(f"{seq},{op},{frame},{key[0]},{key[1]},{key[2]}\n")


def read_trace(path) -> Trace:
    """Parse a trace CSV, validating format and event ordering."""
    trace = Trace()
    events = trace.events
    prev_seq = -1
    prev_frame = 0
    with open(path, "r", newline="") as fh:
        header = fh.readline().rstrip("\r\n")
        if header != TRACE_HEADER:
            raise TraceFormatError(1, f"expected header {TRACE_HEADER!r}, got {header!r}")
        for line_no, line in enumerate(fh, start=2):
            line = line.rstrip("\r\n")
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 6:
                raise TraceFormatError(line_no, f"expected 6 fields, got {len(parts)}")
            try:
                seq = int(parts[0])
                frame = int(parts[2])
                kx, ky, kz = int(parts[3]), int(parts[4]), int(parts[5])
            except ValueError:
                raise TraceFormatError(line_no, f"non-integer field in {line!r}") from None
            op = parts[1]
            if op not in TRACE_OPS:
                raise TraceFormatError(line_no, f"op must be one of {TRACE_OPS}, got {op!r}")
            if prev_seq < 0 and seq != 0:
                raise TraceFormatError(line_no, "seq must start at 0")
            if seq <= prev_seq:
                raise TraceFormatError(line_no, "seq must be strictly increasing")
            if frame < prev_frame:
                raise TraceFormatError(line_no, "frame must be non-decreasing")
            events.append((seq, op, frame, BlockKey(kx, ky, kz)))
            prev_seq = seq
            prev_frame = frame
    trace._last_frame = prev_frame
    return trace


# ---------------------------------------------------------------------------
# Depth frame files
# ---------------------------------------------------------------------------

def write_depth_frame(path, frame: DepthFrame) -> None:
    """Binary depth frame: magic "DPF1", u32 width/height, then LE float32s."""
    with open(path, "wb") as fh:
        fh.write(_DEPTH_HEADER.pack(DEPTH_MAGIC, frame.width, frame.height))
        fh.write(np.ascontiguousarray(frame.depths, dtype="<f4").tobytes())


def read_depth_frame(path) -> DepthFrame:
    with open(path, "rb") as fh:
        head = fh.read(_DEPTH_HEADER.size)
        if len(head) != _DEPTH_HEADER.size:
            raise ConfigError(f"{path}: truncated depth frame header")
        magic, width, height = _DEPTH_HEADER.unpack(head)
        if magic != DEPTH_MAGIC:
            raise ConfigError(f"{path}: bad magic {magic!r}")
        payload = fh.read()
    expected = width * height * 4
    if len(payload) != expected:
        raise ConfigError(f"{path}: expected {expected} payload bytes, got {len(payload)}")
    depths = np.frombuffer(payload, dtype="<f4").astype(np.float32)
    return DepthFrame(width, height, depths)


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def _pixel_rays(pose: Pose, intr: CameraIntrinsics):
    """Unit world-space directions per pixel and the optical-axis scale
    (camera-z component of the unit ray), both flat row-major arrays."""
    xs = (np.arange(intr.width, dtype=np.float64) - intr.cx) / intr.fx
    ys = (np.arange(intr.height, dtype=np.float64) - intr.cy) / intr.fy
    gx, gy = np.meshgrid(xs, ys)
    cam = np.stack([gx, gy, np.ones_like(gx)], axis=-1).reshape(-1, 3)
    norms = np.linalg.norm(cam, axis=1)
    unit = cam / norms[:, None]
    world = unit @ pose.rotation.T
    return world, 1.0 / norms


def render_depth(scene: SceneSpec, pose: Pose, intr: CameraIntrinsics,
                 max_range: float = 10.0, eps: float = 1e-6,
                 max_steps: int = 256) -> DepthFrame:
    """Sphere-trace the scene per pixel.

    Depth is the distance along the optical axis to the first surface within
    ``max_range`` of the camera center; rays that leave the range or fail to
    converge within the step budget yield 0 (invalid).
    """
    dirs, axis_scale = _pixel_rays(pose, intr)
    n = dirs.shape[0]
    origin = pose.translation
    t = np.zeros(n)
    depth = np.zeros(n)
    alive = np.arange(n)
    for _ in range(max_steps):
        pts = origin[None, :] + t[alive, None] * dirs[alive]
        d = scene_sdf(scene, pts)
        hit = d < eps
        if hit.any():
            idx = alive[hit]
            depth[idx] = t[idx] * axis_scale[idx]
            alive = alive[~hit]
            d = d[~hit]
        if alive.size == 0:
            break
        t[alive] += d
        keep = t[alive] <= max_range
        if not keep.all():
            alive = alive[keep]
        if alive.size == 0:
            break
    return DepthFrame(intr.width, intr.height, depth)


# ---------------------------------------------------------------------------
# Integration
# ---------------------------------------------------------------------------

@dataclass
class FrameStats:
    """Counts from integrating one frame."""

    rays: int = 0
    updates: int = 0            # fusion operations; equals block accesses
    distinct_voxels: int = 0    # voxels written at least once this frame
    block_accesses: int = 0
    distinct_blocks: int = 0
    block_keys: set = field(default_factory=set)


@dataclass
class UpdateStats:
    """Aggregate over a mapping run; per-frame lists hold one entry per
    integration pass (two per frame in "both" mode)."""

    frames: int = 0
    rays: int = 0
    updates: int = 0
    distinct_voxels: int = 0
    block_accesses: int = 0
    distinct_blocks: int = 0
    per_frame_accesses: list = field(default_factory=list)
    per_frame_distinct_blocks: list = field(default_factory=list)
    per_frame_distinct_voxels: list = field(default_factory=list)
    per_frame_updates: list = field(default_factory=list)

    def merge_frame(self, fs: FrameStats) -> None:
        self.rays += fs.rays
        self.updates += fs.updates
        self.distinct_voxels += fs.distinct_voxels
        self.block_accesses += fs.block_accesses
        self.per_frame_accesses.append(fs.block_accesses)
        self.per_frame_distinct_blocks.append(fs.distinct_blocks)
        self.per_frame_distinct_voxels.append(fs.distinct_voxels)
        self.per_frame_updates.append(fs.updates)

    def as_dict(self) -> dict:
        return {
            "frames": self.frames,
            "rays": self.rays,
            "updates": self.updates,
            "distinct_voxels": self.distinct_voxels,
            "block_accesses": self.block_accesses,
            "distinct_blocks": self.distinct_blocks,
            "per_frame_accesses": self.per_frame_accesses,
            "per_frame_distinct_blocks": self.per_frame_distinct_blocks,
            "per_frame_distinct_voxels": self.per_frame_distinct_voxels,
            "per_frame_updates": self.per_frame_updates,
        }


def _check_frame(frame: DepthFrame, intr: CameraIntrinsics) -> None:
    if frame.width != intr.width or frame.height != intr.height:
        raise ConfigError("depth frame dimensions do not match the intrinsics")


def integrate_tsdf(frame: DepthFrame, pose: Pose, intr: CameraIntrinsics,
                   store: BlockStore, cfg: WorldConfig, trace: Trace,
                   frame_id: int = 0, weight_max: float = 100.0) -> FrameStats:
    """Fuse one depth frame into the TSDF.

    Rays are marched from the camera center through each back-projected
    point at half-voxel steps; each voxel is updated at most once per ray.
    A voxel whose center projects within +-truncation_dist of the point
    along the ray receives sdf <- (w*sdf + d)/(w + 1), w <- min(w+1, wmax),
    where d is the along-ray distance from the voxel center to the point,
    positive on the camera side of the surface.
    """
    _check_frame(frame, intr)
    dirs, axis_scale = _pixel_rays(pose, intr)
    depths = np.asarray(frame.depths, dtype=np.float64)
    valid = np.flatnonzero(depths > 0.0)
    ox, oy, oz = (float(c) for c in pose.translation)
    h = cfg.voxel_size
    inv_h = 1.0 / h
    half_step = 0.5 * h
    band = cfg.truncation_dist
    b = cfg.block_side
    wmax = float(weight_max)
    start_events = len(trace.events)
    frame_voxels: set = set()
    frame_keys: set = set()
    updates = 0

    dir_list = dirs[valid].tolist()
    t_list = (depths[valid] / axis_scale[valid]).tolist()
    events_append = trace.append
    block_of = store.block
    get_or_alloc = store.get_or_allocate

    for (dx, dy, dz), tp in zip(dir_list, t_list):
        t0 = tp - band - h
        if t0 < 0.0:
            t0 = 0.0
        t1 = tp + band + h
        steps = int((t1 - t0) / half_step) + 1
        seen: set = set()
        t = t0
        for _ in range(steps):
            vx = math.floor((ox + t * dx) * inv_h)
            vy = math.floor((oy + t * dy) * inv_h)
            vz = math.floor((oz + t * dz) * inv_h)
            v = (vx, vy, vz)
            if v not in seen:
                seen.add(v)
                tc = (((vx + 0.5) * h - ox) * dx
                      + ((vy + 0.5) * h - oy) * dy
                      + ((vz + 0.5) * h - oz) * dz)
                d = tp - tc
                if -band <= d <= band:
                    bkx, lx = divmod(vx, b)
                    bky, ly = divmod(vy, b)
                    bkz, lz = divmod(vz, b)
                    key = BlockKey(bkx, bky, bkz)
                    handle, allocated = get_or_alloc(key)
                    events_append("I" if allocated else "L", key, frame_id)
                    blk = block_of(handle)
                    li = (lz * b + ly) * b + lx
                    w = float(blk.weights[li])
                    blk.values[li] = (w * float(blk.values[li]) + d) / (w + 1.0)
                    blk.weights[li] = w + 1.0 if w + 1.0 < wmax else wmax
                    updates += 1
                    frame_voxels.add(v)
                    frame_keys.add(key)
            t += half_step

    return FrameStats(rays=len(valid), updates=updates,
                      distinct_voxels=len(frame_voxels),
                      block_accesses=len(trace.events) - start_events,
                      distinct_blocks=len(frame_keys), block_keys=frame_keys)


def _ball_offsets(clear_radius: float, voxel_size: float) -> list[tuple[int, int, int, float]]:
    """Integer offsets whose center-to-center distance is within the radius,
    with that distance precomputed; deterministic lexicographic order."""
    r = clear_radius / voxel_size
    rmax = int(math.floor(r + 1e-9))
    r2 = r * r + 1e-9
    out = []
    for dx in range(-rmax, rmax + 1):
        for dy in range(-rmax, rmax + 1):
            for dz in range(-rmax, rmax + 1):
                q = dx * dx + dy * dy + dz * dz
                if q <= r2:
                    out.append((dx, dy, dz, math.sqrt(q) * voxel_size))
    return out


def integrate_esdf(frame: DepthFrame, pose: Pose, intr: CameraIntrinsics,
                   store: BlockStore, cfg: WorldConfig, trace: Trace,
                   frame_id: int = 0) -> FrameStats:
    """Mark the voxel holding each back-projected point occupied, then write
    min center-to-center distances into every voxel within clear_radius of
    an occupied center.  Block payload reads as (distance, observed)."""
    _check_frame(frame, intr)
    dirs, axis_scale = _pixel_rays(pose, intr)
    depths = np.asarray(frame.depths, dtype=np.float64)
    valid = np.flatnonzero(depths > 0.0)
    origin = pose.translation
    b = cfg.block_side
    start_events = len(trace.events)
    frame_voxels: set = set()
    frame_keys: set = set()
    updates = 0

    # first-occurrence order over pixels, deduplicated per frame
    occupied: dict[VoxelCoord, None] = {}
    pts = origin[None, :] + (depths[valid] / axis_scale[valid])[:, None] * dirs[valid]
    for p in pts:
        occupied.setdefault(world_to_voxel(p, cfg), None)

    offsets = _ball_offsets(cfg.clear_radius, cfg.voxel_size)
    events_append = trace.append
    block_of = store.block
    get_or_alloc = store.get_or_allocate

    for (vx0, vy0, vz0) in occupied:
        for dx, dy, dz, dist in offsets:
            vx, vy, vz = vx0 + dx, vy0 + dy, vz0 + dz
            bkx, lx = divmod(vx, b)
            bky, ly = divmod(vy, b)
            bkz, lz = divmod(vz, b)
            key = BlockKey(bkx, bky, bkz)
            handle, allocated = get_or_alloc(key)
            events_append("I" if allocated else "L", key, frame_id)
            blk = block_of(handle)
            li = (lz * b + ly) * b + lx
            if blk.weights[li] == 0.0:
                blk.values[li] = dist
                blk.weights[li] = 1.0
            elif dist < blk.values[li]:
                blk.values[li] = dist
            updates += 1
            frame_voxels.add((vx, vy, vz))
            frame_keys.add(key)

    return FrameStats(rays=len(valid), updates=updates,
                      distinct_voxels=len(frame_voxels),
                      block_accesses=len(trace.events) - start_events,
                      distinct_blocks=len(frame_keys), block_keys=frame_keys)


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------

def _look_rotation(forward: np.ndarray) -> np.ndarray:
    """Rotation whose +z column is ``forward`` (camera x right, y down)."""
    f = forward / np.linalg.norm(forward)
    right = np.cross(f, _WORLD_UP)
    n = np.linalg.norm(right)
    if n < 1e-12:
        right = np.cross(f, np.array([1.0, 0.0, 0.0]))
        n = np.linalg.norm(right)
    right /= n
    down = np.cross(f, right)
    return np.column_stack([right, down, f])


def orbit_trajectory(center, radius: float, height: float, frames: int,
                     start_angle: float = 0.0) -> list[Pose]:
    """Equally spaced poses on a circle around ``center``, each facing it."""
    if frames < 1:
        raise ConfigError("zero-length trajectory")
    if radius <= 0:
        raise ConfigError("orbit radius must be positive")
    c = np.asarray(center, dtype=np.float64)
    poses = []
    for i in range(frames):
        a = start_angle + 2.0 * math.pi * i / frames
        eye = c + np.array([radius * math.cos(a), radius * math.sin(a), height])
        poses.append(Pose(_look_rotation(c - eye), eye))
    return poses


def line_trajectory(start, step, frames: int) -> list[Pose]:
    """Straight path with fixed orientation facing along the step direction."""
    if frames < 1:
        raise ConfigError("zero-length trajectory")
    s = np.asarray(start, dtype=np.float64)
    d = np.asarray(step, dtype=np.float64)
    if np.linalg.norm(d) < 1e-12:
        raise ConfigError("line step must be non-zero")
    rot = _look_rotation(d)
    return [Pose(rot, s + i * d) for i in range(frames)]


def make_trajectory(kind: str, params: dict) -> list[Pose]:
    if kind == "orbit":
        return orbit_trajectory(params["center"], params["radius"],
                                params["height"], params["frames"],
                                params.get("start_angle", 0.0))
    if kind == "line":
        return line_trajectory(params["start"], params["step"], params["frames"])
    raise ConfigError(f"unknown trajectory kind {kind!r}")


# ---------------------------------------------------------------------------
# End-to-end mapping
# ---------------------------------------------------------------------------

def run_mapping(scene: SceneSpec, poses: list[Pose], intr: CameraIntrinsics,
                store: BlockStore, cfg: WorldConfig, mode: str = "tsdf",
                max_range: float = 10.0, weight_max: float = 100.0,
                trace: Trace | None = None, frame_sink=None) -> tuple[Trace, UpdateStats]:
    """Render each pose and integrate it, producing the access trace."""
    if not poses:
        raise ConfigError("zero-length trajectory")
    if mode not in ("tsdf", "esdf", "both"):
        raise ConfigError(f"unknown integrator mode {mode!r}")
    if trace is None:
        trace = Trace()
    stats = UpdateStats()
    all_keys: set = set()
    for frame_id, pose in enumerate(poses):
        frame = render_depth(scene, pose, intr, max_range=max_range)
        if frame_sink is not None:
            frame_sink(frame_id, frame)
        if mode in ("tsdf", "both"):
            fs = integrate_tsdf(frame, pose, intr, store, cfg, trace, frame_id, weight_max)
            stats.merge_frame(fs)
            all_keys |= fs.block_keys
        if mode in ("esdf", "both"):
            fs = integrate_esdf(frame, pose, intr, store, cfg, trace, frame_id)
            stats.merge_frame(fs)
            all_keys |= fs.block_keys
    stats.frames = len(poses)
    stats.distinct_blocks = len(all_keys)
    return trace, stats
