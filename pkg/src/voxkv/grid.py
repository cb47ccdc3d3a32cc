"""World/voxel/block coordinate transforms and the block-key spatial hash.

Everything here is a pure, stateless function of its arguments.  Negative
coordinates use floor semantics throughout so blocks tile space contiguously
across the origin.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .errors import ConfigError

MASK64 = (1 << 64) - 1
KEY_BYTES = 12

# Prime multipliers conventional for hashing integer lattice coordinates.
_PRIME_X = 73856093
_PRIME_Y = 19349669
_PRIME_Z = 83492791

_I32_MIN = -(1 << 31)
_I32_MAX = (1 << 31) - 1

_KEY_STRUCT = struct.Struct("<iii")


class BlockKey(NamedTuple):
    """Signed integer 3D coordinate of a voxel block (lexicographic order)."""

    kx: int
    ky: int
    kz: int


class VoxelCoord(NamedTuple):
    """Signed global voxel index; each component must fit in 32 bits."""

    vx: int
    vy: int
    vz: int


@dataclass(frozen=True)
class WorldConfig:
    """Grid geometry shared by all coordinate transforms.

    ``voxel_size``, ``truncation_dist`` and ``clear_radius`` are meters;
    ``block_side`` is the voxel count along one block edge.
    """

    voxel_size: float
    block_side: int = 8
    truncation_dist: float = 0.15
    clear_radius: float = 0.15

    def __post_init__(self) -> None:
        if not self.voxel_size > 0.0:
            raise ConfigError("voxel_size must be positive")
        if int(self.block_side) != self.block_side or self.block_side < 1:
            raise ConfigError("block_side must be an integer >= 1")
        if self.truncation_dist < self.voxel_size:
            raise ConfigError("truncation_dist must be >= voxel_size")
        if self.clear_radius < 0.0:
            raise ConfigError("clear_radius must be >= 0")

    @property
    def voxels_per_block(self) -> int:
        return self.block_side ** 3

    @property
    def block_edge_meters(self) -> float:
        return self.block_side * self.voxel_size


def world_to_voxel(p: Sequence[float], cfg: WorldConfig) -> VoxelCoord:
    """Voxel containing world point ``p``: floor(p_i / voxel_size) per axis."""
    inv = 1.0 / cfg.voxel_size
    vx = math.floor(p[0] * inv)
    vy = math.floor(p[1] * inv)
    vz = math.floor(p[2] * inv)
    if not (_I32_MIN <= vx <= _I32_MAX
            and _I32_MIN <= vy <= _I32_MAX
            and _I32_MIN <= vz <= _I32_MAX):
        raise ConfigError(f"point {tuple(p)!r} exceeds the 32-bit voxel index range")
    return VoxelCoord(vx, vy, vz)


def voxel_to_block(v: Sequence[int], block_side: int) -> tuple[BlockKey, int]:
    """Split a voxel index into its block key and local slot.

    The local slot is ``lz*B*B + ly*B + lx`` with each ``l_i`` in [0, B);
    floor division keeps the split correct for negative coordinates.
    """
    b = int(block_side)
    if b < 1:
        raise ConfigError("block_side must be >= 1")
    kx, lx = divmod(int(v[0]), b)
    ky, ly = divmod(int(v[1]), b)
    kz, lz = divmod(int(v[2]), b)
    return BlockKey(kx, ky, kz), (lz * b + ly) * b + lx


def voxel_center(v: Sequence[int], cfg: WorldConfig) -> tuple[float, float, float]:
    """World-space center of a voxel: (v_i + 0.5) * voxel_size."""
    s = cfg.voxel_size
    return ((v[0] + 0.5) * s, (v[1] + 0.5) * s, (v[2] + 0.5) * s)


def mix64(x: int) -> int:
    """64-bit avalanche finalizer (splitmix64 constants)."""
    x &= MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & MASK64
    x ^= x >> 31
    return x


def spatial_hash(key: Sequence[int]) -> int:
    """Deterministic 64-bit hash of a block key.

    XOR of per-axis prime multiples over wrapping 64-bit arithmetic,
    finalized with an avalanche mix so low bits are usable as set indices.
    Fixed constants and fixed-width arithmetic make the value identical
    across runs and platforms.
    """
    h = ((key[0] * _PRIME_X) ^ (key[1] * _PRIME_Y) ^ (key[2] * _PRIME_Z)) & MASK64
    return mix64(h)


def pack_key(key: Sequence[int]) -> bytes:
    """Serialize a key as little-endian kx, ky, kz int32 (12 bytes total)."""
    try:
        return _KEY_STRUCT.pack(int(key[0]), int(key[1]), int(key[2]))
    except struct.error as exc:
        raise ConfigError(f"key {tuple(key)!r} outside the 32-bit range") from exc


def unpack_key(data: bytes) -> BlockKey:
    """Inverse of :func:`pack_key`."""
    if len(data) != KEY_BYTES:
        raise ConfigError(f"expected {KEY_BYTES} key bytes, got {len(data)}")
    return BlockKey(*_KEY_STRUCT.unpack(data))
