"""Block stores behind one index interface.

Three interchangeable key->handle indexes over an arena of voxel blocks:

* :class:`HashStore` - chained spatial hash table (the workhorse).
* :class:`OctreeStore` - fixed-extent octree whose leaves are whole blocks.
* :class:`FlatHtaStore` - flat table of cache-line-sized buckets holding
  packed key/handle pairs, with a small overflow map for full buckets.

Handles are indices into an append-only arena: no operation relocates a
live block, so a handle resolved once stays valid until the block is
removed, and removed handles are never reissued within a run.

Footprint model constants (bytes), documented in the README:
bucket head pointer 8; chain node 28 (12 key + 8 handle + 8 next);
octree node 64 (8 child pointers); voxel payload 8 (two 32-bit fields).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import CapacityError, ConfigError
from .grid import BlockKey, spatial_hash

INVALID_HANDLE = (1 << 64) - 1

BYTES_PER_VOXEL = 8
BUCKET_HEAD_BYTES = 8
CHAIN_NODE_BYTES = 28
OCTREE_NODE_BYTES = 64


class VoxelBlock:
    """B**3 voxels as two planes.

    TSDF reads (values, weights) as (sdf, fusion weight); ESDF reads them as
    (distance, observed flag).  Freshly allocated blocks are all zeros.
    Values are kept in float64 so stored distances carry full precision; the
    byte model still charges BYTES_PER_VOXEL for the packed 4+4 layout a
    production store would use.
    """

    __slots__ = ("values", "weights")

    def __init__(self, block_side: int):
        n = block_side ** 3
        self.values = np.zeros(n, dtype=np.float64)
        self.weights = np.zeros(n, dtype=np.float32)


@dataclass
class StoreStats:
    """Access-cost counters.

    ``probe_steps`` counts data-dependent visits: the bucket-array read plus
    one per chain node for the hash stores, one per child descent for the
    octree.  Every lookup visits at least one node, so probe_steps >=
    lookups.  ``removals`` counts only removals of present keys.
    """

    lookups: int = 0
    probe_steps: int = 0
    key_comparisons: int = 0
    allocations: int = 0
    removals: int = 0

    @property
    def avg_probe_steps(self) -> float:
        return self.probe_steps / self.lookups if self.lookups else 1.0

    def as_dict(self) -> dict:
        d = asdict(self)
        d["avg_probe_steps"] = self.avg_probe_steps
        return d


class BlockStore:
    """Arena, statistics and the shared store surface; subclasses index keys."""

    kind = "abstract"

    def __init__(self, block_side: int, max_blocks: int | None = None):
        if block_side < 1:
            raise ConfigError("block_side must be >= 1")
        if max_blocks is not None and max_blocks < 1:
            raise ConfigError("max_blocks must be >= 1 when set")
        self.block_side = int(block_side)
        self.max_blocks = max_blocks
        self.stats = StoreStats()
        self._arena: list[VoxelBlock | None] = []
        self._live = 0
        self._hash_memo: dict[BlockKey, int] = {}

    # -- key hashing -------------------------------------------------------
    def _key_hash(self, key: BlockKey) -> int:
        h = self._hash_memo.get(key)
        if h is None:
            h = spatial_hash(key)
            self._hash_memo[key] = h
        return h

    # -- arena -------------------------------------------------------------
    def block(self, handle: int) -> VoxelBlock:
        if not (0 <= handle < len(self._arena)):
            raise ConfigError(f"unknown handle {handle}")
        blk = self._arena[handle]
        if blk is None:
            raise ConfigError(f"handle {handle} refers to a removed block")
        return blk

    @property
    def entries(self) -> int:
        return self._live

    # -- the store surface ---------------------------------------------------
    def get_block(self, key: BlockKey) -> int | None:
        """Handle for ``key`` if present; absence is a normal outcome."""
        self.stats.lookups += 1
        return self._find(key)

    def get_or_allocate(self, key: BlockKey) -> tuple[int, bool]:
        """Existing handle, or a fresh zero-initialized block for a new key."""
        self.stats.lookups += 1
        h = self._find(key)
        if h is not None:
            return h, False
        if self.max_blocks is not None and self._live >= self.max_blocks:
            raise CapacityError(f"block budget of {self.max_blocks} exhausted")
        h = len(self._arena)
        self._arena.append(VoxelBlock(self.block_side))
        self._live += 1
        self.stats.allocations += 1
        self._insert(key, h)
        return h, True

    def remove_block(self, key: BlockKey) -> bool:
        """Remove ``key``; the handle is retired and never reissued."""
        h = self._remove(key)
        if h is None:
            return False
        self._arena[h] = None
        self._live -= 1
        self.stats.removals += 1
        return True

    # -- footprint model -----------------------------------------------------
    def memory_footprint(self) -> int:
        """Modeled bytes: index structure plus block payload."""
        return self.index_bytes() + self.payload_bytes()

    def payload_bytes(self) -> int:
        return self._live * self.block_side ** 3 * BYTES_PER_VOXEL

    def footprint_report(self) -> dict:
        return {
            "store_kind": self.kind,
            "bucket_count_or_depth": self._size_parameter(),
            "entries": self._live,
            "load_factor": self.load_factor(),
            "model_bytes_index": self.index_bytes(),
            "model_bytes_payload": self.payload_bytes(),
            "overflow_entries": self.overflow_entries(),
        }

    def overflow_entries(self) -> int:
        return 0

    # subclass hooks
    def _find(self, key: BlockKey) -> int | None:
        raise NotImplementedError

    def _insert(self, key: BlockKey, handle: int) -> None:
        raise NotImplementedError

    def _remove(self, key: BlockKey) -> int | None:
        raise NotImplementedError

    def index_bytes(self) -> int:
        raise NotImplementedError

    def load_factor(self) -> float:
        raise NotImplementedError

    def _size_parameter(self) -> int:
        raise NotImplementedError


class HashStore(BlockStore):
    """Chained hash table over block keys; buckets never rehash."""

    kind = "hash"

    def __init__(self, block_side: int, bucket_count: int = 4096,
                 max_blocks: int | None = None):
        super().__init__(block_side, max_blocks)
        if bucket_count < 1 or bucket_count & (bucket_count - 1):
            raise ConfigError("bucket_count must be a power of two")
        self.bucket_count = bucket_count
        self._mask = bucket_count - 1
        self._buckets: list[list[tuple[BlockKey, int]]] = [[] for _ in range(bucket_count)]

    def _find(self, key):
        chain = self._buckets[self._key_hash(key) & self._mask]
        st = self.stats
        st.probe_steps += 1
        for k, h in chain:
            st.probe_steps += 1
            st.key_comparisons += 1
            if k == key:
                return h
        return None

    def _insert(self, key, handle):
        self._buckets[self._key_hash(key) & self._mask].append((key, handle))

    def _remove(self, key):
        chain = self._buckets[self._key_hash(key) & self._mask]
        st = self.stats
        st.probe_steps += 1
        for i, (k, h) in enumerate(chain):
            st.probe_steps += 1
            st.key_comparisons += 1
            if k == key:
                del chain[i]
                return h
        return None

    def index_bytes(self):
        return self.bucket_count * BUCKET_HEAD_BYTES + self._live * CHAIN_NODE_BYTES

    def load_factor(self):
        return self._live / self.bucket_count

    def _size_parameter(self):
        return self.bucket_count


class OctreeStore(BlockStore):
    """Octree over a fixed power-of-two extent, one whole block per leaf.

    Keys must lie within +-root_extent_blocks/2 of the origin; anything
    outside is rejected.  Removal clears the leaf slot without pruning
    interior nodes, so present-key lookups always descend exactly
    ``depth`` levels.
    """

    kind = "octree"

    def __init__(self, block_side: int, root_extent_blocks: int = 256,
                 max_blocks: int | None = None):
        super().__init__(block_side, max_blocks)
        e = root_extent_blocks
        if e < 2 or e & (e - 1):
            raise ConfigError("root_extent_blocks must be a power of two >= 2")
        self.root_extent_blocks = e
        self.depth = e.bit_length() - 1
        self._half = e // 2
        self._root: list = [None] * 8
        self._node_count = 1
        self._entries = 0

    def _unsigned(self, key):
        ux = key[0] + self._half
        uy = key[1] + self._half
        uz = key[2] + self._half
        e = self.root_extent_blocks
        if not (0 <= ux < e and 0 <= uy < e and 0 <= uz < e):
            raise ConfigError(
                f"key {tuple(key)!r} outside the octree extent of +-{self._half} blocks")
        return ux, uy, uz

    def _find(self, key):
        ux, uy, uz = self._unsigned(key)
        node = self._root
        st = self.stats
        for level in range(self.depth - 1):
            bit = self.depth - 1 - level
            idx = (((ux >> bit) & 1) << 2) | (((uy >> bit) & 1) << 1) | ((uz >> bit) & 1)
            st.probe_steps += 1
            node = node[idx]
            if node is None:
                return None
        idx = ((ux & 1) << 2) | ((uy & 1) << 1) | (uz & 1)
        st.probe_steps += 1
        return node[idx]

    def _insert(self, key, handle):
        ux, uy, uz = self._unsigned(key)
        node = self._root
        for level in range(self.depth - 1):
            bit = self.depth - 1 - level
            idx = (((ux >> bit) & 1) << 2) | (((uy >> bit) & 1) << 1) | ((uz >> bit) & 1)
            child = node[idx]
            if child is None:
                child = [None] * 8
                node[idx] = child
                self._node_count += 1
            node = child
        node[((ux & 1) << 2) | ((uy & 1) << 1) | (uz & 1)] = handle
        self._entries += 1

    def _remove(self, key):
        ux, uy, uz = self._unsigned(key)
        node = self._root
        st = self.stats
        for level in range(self.depth - 1):
            bit = self.depth - 1 - level
            idx = (((ux >> bit) & 1) << 2) | (((uy >> bit) & 1) << 1) | ((uz >> bit) & 1)
            st.probe_steps += 1
            node = node[idx]
            if node is None:
                return None
        idx = ((ux & 1) << 2) | ((uy & 1) << 1) | (uz & 1)
        st.probe_steps += 1
        h = node[idx]
        if h is None:
            return None
        node[idx] = None
        self._entries -= 1
        return h

    def index_bytes(self):
        return self._node_count * OCTREE_NODE_BYTES

    def load_factor(self):
        return self._live / float(self.root_extent_blocks ** 3)

    def _size_parameter(self):
        return self.depth


class FlatHtaStore(BlockStore):
    """Flat table of cache-line-sized buckets of packed key/handle pairs.

    A bucket holds ``pairs_per_bucket`` pairs in one modeled cache line
    (64 bytes for up to 3 pairs, 128 bytes for more).  Inserting into a
    full bucket falls over to a per-store overflow map, which is counted
    but excluded from the line-array byte model.
    """

    kind = "flat_hta"

    def __init__(self, block_side: int, bucket_count: int = 16384,
                 pairs_per_bucket: int = 3, max_blocks: int | None = None):
        super().__init__(block_side, max_blocks)
        if bucket_count < 1:
            raise ConfigError("bucket_count must be >= 1")
        if pairs_per_bucket < 1:
            raise ConfigError("pairs_per_bucket must be >= 1")
        self.bucket_count = bucket_count
        self.pairs_per_bucket = pairs_per_bucket
        self.line_bytes = 64 if pairs_per_bucket <= 3 else 128
        self._buckets: list[list[tuple[BlockKey, int]]] = [[] for _ in range(bucket_count)]
        self._overflow: dict[BlockKey, int] = {}

    @property
    def capacity(self) -> int:
        return self.bucket_count * self.pairs_per_bucket

    def _find(self, key):
        bucket = self._buckets[self._key_hash(key) % self.bucket_count]
        st = self.stats
        st.probe_steps += 1
        for k, h in bucket:
            st.key_comparisons += 1
            if k == key:
                return h
        if self._overflow:
            st.probe_steps += 1
            st.key_comparisons += 1
            return self._overflow.get(key)
        return None

    def _insert(self, key, handle):
        bucket = self._buckets[self._key_hash(key) % self.bucket_count]
        if len(bucket) < self.pairs_per_bucket:
            bucket.append((key, handle))
        else:
            self._overflow[key] = handle

    def _remove(self, key):
        bucket = self._buckets[self._key_hash(key) % self.bucket_count]
        st = self.stats
        st.probe_steps += 1
        for i, (k, h) in enumerate(bucket):
            st.key_comparisons += 1
            if k == key:
                del bucket[i]
                return h
        if self._overflow:
            st.probe_steps += 1
            st.key_comparisons += 1
            return self._overflow.pop(key, None)
        return None

    def overflow_entries(self):
        return len(self._overflow)

    def index_bytes(self):
        return self.bucket_count * self.line_bytes

    def load_factor(self):
        return self._live / self.capacity

    def _size_parameter(self):
        return self.bucket_count


STORE_KINDS = {
    "hash": HashStore,
    "octree": OctreeStore,
    "flat_hta": FlatHtaStore,
}


def make_store(kind: str, block_side: int, **kwargs) -> BlockStore:
    try:
        cls = STORE_KINDS[kind]
    except KeyError:
        raise ConfigError(f"unknown store kind {kind!r}") from None
    return cls(block_side, **kwargs)
