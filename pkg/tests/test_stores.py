import random

import numpy as np
import pytest

from voxkv.errors import CapacityError, ConfigError
from voxkv.grid import BlockKey
from voxkv.stores import (BUCKET_HEAD_BYTES, BYTES_PER_VOXEL, CHAIN_NODE_BYTES,
                          FlatHtaStore, HashStore, OctreeStore, make_store)


def all_stores(block_side=8, **kw):
    return [HashStore(block_side, **kw),
            OctreeStore(block_side, root_extent_blocks=64, **kw),
            FlatHtaStore(block_side, bucket_count=64, pairs_per_bucket=3, **kw)]


def random_keys(rng, n, bound=30):
    return [BlockKey(rng.randint(-bound, bound - 1), rng.randint(-bound, bound - 1),
                     rng.randint(-bound, bound - 1)) for _ in range(n)]


@pytest.mark.parametrize("store", all_stores(), ids=lambda s: s.kind)
class TestStoreSurface:
    def test_empty_lookup(self, store):
        assert store.get_block(BlockKey(1, 2, 3)) is None

    def test_insert_then_get(self, store):
        h, allocated = store.get_or_allocate(BlockKey(3, -2, 1))
        assert allocated
        assert store.get_block(BlockKey(3, -2, 1)) == h

    def test_idempotent_allocate(self, store):
        h1, a1 = store.get_or_allocate(BlockKey(0, 0, 0))
        h2, a2 = store.get_or_allocate(BlockKey(0, 0, 0))
        assert (a1, a2) == (True, False)
        assert h1 == h2

    def test_distinct_keys_distinct_handles(self, store):
        h1, _ = store.get_or_allocate(BlockKey(0, 0, 0))
        h2, _ = store.get_or_allocate(BlockKey(0, 0, 1))
        assert h1 != h2

    def test_remove(self, store):
        assert store.remove_block(BlockKey(9, 9, 9)) is False
        h, _ = store.get_or_allocate(BlockKey(9, 9, 9))
        assert store.remove_block(BlockKey(9, 9, 9)) is True
        assert store.get_block(BlockKey(9, 9, 9)) is None
        with pytest.raises(ConfigError):
            store.block(h)

    def test_handle_never_reissued(self, store):
        h1, _ = store.get_or_allocate(BlockKey(5, 5, 5))
        store.remove_block(BlockKey(5, 5, 5))
        h2, _ = store.get_or_allocate(BlockKey(5, 5, 5))
        assert h2 != h1

    def test_blocks_zero_initialized(self, store):
        h, _ = store.get_or_allocate(BlockKey(2, 2, 2))
        blk = store.block(h)
        assert not blk.values.any() and not blk.weights.any()
        assert blk.values.size == 512


@pytest.mark.parametrize("make", [
    lambda: HashStore(8, bucket_count=64),
    lambda: OctreeStore(8, root_extent_blocks=64),
    lambda: FlatHtaStore(8, bucket_count=32, pairs_per_bucket=3),
], ids=["hash", "octree", "flat_hta"])
def test_oracle_equivalence(make):
    """10^4 random insert/get/remove ops against a plain dict."""
    store = make()
    oracle: dict[BlockKey, int] = {}
    rng = random.Random(99)
    keys = random_keys(rng, 400)
    for _ in range(10_000):
        key = rng.choice(keys)
        roll = rng.random()
        if roll < 0.45:
            got = store.get_block(key)
            if key in oracle:
                assert got == oracle[key]
            else:
                assert got is None
        elif roll < 0.8:
            h, allocated = store.get_or_allocate(key)
            assert allocated == (key not in oracle)
            if key in oracle:
                assert h == oracle[key]
            oracle[key] = h
        else:
            assert store.remove_block(key) == (key in oracle)
            oracle.pop(key, None)
    assert store.entries == len(oracle)
    st = store.stats
    assert st.probe_steps >= st.lookups > 0


def test_handle_stability():
    store = HashStore(8, bucket_count=4)
    h, _ = store.get_or_allocate(BlockKey(1, 1, 1))
    store.block(h).values[7] = 42.0
    # interleave enough inserts to grow chains well past the bucket count
    for i in range(200):
        store.get_or_allocate(BlockKey(i, -i, 3))
    assert store.block(h).values[7] == 42.0
    assert store.get_block(BlockKey(1, 1, 1)) == h


def test_capacity_budget():
    store = HashStore(8, max_blocks=2)
    store.get_or_allocate(BlockKey(0, 0, 0))
    store.get_or_allocate(BlockKey(0, 0, 1))
    with pytest.raises(CapacityError):
        store.get_or_allocate(BlockKey(0, 0, 2))


def test_chain_comparisons_grow_with_load_factor():
    comparisons = []
    rng = random.Random(31337)
    keys = random_keys(rng, 8192, bound=200)
    for load_factor in (0.25, 0.5, 1.0, 2.0):
        n = 2048
        bucket_count = int(n / load_factor)
        store = HashStore(8, bucket_count=bucket_count)
        subset = keys[:n]
        for k in subset:
            store.get_or_allocate(k)
        before = store.stats.key_comparisons
        lookups = store.stats.lookups
        for k in subset:
            assert store.get_block(k) is not None
        per_hit = (store.stats.key_comparisons - before) / (store.stats.lookups - lookups)
        comparisons.append(per_hit)
    assert all(b > a for a, b in zip(comparisons, comparisons[1:])), comparisons


class TestOctree:
    def test_probe_steps_equal_depth(self):
        store = OctreeStore(8, root_extent_blocks=64)
        assert store.depth == 6
        keys = random_keys(random.Random(5), 50, bound=32)
        for k in keys:
            store.get_or_allocate(k)
        before = store.stats.probe_steps
        lookups = store.stats.lookups
        for k in set(keys):
            assert store.get_block(k) is not None
        probes = store.stats.probe_steps - before
        assert probes == (store.stats.lookups - lookups) * store.depth

    def test_extent_rejected(self):
        store = OctreeStore(8, root_extent_blocks=8)
        with pytest.raises(ConfigError):
            store.get_block(BlockKey(4, 0, 0))
        store.get_or_allocate(BlockKey(3, -4, 0))  # inside [-4, 4)

    def test_bad_extent(self):
        with pytest.raises(ConfigError):
            OctreeStore(8, root_extent_blocks=3)
        with pytest.raises(ConfigError):
            OctreeStore(8, root_extent_blocks=1)

    def test_equivalent_to_hash_store(self):
        octree = OctreeStore(8, root_extent_blocks=64)
        hash_store = HashStore(8)
        rng = random.Random(17)
        keys = random_keys(rng, 300)
        for _ in range(5000):
            key = rng.choice(keys)
            roll = rng.random()
            if roll < 0.5:
                assert (octree.get_block(key) is None) == (hash_store.get_block(key) is None)
            elif roll < 0.8:
                _, a1 = octree.get_or_allocate(key)
                _, a2 = hash_store.get_or_allocate(key)
                assert a1 == a2
            else:
                assert octree.remove_block(key) == hash_store.remove_block(key)


class TestFlatHta:
    def test_overflow(self):
        store = FlatHtaStore(8, bucket_count=1, pairs_per_bucket=3)
        keys = [BlockKey(i, 0, 0) for i in range(5)]
        for k in keys:
            store.get_or_allocate(k)
        assert store.overflow_entries() == 2
        for k in keys:
            assert store.get_block(k) is not None
        assert store.remove_block(keys[4])
        assert store.overflow_entries() == 1

    def test_line_bytes(self):
        assert FlatHtaStore(8, bucket_count=4, pairs_per_bucket=3).line_bytes == 64
        assert FlatHtaStore(8, bucket_count=4, pairs_per_bucket=6).line_bytes == 128


class TestFootprintModel:
    def test_empty_flat_hta(self):
        store = FlatHtaStore(8, bucket_count=4096, pairs_per_bucket=3)
        assert store.index_bytes() == 4096 * 64 == 262144
        assert store.payload_bytes() == 0

    def test_empty_chained(self):
        store = HashStore(8, bucket_count=1024)
        assert store.memory_footprint() == 1024 * BUCKET_HEAD_BYTES

    def test_chained_formula(self):
        store = HashStore(8, bucket_count=256)
        for i in range(100):
            store.get_or_allocate(BlockKey(i, 0, 0))
        assert store.index_bytes() == 256 * BUCKET_HEAD_BYTES + 100 * CHAIN_NODE_BYTES
        assert store.payload_bytes() == 100 * 512 * BYTES_PER_VOXEL

    def test_report_shape(self):
        for store in all_stores():
            store.get_or_allocate(BlockKey(0, 0, 0))
            report = store.footprint_report()
            assert set(report) == {"store_kind", "bucket_count_or_depth", "entries",
                                   "load_factor", "model_bytes_index",
                                   "model_bytes_payload", "overflow_entries"}
            assert report["entries"] == 1


def test_make_store():
    assert make_store("hash", 8).kind == "hash"
    assert make_store("octree", 8, root_extent_blocks=32).kind == "octree"
    with pytest.raises(ConfigError):
        make_store("btree", 8)


def test_bad_bucket_count():
    with pytest.raises(ConfigError):
        HashStore(8, bucket_count=100)
