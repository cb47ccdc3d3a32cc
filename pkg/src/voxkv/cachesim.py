"""Reserved-way key/handle cache hierarchy model.

Key/handle pairs are packed into reserved ways of a set-associative
hierarchy.  Placement: every key maps to a pseudoaddress
``pa = spatial_hash(key) % NR`` where NR is the reserved-line count of the
outermost reserved level; a level with S sets holds the pa line at set
``pa % S`` with tag ``pa // S``, so keys packed together derive equal set
and tag bits at every level.

Semantics implemented here (the test suite replays them against an
independent reference model):

* Lookup probes levels inner to outer.  A tag hit answers from that level
  alone: a key absent from the line is a miss and outer levels are NOT
  consulted (sound because write-through keeps co-resident lines
  identical).  A tag hit at an outer level with the key present copies the
  whole line, within-line LRU bits included, into every inner level.  A
  tag miss at the outermost level returns absent; the store is never
  consulted from here.
* Insert updates the line content for the key's pseudoaddress (overwrite
  the key's slot, else fill a free slot, else replace the within-line LRU
  pair) and writes the result through to every reserved level, evicting
  each level's set-LRU reserved line as needed.  Evicting a line from an
  outer level back-invalidates inner copies so inclusion (inner pair =>
  same pair at every outer level) holds after every operation.  Evicted
  pairs are discarded; the authoritative copy lives in the store.
* Remove marks the key's slot invalid at every level holding it; freed
  slots are refilled first, making them within-line LRU-oldest.  Removes
  never install lines and do not touch LRU orders.
* Write-through covers any modification of a reserved line, within-line
  LRU bits included: a read hit refreshes the bits of every level holding
  the line, so co-resident lines stay identical at all times.
* Entire-line LRU is updated on any tag match and on install; within-line
  LRU on key hit or insert.  ``line_evictions`` counts every resident line
  discarded at a level, whether as an LRU victim or by back-invalidation.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError
from .grid import BlockKey, spatial_hash
from .stores import INVALID_HANDLE, StoreStats

LEVEL_COUNTERS = (
    "entire_line_read_hits", "entire_line_read_misses",
    "within_line_read_hits", "within_line_read_misses",
    "entire_line_write_hits", "entire_line_write_misses",
    "within_line_write_hits", "within_line_write_misses",
    "line_evictions", "writebacks", "lookup_visits",
)


def pseudoaddress(key: BlockKey, nr: int) -> int:
    """spatial_hash(key) mod NR; the basis for set and tag at every level."""
    if nr < 1:
        raise ConfigError("NR must be >= 1")
    return spatial_hash(key) % nr


@dataclass(frozen=True)
class LevelConfig:
    """Geometry and latency of one cache level.

    A 20-byte pair (12-byte key + 8-byte handle) packs 3 to a 64-byte line
    and 6 to a 128-byte line; other line sizes are rejected.
    """

    name: str
    sets: int
    ways: int
    reserved_ways: int
    line_bytes: int = 64
    hit_latency_cycles: float = 1.0

    def __post_init__(self):
        if self.sets < 1 or self.sets & (self.sets - 1):
            raise ConfigError("sets must be a power of two")
        if self.ways < 1:
            raise ConfigError("ways must be >= 1")
        if not 0 <= self.reserved_ways <= self.ways:
            raise ConfigError("reserved_ways must be within [0, ways]")
        if self.line_bytes not in (64, 128):
            raise ConfigError("line_bytes must be 64 or 128")
        if self.hit_latency_cycles < 0:
            raise ConfigError("hit_latency_cycles must be >= 0")

    @property
    def pairs_per_line(self) -> int:
        return 3 if self.line_bytes == 64 else 6

    @property
    def reserved_line_count(self) -> int:
        return self.reserved_ways * self.sets


PROFILES: dict[str, tuple[LevelConfig, ...]] = {
    # Two-level CPU-style profile: 16KB/4-way/64B data half of a shared
    # 32KB L1 (64 sets) and a 256KB/8-way/64B L2 (512 sets).
    "cpu-table5": (
        LevelConfig("L1", sets=64, ways=4, reserved_ways=1, line_bytes=64,
                    hit_latency_cycles=1.0),
        LevelConfig("L2", sets=512, ways=8, reserved_ways=2, line_bytes=64,
                    hit_latency_cycles=4.0),
    ),
    # Single-level GPU-style profile: 128KB/4-way/128B (256 sets).
    "gpu-table6": (
        LevelConfig("L1", sets=256, ways=4, reserved_ways=1, line_bytes=128,
                    hit_latency_cycles=1.0),
    ),
}


class _Line:
    __slots__ = ("pa", "keys", "handles", "order")

    def __init__(self, pairs: int):
        self.pa = -1                      # -1 marks an invalid line
        self.keys: list[BlockKey | None] = [None] * pairs
        self.handles: list[int] = [0] * pairs
        self.order: list[int] = []        # occupied slot indices, LRU first


class _LevelState:
    __slots__ = ("cfg", "active_ways", "lines", "order", "stats")

    def __init__(self, cfg: LevelConfig, active_ways: int):
        self.cfg = cfg
        self.active_ways = active_ways
        p = cfg.pairs_per_line
        self.lines = [[_Line(p) for _ in range(active_ways)] for _ in range(cfg.sets)]
        self.order = [[] for _ in range(cfg.sets)]   # resident ways, LRU first
        self.stats = {name: 0 for name in LEVEL_COUNTERS}


class KvCacheHierarchy:
    """Serial reserved-way cache; independent instances may run concurrently."""

    def __init__(self, levels, debug: bool = False):
        levels = tuple(levels)
        if not levels:
            raise ConfigError("hierarchy needs at least one level")
        if len({cfg.line_bytes for cfg in levels}) != 1:
            raise ConfigError("all levels must share one line size "
                              "(lines are written through whole)")
        self.configs = levels
        self.debug = debug
        self._states: list[_LevelState | None] = [None] * len(levels)
        self._active: list[int] = []
        self.nr = 0
        self._pa_memo: dict[BlockKey, int] = {}
        self._zero_global_stats()

    # -- lifecycle -----------------------------------------------------------
    def _zero_global_stats(self):
        self.kv_lookups = 0
        self.kv_inserts = 0
        self.kv_removes = 0
        self.overall_hits = 0

    def reserve_lines(self, ways: int, level_index: int) -> None:
        """Reserve the first ``ways`` ways of every set at one level.

        All reserved lines hierarchy-wide are invalidated and statistics are
        zeroed: NR is recomputed from the outermost reserved level, so prior
        placements would no longer be derivable.
        """
        if not 0 <= level_index < len(self.configs):
            raise ConfigError(f"no cache level {level_index}")
        cfg = self.configs[level_index]
        if not 0 <= ways <= cfg.ways:
            raise ConfigError(f"cannot reserve {ways} of {cfg.ways} ways at {cfg.name}")
        current = {i: (st.active_ways if st else 0) for i, st in enumerate(self._states)}
        current[level_index] = ways
        self._active = [i for i in range(len(self.configs)) if current[i] > 0]
        self._states = [
            _LevelState(self.configs[i], current[i]) if current[i] > 0 else None
            for i in range(len(self.configs))
        ]
        self.nr = (self.configs[self._active[-1]].sets * current[self._active[-1]]
                   if self._active else 0)
        self._pa_memo.clear()
        self._zero_global_stats()

    def reserve(self) -> "KvCacheHierarchy":
        """Apply every level's configured reserved_ways."""
        for i, cfg in enumerate(self.configs):
            self.reserve_lines(cfg.reserved_ways, i)
        return self

    def unreserve_lines(self) -> None:
        """Invalidate and release all reserved lines; kv operations become
        configuration errors until lines are reserved again."""
        self._states = [None] * len(self.configs)
        self._active = []
        self.nr = 0
        self._pa_memo.clear()

    def _require_reserved(self):
        if not self._active:
            raise ConfigError("no reserved cache lines; call reserve_lines first")

    def _pa(self, key: BlockKey) -> int:
        pa = self._pa_memo.get(key)
        if pa is None:
            pa = spatial_hash(key) % self.nr
            self._pa_memo[key] = pa
        return pa

    # -- internal helpers ------------------------------------------------------
    def _find_way(self, lvl: _LevelState, set_idx: int, pa: int):
        for w in range(lvl.active_ways):
            if lvl.lines[set_idx][w].pa == pa:
                return w
        return None

    @staticmethod
    def _touch(lvl: _LevelState, set_idx: int, way: int):
        order = lvl.order[set_idx]
        order.remove(way)
        order.append(way)

    def _write_pairs(self, line: _Line, pairs):
        line.keys = [k for k, _ in pairs] + [None] * (len(line.keys) - len(pairs))
        line.handles = [h for _, h in pairs] + [0] * (len(line.handles) - len(pairs))
        line.order = list(range(len(pairs)))

    def _invalidate_pa(self, active_pos: int, pa: int) -> None:
        li = self._active[active_pos]
        lvl = self._states[li]
        set_idx = pa % lvl.cfg.sets
        way = self._find_way(lvl, set_idx, pa)
        if way is None:
            return
        line = lvl.lines[set_idx][way]
        line.pa = -1
        line.order = []
        line.keys = [None] * len(line.keys)
        lvl.order[set_idx].remove(way)
        lvl.stats["line_evictions"] += 1

    def _install(self, active_pos: int, pa: int, pairs) -> None:
        """Place a line at one level, evicting its set-LRU victim if full;
        outer-level evictions back-invalidate inner copies."""
        li = self._active[active_pos]
        lvl = self._states[li]
        set_idx = pa % lvl.cfg.sets
        way = None
        for w in range(lvl.active_ways):
            if lvl.lines[set_idx][w].pa < 0:
                way = w
                break
        if way is None:
            way = lvl.order[set_idx][0]
            victim = lvl.lines[set_idx][way]
            lvl.order[set_idx].pop(0)
            lvl.stats["line_evictions"] += 1
            victim_pa = victim.pa
            victim.pa = -1
            for inner_pos in range(active_pos):
                self._invalidate_pa(inner_pos, victim_pa)
        line = lvl.lines[set_idx][way]
        line.pa = pa
        self._write_pairs(line, pairs)
        lvl.order[set_idx].append(way)

    # -- kv operations ---------------------------------------------------------
    def kv_lookup(self, key: BlockKey) -> int | None:
        result = self._lookup(key)
        if self.debug:
            self.check_invariants()
        return result

    def _lookup(self, key):
        self._require_reserved()
        self.kv_lookups += 1
        pa = self._pa(key)
        for pos, li in enumerate(self._active):
            lvl = self._states[li]
            st = lvl.stats
            st["lookup_visits"] += 1
            set_idx = pa % lvl.cfg.sets
            way = self._find_way(lvl, set_idx, pa)
            if way is None:
                st["entire_line_read_misses"] += 1
                continue
            st["entire_line_read_hits"] += 1
            self._touch(lvl, set_idx, way)
            line = lvl.lines[set_idx][way]
            slot = None
            for i in line.order:
                if line.keys[i] == key:
                    slot = i
                    break
            if slot is None:
                st["within_line_read_misses"] += 1
                return None
            st["within_line_read_hits"] += 1
            line.order.remove(slot)
            line.order.append(slot)
            handle = line.handles[slot]
            # any modification of a reserved line is written through: refresh
            # the bits of outer holders in place, copy the whole line into
            # the levels that missed
            pairs = [(line.keys[i], line.handles[i]) for i in line.order]
            for outer_pos in range(pos + 1, len(self._active)):
                lvl_o = self._states[self._active[outer_pos]]
                way_o = self._find_way(lvl_o, pa % lvl_o.cfg.sets, pa)
                if way_o is not None:
                    self._write_pairs(lvl_o.lines[pa % lvl_o.cfg.sets][way_o], pairs)
            if pos > 0:
                for inner_pos in range(pos):
                    self._install(inner_pos, pa, pairs)
                st["writebacks"] += pos
            self.overall_hits += 1
            return handle
        return None

    def kv_insert(self, key: BlockKey, handle: int) -> None:
        self._insert(key, handle)
        if self.debug:
            self.check_invariants()

    def _insert(self, key, handle):
        self._require_reserved()
        if handle == INVALID_HANDLE:
            raise ConfigError("cannot insert the invalid-handle sentinel; use kv_remove")
        if not 0 <= handle < INVALID_HANDLE:
            raise ConfigError(f"handle {handle} outside the unsigned 64-bit range")
        self.kv_inserts += 1
        pa = self._pa(key)
        pairs_cap = self.configs[self._active[0]].pairs_per_line

        pairs = None
        for li in self._active:
            lvl = self._states[li]
            way = self._find_way(lvl, pa % lvl.cfg.sets, pa)
            if way is not None:
                line = lvl.lines[pa % lvl.cfg.sets][way]
                pairs = [(line.keys[i], line.handles[i]) for i in line.order]
                break
        key_present = pairs is not None and any(k == key for k, _ in pairs)
        if pairs is None:
            pairs = [(key, handle)]
        elif key_present:
            pairs = [p for p in pairs if p[0] != key] + [(key, handle)]
        elif len(pairs) < pairs_cap:
            pairs = pairs + [(key, handle)]
        else:
            pairs = pairs[1:] + [(key, handle)]

        for pos in range(len(self._active) - 1, -1, -1):
            li = self._active[pos]
            lvl = self._states[li]
            st = lvl.stats
            set_idx = pa % lvl.cfg.sets
            way = self._find_way(lvl, set_idx, pa)
            if way is not None:
                st["entire_line_write_hits"] += 1
                st["within_line_write_hits" if key_present else "within_line_write_misses"] += 1
                self._write_pairs(lvl.lines[set_idx][way], pairs)
                self._touch(lvl, set_idx, way)
            else:
                st["entire_line_write_misses"] += 1
                self._install(pos, pa, pairs)

    def kv_remove(self, key: BlockKey) -> None:
        self._remove(key)
        if self.debug:
            self.check_invariants()

    def _remove(self, key):
        self._require_reserved()
        self.kv_removes += 1
        pa = self._pa(key)
        for li in self._active:
            lvl = self._states[li]
            set_idx = pa % lvl.cfg.sets
            way = self._find_way(lvl, set_idx, pa)
            if way is None:
                continue
            line = lvl.lines[set_idx][way]
            for i in line.order:
                if line.keys[i] == key:
                    line.keys[i] = None
                    line.order.remove(i)
                    break

    # -- introspection -----------------------------------------------------------
    def stats_dict(self) -> dict:
        return {
            "levels": {self.configs[li].name: dict(self._states[li].stats)
                       for li in self._active},
            "kv_lookups": self.kv_lookups,
            "kv_inserts": self.kv_inserts,
            "kv_removes": self.kv_removes,
            "overall_hits": self.overall_hits,
        }

    def debug_snapshot(self):
        """Canonical state: per level, per set, resident lines in set-LRU
        order as (pa, pairs in within-line LRU order)."""
        out = []
        for li in self._active:
            lvl = self._states[li]
            sets_repr = []
            for s in range(lvl.cfg.sets):
                entries = []
                for w in lvl.order[s]:
                    line = lvl.lines[s][w]
                    entries.append((line.pa, tuple((line.keys[i], line.handles[i])
                                                   for i in line.order)))
                sets_repr.append(tuple(entries))
            out.append(tuple(sets_repr))
        return tuple(out)

    def check_invariants(self) -> None:
        """Structural sweep: line homogeneity, set/tag derivation, LRU
        consistency, and write-through inclusion.  Raises on violation."""
        for li in self._active:
            lvl = self._states[li]
            sets = lvl.cfg.sets
            for s in range(sets):
                order = lvl.order[s]
                if len(set(order)) != len(order):
                    raise RuntimeError(f"{lvl.cfg.name}: duplicate ways in set order")
                resident = set(order)
                for w in range(lvl.active_ways):
                    line = lvl.lines[s][w]
                    if line.pa < 0:
                        if w in resident:
                            raise RuntimeError(f"{lvl.cfg.name}: invalid line in set order")
                        continue
                    if w not in resident:
                        raise RuntimeError(f"{lvl.cfg.name}: resident line missing from order")
                    if line.pa % sets != s:
                        raise RuntimeError(f"{lvl.cfg.name}: line pa does not derive its set")
                    occupied = [i for i, k in enumerate(line.keys) if k is not None]
                    if sorted(line.order) != occupied:
                        raise RuntimeError(f"{lvl.cfg.name}: within-line LRU is not a "
                                           "permutation of occupied slots")
                    for i in line.order:
                        if spatial_hash(line.keys[i]) % self.nr != line.pa:
                            raise RuntimeError(f"{lvl.cfg.name}: key in line does not share "
                                               "the line pseudoaddress")
        for pos in range(len(self._active) - 1):
            inner = self._states[self._active[pos]]
            for s in range(inner.cfg.sets):
                for w in inner.order[s]:
                    line = inner.lines[s][w]
                    for i in line.order:
                        k, h = line.keys[i], line.handles[i]
                        for outer_pos in range(pos + 1, len(self._active)):
                            outer = self._states[self._active[outer_pos]]
                            ow = self._find_way(outer, line.pa % outer.cfg.sets, line.pa)
                            if ow is None:
                                raise RuntimeError("inclusion violated: inner line absent "
                                                   "from outer level")
                            oline = outer.lines[line.pa % outer.cfg.sets][ow]
                            if not any(oline.keys[j] == k and oline.handles[j] == h
                                       for j in oline.order):
                                raise RuntimeError("inclusion violated: inner pair absent "
                                                   "from outer level")


def build_hierarchy(profile: str = "cpu-table5", overrides: dict | None = None,
                    debug: bool = False, reserve: bool = True) -> KvCacheHierarchy:
    """Instantiate a named profile, optionally overriding per-level fields."""
    try:
        base = PROFILES[profile]
    except KeyError:
        raise ConfigError(f"unknown cache profile {profile!r}") from None
    levels = list(base)
    if overrides:
        unknown = set(overrides) - {"levels"}
        if unknown:
            raise ConfigError(f"unknown cache override keys {sorted(unknown)}")
        per_level = overrides.get("levels", [])
        if len(per_level) > len(levels):
            raise ConfigError("more level overrides than profile levels")
        for i, fields in enumerate(per_level):
            valid = {"sets", "ways", "reserved_ways", "line_bytes", "hit_latency_cycles"}
            unknown = set(fields) - valid
            if unknown:
                raise ConfigError(f"unknown level override keys {sorted(unknown)}")
            base_cfg = levels[i]
            levels[i] = LevelConfig(
                name=base_cfg.name,
                sets=fields.get("sets", base_cfg.sets),
                ways=fields.get("ways", base_cfg.ways),
                reserved_ways=fields.get("reserved_ways", base_cfg.reserved_ways),
                line_bytes=fields.get("line_bytes", base_cfg.line_bytes),
                hit_latency_cycles=fields.get("hit_latency_cycles",
                                              base_cfg.hit_latency_cycles),
            )
    hierarchy = KvCacheHierarchy(levels, debug=debug)
    if reserve:
        hierarchy.reserve()
    return hierarchy


class FullyAssociativeBuffer:
    """Idealized fully associative LRU buffer of keys, insert-on-miss.

    An access hits iff the key is among the ``capacity`` most recently
    accessed distinct keys; either way the key becomes most recent.
    """

    __slots__ = ("capacity", "_slots")

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ConfigError("buffer capacity must be >= 1")
        self.capacity = capacity
        self._slots: dict = {}

    def access(self, key) -> bool:
        slots = self._slots
        if key in slots:
            del slots[key]
            slots[key] = None
            return True
        slots[key] = None
        if len(slots) > self.capacity:
            del slots[next(iter(slots))]
        return False


# ---------------------------------------------------------------------------
# Cost and energy model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CostModelConfig:
    """Parameterized cycle and energy estimator (not a measurement).

    The store lookup costs ``c_hash + avg_probe_steps * c_probe`` cycles,
    with avg_probe_steps taken from measured store statistics.  Energy
    constants are per-event in arbitrary units; ``access_fraction`` is the
    share of total runtime attributable to block accesses, used for the
    overall (Amdahl) speedup.  ``c_update`` prices one voxel fusion
    operation when modeling that fraction from counts.
    """

    c_hash: float = 30.0
    c_probe: float = 40.0
    insert_cost: float = 2.0
    access_fraction: float = 0.5
    level_energy: tuple = (1.0, 4.0)
    store_probe_energy: float = 10.0
    store_hash_energy: float = 5.0
    c_update: float = 10.0

    def __post_init__(self):
        if not 0.0 <= self.access_fraction <= 1.0:
            raise ConfigError("access_fraction must be within [0, 1]")
        for name in ("c_hash", "c_probe", "insert_cost", "store_probe_energy",
                     "store_hash_energy", "c_update"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if any(e < 0 for e in self.level_energy):
            raise ConfigError("level_energy entries must be >= 0")

    def store_lookup_cost(self, avg_probe_steps: float) -> float:
        return self.c_hash + avg_probe_steps * self.c_probe

    def store_access_energy(self, avg_probe_steps: float) -> float:
        return self.store_hash_energy + avg_probe_steps * self.store_probe_energy

    def energy_for_level(self, position: int) -> float:
        if not self.level_energy:
            return 0.0
        return self.level_energy[min(position, len(self.level_energy) - 1)]


def run_trace(trace, hierarchy, cost: CostModelConfig | None = None,
              store_stats: StoreStats | None = None) -> tuple[dict, dict]:
    """Replay an access trace through the lookup/miss/insert protocol.

    Lookup and insert events perform a kv_lookup; when it misses, the store
    lookup cost is charged and the pair is kv_inserted.  Remove events
    mirror the application-level invalidation via kv_remove and are cost
    neutral in both the baseline and the mechanism.
    """
    if isinstance(hierarchy, str):
        hierarchy = build_hierarchy(hierarchy)
    if cost is None:
        cost = CostModelConfig()
    handles: dict[BlockKey, int] = {}
    lookup = hierarchy.kv_lookup
    insert = hierarchy.kv_insert
    for _, op, _, key in trace.events:
        if op == "R":
            hierarchy.kv_remove(key)
            continue
        h = lookup(key)
        if h is None:
            h2 = handles.get(key)
            if h2 is None:
                h2 = len(handles) + 1
                handles[key] = h2
            insert(key, h2)
        elif h != handles.get(key):
            raise RuntimeError(f"cache returned stale handle for {key}")

    stats = hierarchy.stats_dict()
    report = cost_report(stats, hierarchy, cost,
                         store_stats.avg_probe_steps if store_stats is not None else 1.0)
    return stats, report


def cost_report(stats: dict, hierarchy: KvCacheHierarchy, cost: CostModelConfig,
                avg_probe_steps: float) -> dict:
    """Cycle/energy estimate from replay statistics.

    Baseline cycles charge every access with the store lookup cost; the
    mechanism charges each level visited during lookups with its hit
    latency, plus the store cost and the insert cost on every miss.  The
    overall speedup applies the access fraction f: 1/((1-f) + f/s).
    """
    accesses = stats["kv_lookups"]
    hits = stats["overall_hits"]
    misses = accesses - hits
    active = [hierarchy.configs[i] for i in hierarchy._active]
    level_stats = [stats["levels"][cfg.name] for cfg in active]

    store_cost = cost.store_lookup_cost(avg_probe_steps)
    lookup_cycles = sum(ls["lookup_visits"] * cfg.hit_latency_cycles
                        for cfg, ls in zip(active, level_stats))
    mechanism_cycles = lookup_cycles + misses * (store_cost + cost.insert_cost)
    baseline_cycles = accesses * store_cost

    if accesses == 0 or mechanism_cycles == 0:
        access_speedup = 1.0
    else:
        access_speedup = baseline_cycles / mechanism_cycles
    f = cost.access_fraction
    overall_speedup = 1.0 / ((1.0 - f) + f / access_speedup)

    store_energy = cost.store_access_energy(avg_probe_steps)
    write_energy = sum(cost.energy_for_level(pos) for pos in range(len(active)))
    mechanism_energy = (
        sum(ls["lookup_visits"] * cost.energy_for_level(pos)
            for pos, ls in enumerate(level_stats))
        + stats["kv_inserts"] * write_energy
        + misses * store_energy
    )
    baseline_energy = accesses * store_energy
    energy_savings = (1.0 - mechanism_energy / baseline_energy) if baseline_energy > 0 else 0.0

    return {
        "accesses": accesses,
        "hits": hits,
        "misses": misses,
        "hit_rate": hits / accesses if accesses else 0.0,
        "avg_store_probe_steps": avg_probe_steps,
        "store_lookup_cost_cycles": store_cost,
        "baseline_cycles": baseline_cycles,
        "mechanism_cycles": mechanism_cycles,
        "access_speedup": access_speedup,
        "access_fraction": f,
        "overall_speedup": overall_speedup,
        "baseline_energy": baseline_energy,
        "mechanism_energy": mechanism_energy,
        "energy_savings": energy_savings,
    }
