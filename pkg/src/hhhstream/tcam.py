"""Operation-count simulation of Space Saving instances sharing one TCAM.

Every entry's ternary key is the prefix bits (wildcards as ``*``) followed
by fully specified tag bits naming the lattice node, so all instances live
in one table. Each instance's smallest counter is kept outside the TCAM.
Only SEARCH, READ and WRITE operations are counted; timing is not modelled.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional

from .lattice import Hierarchy, Prefix
from .space_saving import Counter, Estimate
from .validation import check_unit_interval


@dataclass(frozen=True)
class TcamCostModel:
    """Operations charged per event, for one Space Saving instance.

    ``min_update`` is charged after every replacement to refresh the stored
    minimum, counted as a READ or WRITE according to ``min_update_kind``.
    """

    search: int = 1
    hit_read: int = 1
    hit_write: int = 1
    insert_write: int = 1
    evict_read: int = 1
    evict_write: int = 1
    min_update: int = 1
    min_update_kind: str = "read"

    def __post_init__(self):
        if self.min_update_kind not in ("read", "write"):
            raise ValueError(f"min_update_kind must be 'read' or 'write', got {self.min_update_kind!r}")
        for name, value in asdict(self).items():
            if name != "min_update_kind" and (not isinstance(value, int) or value < 0):
                raise ValueError(f"cost {name} must be a non-negative integer, got {value!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "TcamCostModel":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown cost fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "TcamCostModel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class TcamOpCounts:
    reads: int = 0
    writes: int = 0
    searches: int = 0
    packets: int = 0

    @property
    def total(self) -> int:
        return self.reads + self.writes + self.searches

    @property
    def ops_per_packet(self) -> float:
        return self.total / self.packets if self.packets else 0.0

    def to_dict(self) -> dict:
        return {"reads": self.reads, "writes": self.writes, "searches": self.searches,
                "packets": self.packets, "total": self.total,
                "ops_per_packet": self.ops_per_packet}


@dataclass
class TcamEntry:
    key: str
    prefix: Prefix
    count: int
    error: int
    seq: int


@dataclass
class _Instance:
    name: str
    capacity: int
    size: int = 0
    # lazily invalidated (count, seq, key); the head is the stored minimum
    mins: list = field(default_factory=list)
    ops: TcamOpCounts = field(default_factory=TcamOpCounts)


def tag_bits(n_instances: int) -> int:
    return max(1, math.ceil(math.log2(n_instances))) if n_instances > 1 else 1


def ternary_key(hierarchy: Hierarchy, p: Prefix, tag: int, width: int) -> str:
    parts = []
    for dim, v, lvl in zip(hierarchy.dims, p.values, p.label):
        kept = lvl * dim.step
        bits = format(v, f"0{dim.width}b")
        parts.append(bits[:kept] + "*" * (dim.width - kept))
    parts.append(format(tag, f"0{width}b"))
    return "".join(parts)


class TcamSimulator:
    """Replays a unit-increment stream against a simulated TCAM table.

    Parameters
    ----------
    hierarchy : Hierarchy
    epsilon : number
        Each instance gets ``ceil(1/epsilon)`` entries.
    include_root : bool, default=True
        When False the root node is a plain packet counter costing no TCAM
        operations.
    single_instance : bool, default=False
        Keep one instance of ``H * ceil(1/epsilon)`` entries keyed by tagged
        prefixes instead of one instance per lattice node.
    cost : TcamCostModel, optional
    """

    def __init__(self, hierarchy: Hierarchy, epsilon, include_root: bool = True,
                 single_instance: bool = False, cost: Optional[TcamCostModel] = None):
        eps = check_unit_interval("epsilon", epsilon)
        self.hierarchy = hierarchy
        self.per_node = math.ceil(1 / eps)
        self.include_root = include_root
        self.single_instance = single_instance
        self.cost = cost or TcamCostModel()
        root = hierarchy.root.label
        self.labels = [l for l in hierarchy.labels if include_root or l != root]
        self.tag_of = {label: i for i, label in enumerate(hierarchy.labels)}
        self.tag_width = tag_bits(hierarchy.size)
        if single_instance:
            shared = _Instance("shared", self.per_node * len(self.labels))
            self._instances = {label: shared for label in self.labels}
        else:
            self._instances = {label: _Instance(str(label), self.per_node) for label in self.labels}
        self.table: dict = {}
        self.counts = TcamOpCounts()
        self.root_count = 0
        self.max_ops_per_instance_update = 0
        self._seq = 0

    def _charge(self, inst: _Instance, reads: int, writes: int, searches: int) -> None:
        for ops in (inst.ops, self.counts):
            ops.reads += reads
            ops.writes += writes
            ops.searches += searches
        self.max_ops_per_instance_update = max(self.max_ops_per_instance_update,
                                               reads + writes + searches)

    def _pop_min(self, inst: _Instance) -> TcamEntry:
        while True:
            count, seq, key = inst.mins[0]
            entry = self.table.get(key)
            if entry is not None and entry.count == count and entry.seq == seq:
                return entry
            heapq.heappop(inst.mins)

    def process(self, element) -> None:
        """One packet: one search per maintained instance, then hit/insert/replace."""
        self.counts.packets += 1
        cost = self.cost
        root = self.hierarchy.root.label
        for p in self.hierarchy.generalizations(element):
            if p.label == root and not self.include_root:
                self.root_count += 1
                continue
            inst = self._instances[p.label]
            key = ternary_key(self.hierarchy, p, self.tag_of[p.label], self.tag_width)
            self._seq += 1
            entry = self.table.get(key)
            if entry is not None:
                entry.count += 1
                entry.seq = self._seq
                self._charge(inst, cost.hit_read, cost.hit_write, cost.search)
            elif inst.size < inst.capacity:
                entry = TcamEntry(key, p, 1, 0, self._seq)
                self.table[key] = entry
                inst.size += 1
                self._charge(inst, 0, cost.insert_write, cost.search)
            else:
                victim = self._pop_min(inst)
                heapq.heappop(inst.mins)
                del self.table[victim.key]
                entry = TcamEntry(key, p, victim.count + 1, victim.count, self._seq)
                self.table[key] = entry
                reads, writes = cost.evict_read, cost.evict_write
                if cost.min_update_kind == "read":
                    reads += cost.min_update
                else:
                    writes += cost.min_update
                self._charge(inst, reads, writes, cost.search)
            heapq.heappush(inst.mins, (entry.count, entry.seq, key))
            if len(inst.mins) > 4 * inst.capacity + 16:
                self._compact(inst)

    def _compact(self, inst: _Instance) -> None:
        live = []
        for count, seq, key in inst.mins:
            entry = self.table.get(key)
            if entry is not None and entry.count == count and entry.seq == seq:
                live.append((count, seq, key))
        heapq.heapify(live)
        inst.mins = live

    def run(self, stream: Iterable) -> TcamOpCounts:
        for item in stream:
            if len(item) == 2 and isinstance(item[0], tuple):
                element, c = item
                if c != 1:
                    raise ValueError("the TCAM simulation handles unit increments only")
            else:
                element = item
            self.process(tuple(element))
        return self.counts

    def counters(self, label) -> list:
        """Entries of one lattice node in eviction order, as summary counters."""
        entries = [e for e in self.table.values() if e.prefix.label == label]
        entries.sort(key=lambda e: (e.count, e.seq))
        return [Counter(e.prefix, e.count, e.error) for e in entries]

    def estimate(self, p: Prefix) -> Estimate:
        if p.label == self.hierarchy.root.label and not self.include_root:
            return Estimate(self.root_count, self.root_count)
        key = ternary_key(self.hierarchy, p, self.tag_of[p.label], self.tag_width)
        entry = self.table.get(key)
        if entry is not None:
            return Estimate(entry.count - entry.error, entry.count)
        inst = self._instances[p.label]
        if inst.size < inst.capacity:
            return Estimate(0, 0)
        return Estimate(0, self._pop_min(inst).count)

    def report(self) -> dict:
        per_instance = {}
        seen = set()
        for label, inst in self._instances.items():
            if id(inst) in seen:
                continue
            seen.add(id(inst))
            name = "shared" if self.single_instance else ",".join(map(str, label))
            per_instance[name] = inst.ops.to_dict() | {"packets": self.counts.packets}
        n_inst = len(seen)
        return {
            "totals": self.counts.to_dict(),
            "instances": n_inst,
            "ops_per_packet_per_instance": self.counts.ops_per_packet / n_inst if n_inst else 0.0,
            "max_ops_per_instance_update": self.max_ops_per_instance_update,
            "include_root": self.include_root,
            "single_instance": self.single_instance,
            "tag_bits": self.tag_width,
            "cost_model": asdict(self.cost),
            "per_instance": per_instance,
        }


def tcam_run(stream, hierarchy: Hierarchy, epsilon, include_root: bool = True,
             cost: Optional[TcamCostModel] = None) -> TcamSimulator:
    sim = TcamSimulator(hierarchy, epsilon, include_root=include_root, cost=cost)
    sim.run(stream)
    return sim


def tcam_single_instance_run(stream, hierarchy: Hierarchy, epsilon,
                             cost: Optional[TcamCostModel] = None) -> TcamSimulator:
    sim = TcamSimulator(hierarchy, epsilon, single_instance=True, cost=cost)
    sim.run(stream)
    return sim
