"""Space Saving frequency summaries.

Two interchangeable implementations share one interface:

* :class:`HeapSpaceSaving` accepts arbitrary positive increments and keeps
  its counters in an indexed min-heap (``O(log m)`` per update).
* :class:`StreamSummary` accepts only unit increments and keeps counters in
  a doubly linked list of equal-count buckets (``O(1)`` per update).

Among counters tied at the minimum, the least recently updated one is
evicted. Both implementations follow this rule, so on all-ones streams they
reach identical states.
"""

from __future__ import annotations

import struct
from collections import OrderedDict
from typing import Callable, Hashable, Iterable, NamedTuple, Optional

WEIGHTED = "weighted"
UNITARY = "unitary"
MODES = (WEIGHTED, UNITARY)

_MAGIC = b"SSUM"
_HEADER = struct.Struct("<4sBQQQQ")
_KEYLEN = struct.Struct("<I")
_COUNTS = struct.Struct("<QQ")
_MODE_CODES = {WEIGHTED: 0, UNITARY: 1}


class Counter(NamedTuple):
    item: Hashable
    count: int
    error: int


class Estimate(NamedTuple):
    f_min: int
    f_max: int


class SpaceSaving:
    """Common behaviour of the two summary implementations.

    Parameters
    ----------
    capacity : int
        Number of counters ``m``. Fixed for the lifetime of the summary.
    """

    mode: str = ""

    def __init__(self, capacity: int):
        if int(capacity) != capacity or capacity < 1:
            raise ValueError(f"capacity must be a positive integer, got {capacity!r}")
        self.capacity = int(capacity)
        self.total = 0
        # Upper bound for untracked items that is not implied by the minimum
        # counter; non-zero only for merged summaries.
        self.residual = 0

    def __len__(self) -> int:
        raise NotImplementedError

    def __contains__(self, item) -> bool:
        raise NotImplementedError

    @property
    def full(self) -> bool:
        return len(self) >= self.capacity

    def update(self, item, c: int = 1) -> None:
        raise NotImplementedError

    def update_unitary(self, item) -> None:
        raise TypeError(f"unit updates require a {UNITARY} summary, this one is {self.mode}")

    def counters(self) -> list:
        """Tracked counters in eviction order (first would be evicted first)."""
        raise NotImplementedError

    def items(self) -> list:
        return [c.item for c in self.counters()]

    def min_count(self) -> int:
        """Smallest counter if the summary is full, else 0."""
        raise NotImplementedError

    def untracked_bound(self) -> int:
        return max(self.min_count(), self.residual)

    def estimate(self, item) -> Estimate:
        """``(f_min, f_max)`` bracketing the true frequency of ``item``."""
        raise NotImplementedError

    def _load(self, counters: Iterable[Counter]) -> None:
        raise NotImplementedError

    def check_invariants(self) -> None:
        counters = self.counters()
        assert len(counters) <= self.capacity
        assert len({c.item for c in counters}) == len(counters)
        for c in counters:
            assert 0 <= c.error <= c.count
        if self.residual == 0:
            # each increment adds exactly its weight to exactly one counter
            assert sum(c.count for c in counters) == self.total

    def __eq__(self, other) -> bool:
        if not isinstance(other, SpaceSaving):
            return NotImplemented
        return (self.mode == other.mode and self.capacity == other.capacity
                and self.total == other.total and self.residual == other.residual
                and self.counters() == other.counters())

    def __repr__(self) -> str:
        return (f"{type(self).__name__}(capacity={self.capacity}, "
                f"tracked={len(self)}, total={self.total})")


class HeapSpaceSaving(SpaceSaving):
    """Space Saving over an indexed min-heap; supports weighted updates."""

    mode = WEIGHTED

    def __init__(self, capacity: int):
        super().__init__(capacity)
        # entries are [count, seq, item, error]; seq breaks count ties
        self._heap: list = [None] * self.capacity
        self._size = 0
        self._pos: dict = {}
        self._seq = 0

    def __len__(self) -> int:
        return self._size

    def __contains__(self, item) -> bool:
        return item in self._pos

    def update(self, item, c: int = 1) -> None:
        if c < 1:
            raise ValueError(f"increment must be a positive integer, got {c!r}")
        self._seq += 1
        self.total += c
        pos = self._pos.get(item)
        heap = self._heap
        if pos is not None:
            entry = heap[pos]
            entry[0] += c
            entry[1] = self._seq
            self._sift_down(pos)
        elif self._size < self.capacity:
            pos = self._size
            heap[pos] = [c, self._seq, item, 0]
            self._pos[item] = pos
            self._size += 1
            self._sift_up(pos)
        else:
            entry = heap[0]
            del self._pos[entry[2]]
            v = entry[0]
            entry[0] = v + c
            entry[1] = self._seq
            entry[2] = item
            entry[3] = v
            self._pos[item] = 0
            self._sift_down(0)

    def _sift_up(self, pos: int) -> None:
        heap, index = self._heap, self._pos
        entry = heap[pos]
        key = (entry[0], entry[1])
        while pos > 0:
            parent = (pos - 1) >> 1
            pe = heap[parent]
            if (pe[0], pe[1]) <= key:
                break
            heap[pos] = pe
            index[pe[2]] = pos
            pos = parent
        heap[pos] = entry
        index[entry[2]] = pos

    def _sift_down(self, pos: int) -> None:
        heap, index, size = self._heap, self._pos, self._size
        entry = heap[pos]
        key = (entry[0], entry[1])
        while True:
            child = 2 * pos + 1
            if child >= size:
                break
            ce = heap[child]
            right = child + 1
            if right < size:
                re = heap[right]
                if (re[0], re[1]) < (ce[0], ce[1]):
                    child, ce = right, re
            if key <= (ce[0], ce[1]):
                break
            heap[pos] = ce
            index[ce[2]] = pos
            pos = child
        heap[pos] = entry
        index[entry[2]] = pos

    def counters(self) -> list:
        entries = sorted(self._heap[:self._size], key=lambda e: (e[0], e[1]))
        return [Counter(e[2], e[0], e[3]) for e in entries]

    def min_count(self) -> int:
        if self._size < self.capacity:
            return 0
        return self._heap[0][0]

    def estimate(self, item) -> Estimate:
        pos = self._pos.get(item)
        if pos is None:
            return Estimate(0, self.untracked_bound())
        entry = self._heap[pos]
        return Estimate(entry[0] - entry[3], entry[0])

    def _load(self, counters: Iterable[Counter]) -> None:
        for c in counters:
            if self._size >= self.capacity:
                raise ValueError("more counters than capacity")
            self._seq += 1
            self._heap[self._size] = [c.count, self._seq, c.item, c.error]
            self._pos[c.item] = self._size
            self._size += 1
            self._sift_up(self._size - 1)


class _Bucket:
    __slots__ = ("value", "items", "prev", "next")

    def __init__(self, value: int):
        self.value = value
        self.items: OrderedDict = OrderedDict()  # item -> error, oldest first
        self.prev: Optional[_Bucket] = None
        self.next: Optional[_Bucket] = None


class StreamSummary(SpaceSaving):
    """Space Saving over a bucket list; unit increments only.

    Buckets hold all counters sharing a count, ordered by when they reached
    that count, and the buckets form a list sorted by count. An increment
    moves one counter into the adjacent bucket, creating it if needed.
    """

    mode = UNITARY

    def __init__(self, capacity: int):
        super().__init__(capacity)
        self._head: Optional[_Bucket] = None
        self._where: dict = {}  # item -> bucket

    def __len__(self) -> int:
        return len(self._where)

    def __contains__(self, item) -> bool:
        return item in self._where

    def update(self, item, c: int = 1) -> None:
        if c != 1:
            raise ValueError(f"{UNITARY} summaries accept only increments of 1, got {c!r}")
        self.update_unitary(item)

    def update_unitary(self, item) -> None:
        self.total += 1
        bucket = self._where.get(item)
        if bucket is not None:
            error = bucket.items.pop(item)
            self._place(item, error, bucket.value + 1, bucket)
            self._drop_if_empty(bucket)
            return
        if len(self._where) < self.capacity:
            head = self._head
            if head is None or head.value != 1:
                fresh = _Bucket(1)
                fresh.next = head
                if head is not None:
                    head.prev = fresh
                self._head = fresh
            self._head.items[item] = 0
            self._where[item] = self._head
            return
        head = self._head
        victim, _ = head.items.popitem(last=False)
        del self._where[victim]
        self._place(item, head.value, head.value + 1, head)
        self._drop_if_empty(head)

    def _place(self, item, error: int, value: int, after: _Bucket) -> None:
        # `after` is the bucket the counter leaves; its value is value - 1
        target = after.next
        if target is None or target.value != value:
            fresh = _Bucket(value)
            fresh.prev = after
            fresh.next = target
            if target is not None:
                target.prev = fresh
            after.next = fresh
            target = fresh
        target.items[item] = error
        self._where[item] = target

    def _drop_if_empty(self, bucket: _Bucket) -> None:
        if bucket.items:
            return
        if bucket.prev is not None:
            bucket.prev.next = bucket.next
        else:
            self._head = bucket.next
        if bucket.next is not None:
            bucket.next.prev = bucket.prev

    def counters(self) -> list:
        out = []
        bucket = self._head
        while bucket is not None:
            for item, error in bucket.items.items():
                out.append(Counter(item, bucket.value, error))
            bucket = bucket.next
        return out

    def min_count(self) -> int:
        if len(self._where) < self.capacity:
            return 0
        return self._head.value

    def estimate(self, item) -> Estimate:
        bucket = self._where.get(item)
        if bucket is None:
            return Estimate(0, self.untracked_bound())
        return Estimate(bucket.value - bucket.items[item], bucket.value)

    def _load(self, counters: Iterable[Counter]) -> None:
        tail = None
        bucket = self._head
        while bucket is not None:
            tail, bucket = bucket, bucket.next
        for c in counters:
            if len(self._where) >= self.capacity:
                raise ValueError("more counters than capacity")
            if c.count < 1:
                raise ValueError("stream summary counters must be positive")
            if tail is not None and c.count < tail.value:
                raise ValueError("counters must be loaded in ascending count order")
            if tail is None or tail.value != c.count:
                fresh = _Bucket(c.count)
                fresh.prev = tail
                if tail is None:
                    self._head = fresh
                else:
                    tail.next = fresh
                tail = fresh
            tail.items[c.item] = c.error
            self._where[c.item] = tail


def make_summary(capacity: int, mode: str = WEIGHTED) -> SpaceSaving:
    """Create an empty summary of the requested mode."""
    if mode == WEIGHTED:
        return HeapSpaceSaving(capacity)
    if mode == UNITARY:
        return StreamSummary(capacity)
    raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def merge(summaries: list, capacity: Optional[int] = None) -> SpaceSaving:
    """Combine summaries of disjoint streams into one summary of their union.

    For every item tracked anywhere, the lower bound is the sum of the
    per-input lower bounds and the upper bound the sum of per-input upper
    bounds (an input's untracked bound where it does not track the item).
    The ``capacity`` items with the largest lower bound are kept, ties broken
    by item order, so items must be mutually orderable.
    """
    summaries = list(summaries)
    if not summaries:
        raise ValueError("merge needs at least one summary")
    modes = {s.mode for s in summaries}
    if len(modes) != 1:
        raise ValueError(f"cannot merge summaries of different modes: {sorted(modes)}")
    if capacity is None:
        capacity = summaries[0].capacity
    out = make_summary(capacity, summaries[0].mode)

    bounds = [s.untracked_bound() for s in summaries]
    lower: dict = {}
    upper: dict = {}
    for s in summaries:
        for c in s.counters():
            lower[c.item] = 0
            upper[c.item] = 0
    for s in summaries:
        for item in lower:
            est = s.estimate(item)
            lower[item] += est.f_min
            upper[item] += est.f_max

    ranked = sorted(lower, key=lambda item: (-lower[item], item))
    kept, dropped = ranked[:capacity], ranked[capacity:]
    residual = sum(bounds)
    for item in dropped:
        residual = max(residual, upper[item])
    chosen = sorted(kept, key=lambda item: (upper[item], item))
    out._load(Counter(item, upper[item], upper[item] - lower[item]) for item in chosen)
    out.total = sum(s.total for s in summaries)
    out.residual = residual
    return out


def _default_encode(item) -> bytes:
    if isinstance(item, bytes):
        return item
    if isinstance(item, str):
        return item.encode("utf-8")
    raise TypeError(f"no default byte encoding for {type(item).__name__}; pass encode_key")


def to_bytes(summary: SpaceSaving, encode_key: Optional[Callable] = None) -> bytes:
    """Serialize a summary, counters in eviction order, little-endian."""
    encode_key = encode_key or _default_encode
    counters = summary.counters()
    parts = [_HEADER.pack(_MAGIC, _MODE_CODES[summary.mode], summary.capacity,
                          summary.total, summary.residual, len(counters))]
    for c in counters:
        key = encode_key(c.item)
        parts.append(_KEYLEN.pack(len(key)))
        parts.append(key)
        parts.append(_COUNTS.pack(c.count, c.error))
    return b"".join(parts)


def from_bytes(data: bytes, decode_key: Optional[Callable] = None) -> SpaceSaving:
    decode_key = decode_key or (lambda b: b)
    magic, mode_code, capacity, total, residual, n = _HEADER.unpack_from(data, 0)
    if magic != _MAGIC:
        raise ValueError("not a serialized Space Saving summary")
    modes = {v: k for k, v in _MODE_CODES.items()}
    if mode_code not in modes:
        raise ValueError(f"unknown summary mode code {mode_code}")
    offset = _HEADER.size
    counters = []
    for _ in range(n):
        (klen,) = _KEYLEN.unpack_from(data, offset)
        offset += _KEYLEN.size
        key = decode_key(bytes(data[offset:offset + klen]))
        offset += klen
        count, error = _COUNTS.unpack_from(data, offset)
        offset += _COUNTS.size
        counters.append(Counter(key, count, error))
    if offset != len(data):
        raise ValueError("trailing bytes after summary")
    out = make_summary(capacity, modes[mode_code])
    out._load(counters)
    out.total = total
    out.residual = residual
    return out
