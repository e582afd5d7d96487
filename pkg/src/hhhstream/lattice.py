"""Hierarchical domains: prefixes, labels and the generalization lattice.

A fully specified element is a tuple of ``d`` unsigned integers, one per
dimension. Each dimension is ``width`` bits wide and generalizes ``step``
bits at a time, so it has ``height = width // step`` generalization steps.
A :class:`Prefix` keeps the masked value of every dimension together with
its label, the per-dimension count of retained steps.
"""

from __future__ import annotations

import ipaddress
import itertools
import struct
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Optional, Sequence


class Prefix(NamedTuple):
    """A (possibly generalized) element of a hierarchical domain.

    ``values[i]`` is the fully specified value of dimension ``i`` with every
    wildcarded bit cleared; ``label[i]`` is the number of retained steps.
    """

    values: tuple
    label: tuple

    @property
    def level(self) -> int:
        return sum(self.label)


@dataclass(frozen=True)
class Dimension:
    """One hierarchical attribute: ``width`` bits generalized ``step`` bits at a time."""

    width: int = 32
    step: int = 8

    def __post_init__(self):
        if self.width < 1 or self.step < 1:
            raise ValueError(f"width and step must be positive, got {self.width}, {self.step}")
        if self.width % self.step:
            raise ValueError(f"step {self.step} does not divide width {self.width}")
        if self.width > 64:
            raise ValueError("dimensions wider than 64 bits are not supported")

    @property
    def height(self) -> int:
        return self.width // self.step

    @cached_property
    def masks(self) -> tuple:
        full = (1 << self.width) - 1
        return tuple(full ^ ((1 << (self.width - lvl * self.step)) - 1)
                     for lvl in range(self.height + 1))

    @property
    def is_ipv4_bytes(self) -> bool:
        return self.width == 32 and self.step == 8

    def format(self, value: int, level: int) -> str:
        if self.is_ipv4_bytes:
            octets = [str((value >> (24 - 8 * k)) & 0xFF) for k in range(level)]
            return ".".join(octets + ["*"] * (4 - level))
        bits = level * self.step
        if self.width == 32:
            return f"{ipaddress.IPv4Address(value)}/{bits}"
        return f"{value}/{bits}"

    def parse(self, text: str) -> tuple:
        """Parse one dimension of a prefix; returns ``(masked value, level)``."""
        text = text.strip()
        if self.is_ipv4_bytes and "/" not in text:
            parts = text.split(".")
            if len(parts) != 4:
                raise ValueError(f"malformed IPv4 prefix {text!r}")
            level = 0
            value = 0
            seen_star = False
            for k, part in enumerate(parts):
                if part == "*":
                    seen_star = True
                    continue
                if seen_star:
                    raise ValueError(f"wildcard must be trailing in {text!r}")
                octet = int(part)
                if not 0 <= octet <= 255:
                    raise ValueError(f"octet out of range in {text!r}")
                value |= octet << (24 - 8 * k)
                level += 1
            return value, level
        if "/" in text:
            addr, _, length = text.partition("/")
            bits = int(length)
            if bits % self.step or not 0 <= bits <= self.width:
                raise ValueError(f"prefix length {bits} is not a multiple of step {self.step}")
            level = bits // self.step
            value = self.parse_value(addr)
        else:
            level = self.height
            value = self.parse_value(text)
        return value & self.masks[level], level

    def parse_value(self, text: str) -> int:
        text = text.strip()
        if self.width == 32 and "." in text:
            value = int(ipaddress.IPv4Address(text))
        else:
            value = int(text, 0)
        if not 0 <= value < (1 << self.width):
            raise ValueError(f"value {text!r} does not fit in {self.width} bits")
        return value

    def format_value(self, value: int) -> str:
        if self.width == 32:
            return str(ipaddress.IPv4Address(value))
        return str(value)


@dataclass(frozen=True)
class Hierarchy:
    """A product of :class:`Dimension` hierarchies and its lattice constants.

    >>> h = Hierarchy.ipv4(dims=2)
    >>> h.size, h.depth
    (25, 8)
    """

    dims: tuple = field(default_factory=lambda: (Dimension(),))

    def __post_init__(self):
        dims = tuple(self.dims)
        if not dims:
            raise ValueError("a hierarchy needs at least one dimension")
        for dim in dims:
            if not isinstance(dim, Dimension):
                raise TypeError(f"expected Dimension, got {type(dim).__name__}")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def ipv4(cls, dims: int = 1, granularity: str = "byte") -> "Hierarchy":
        steps = {"byte": 8, "bit": 1}
        if granularity not in steps:
            raise ValueError(f"granularity must be 'byte' or 'bit', got {granularity!r}")
        return cls(tuple(Dimension(32, steps[granularity]) for _ in range(dims)))

    @classmethod
    def uniform(cls, dims: int, width: int, step: int) -> "Hierarchy":
        return cls(tuple(Dimension(width, step) for _ in range(dims)))

    @property
    def d(self) -> int:
        return len(self.dims)

    @property
    def heights(self) -> tuple:
        return tuple(dim.height for dim in self.dims)

    @property
    def size(self) -> int:
        """Number of lattice nodes, ``prod(h_i + 1)``."""
        n = 1
        for h in self.heights:
            n *= h + 1
        return n

    @property
    def depth(self) -> int:
        """Level of fully specified elements, ``sum(h_i)``."""
        return sum(self.heights)

    @cached_property
    def labels(self) -> tuple:
        """All lattice labels, most specific first."""
        ranges = [range(h, -1, -1) for h in self.heights]
        return tuple(itertools.product(*ranges))

    @cached_property
    def labels_by_level(self) -> dict:
        out = {lvl: [] for lvl in range(self.depth + 1)}
        for label in self.labels:
            out[sum(label)].append(label)
        return {lvl: tuple(sorted(labels)) for lvl, labels in out.items()}

    @cached_property
    def descendant_labels(self) -> dict:
        """Labels strictly below each label (componentwise >=, not equal)."""
        out = {}
        for label in self.labels:
            out[label] = tuple(other for other in self.labels
                               if other != label
                               and all(o >= l for o, l in zip(other, label)))
        return out

    @cached_property
    def _masks(self) -> tuple:
        return tuple(dim.masks for dim in self.dims)

    @property
    def root(self) -> Prefix:
        return Prefix((0,) * self.d, (0,) * self.d)

    def element(self, values: Sequence[int]) -> Prefix:
        """The fully specified prefix for an element tuple."""
        values = tuple(int(v) for v in values)
        if len(values) != self.d:
            raise ValueError(f"expected {self.d} values, got {len(values)}")
        for v, dim in zip(values, self.dims):
            if not 0 <= v < (1 << dim.width):
                raise ValueError(f"value {v} does not fit in {dim.width} bits")
        return Prefix(values, self.heights)

    def prefix(self, values: Sequence[int], label: Sequence[int]) -> Prefix:
        label = tuple(label)
        if len(label) != self.d or any(not 0 <= l <= h for l, h in zip(label, self.heights)):
            raise ValueError(f"invalid label {label} for heights {self.heights}")
        masks = self._masks
        return Prefix(tuple(v & masks[i][l] for i, (v, l) in enumerate(zip(values, label))), label)

    @cached_property
    def _desc_masks(self) -> tuple:
        return tuple(tuple(masks[l] for l in range(h, -1, -1))
                     for masks, h in zip(self._masks, self.heights))

    def generalizations(self, values: Sequence[int]) -> list:
        """All ``H`` prefixes of a fully specified element, in ``labels`` order."""
        per_dim = [[v & m for m in masks] for v, masks in zip(values, self._desc_masks)]
        new = tuple.__new__
        return [new(Prefix, pair) for pair in zip(itertools.product(*per_dim), self.labels)]

    def parent(self, p: Prefix, i: int) -> Optional[Prefix]:
        """Generalize ``p`` one step in dimension ``i`` (0-based); None at the top."""
        if not 0 <= i < self.d:
            raise IndexError(f"dimension index {i} out of range for d={self.d}")
        level = p.label[i]
        if level == 0:
            return None
        label = p.label[:i] + (level - 1,) + p.label[i + 1:]
        value = p.values[i] & self._masks[i][level - 1]
        return Prefix(p.values[:i] + (value,) + p.values[i + 1:], label)

    def is_descendant(self, p: Prefix, q: Prefix) -> bool:
        """True iff ``p`` is ``q`` or a specialization of it."""
        masks = self._masks
        for i, (pl, ql) in enumerate(zip(p.label, q.label)):
            if ql > pl or (p.values[i] & masks[i][ql]) != q.values[i]:
                return False
        return True

    def glb(self, a: Prefix, b: Prefix) -> Optional[Prefix]:
        """Greatest lower bound of two prefixes.

        Returns None for the trivial item (no common descendant), which
        has count zero everywhere.
        """
        masks = self._masks
        values = []
        label = []
        for i, (al, bl) in enumerate(zip(a.label, b.label)):
            av, bv = a.values[i], b.values[i]
            if al >= bl:
                if av & masks[i][bl] != bv:
                    return None
                values.append(av)
                label.append(al)
            else:
                if bv & masks[i][al] != av:
                    return None
                values.append(bv)
                label.append(bl)
        return Prefix(tuple(values), tuple(label))

    def max_antichain_size(self) -> int:
        """Largest antichain of a two-dimensional lattice, ``1 + min(h1, h2)``."""
        if self.d != 2:
            raise ValueError(f"antichain bound is only established for d=2, got d={self.d}")
        return 1 + min(self.heights)

    def all_prefixes(self) -> Iterable[Prefix]:
        """Every prefix of the lattice. Only sensible for tiny hierarchies."""
        per_dim = []
        for dim in self.dims:
            opts = []
            for lvl in range(dim.height + 1):
                shift = dim.width - lvl * dim.step
                for v in range(1 << (lvl * dim.step)):
                    opts.append((lvl, v << shift))
            per_dim.append(opts)
        for combo in itertools.product(*per_dim):
            yield Prefix(tuple(v for _, v in combo), tuple(l for l, _ in combo))

    def format(self, p: Prefix) -> str:
        parts = [dim.format(v, l) for dim, v, l in zip(self.dims, p.values, p.label)]
        if self.d == 1:
            return parts[0]
        return "(" + ",".join(parts) + ")"

    def parse(self, text: str) -> Prefix:
        text = text.strip()
        if self.d > 1:
            if not (text.startswith("(") and text.endswith(")")):
                raise ValueError(f"expected parenthesized prefix, got {text!r}")
            text = text[1:-1]
        parts = text.split(",")
        if len(parts) != self.d:
            raise ValueError(f"expected {self.d} components in {text!r}")
        parsed = [dim.parse(part) for dim, part in zip(self.dims, parts)]
        return Prefix(tuple(v for v, _ in parsed), tuple(l for _, l in parsed))

    def encode(self, p: Prefix) -> bytes:
        return struct.pack(f"<{self.d}B{self.d}Q", *p.label, *p.values)

    def decode(self, data: bytes) -> Prefix:
        fields = struct.unpack(f"<{self.d}B{self.d}Q", data)
        return Prefix(tuple(fields[self.d:]), tuple(fields[:self.d]))

    def to_dict(self) -> dict:
        return {"dims": [{"width": dim.width, "step": dim.step} for dim in self.dims]}

    @classmethod
    def from_dict(cls, data: dict) -> "Hierarchy":
        return cls(tuple(Dimension(int(x["width"]), int(x["step"])) for x in data["dims"]))
