"""Trace parsing, synthetic streams and report serialization."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

import numpy as np

from .core import HhhEntry, HhhReport
from .lattice import Hierarchy

REPORT_SCHEMA_VERSION = 1
FORMATS = ("csv", "csv2d")


class TraceError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class TraceRecord:
    element: tuple
    count: int = 1


def parse_trace_lines(lines, hierarchy: Hierarchy, fmt: str = "csv") -> Iterator[TraceRecord]:
    """Parse trace lines: ``d`` value columns then an optional positive count.

    ``csv2d`` is ``csv`` restricted to two-dimensional hierarchies. Blank
    lines and lines starting with ``#`` are skipped.
    """
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
    if fmt == "csv2d" and hierarchy.d != 2:
        raise ValueError(f"csv2d traces need a two-dimensional hierarchy, got d={hierarchy.d}")
    d = hierarchy.d
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        cols = [c.strip() for c in line.split(",")]
        if len(cols) not in (d, d + 1):
            raise TraceError(lineno, f"expected {d} or {d + 1} columns, got {len(cols)}")
        try:
            values = tuple(dim.parse_value(c) for dim, c in zip(hierarchy.dims, cols[:d]))
        except ValueError as exc:
            raise TraceError(lineno, f"malformed value: {exc}") from None
        count = 1
        if len(cols) == d + 1:
            try:
                count = int(cols[d])
            except ValueError:
                raise TraceError(lineno, f"malformed count {cols[d]!r}") from None
            if count < 1:
                raise TraceError(lineno, f"count must be positive, got {count}")
        yield TraceRecord(values, count)


def parse_trace(path, hierarchy: Hierarchy, fmt: str = "csv") -> list:
    with open(path) as fh:
        return list(parse_trace_lines(fh, hierarchy, fmt))


def format_trace(records, hierarchy: Hierarchy) -> str:
    out = []
    for r in records:
        cols = [dim.format_value(v) for dim, v in zip(hierarchy.dims, r.element)]
        if r.count != 1:
            cols.append(str(r.count))
        out.append(",".join(cols))
    return "\n".join(out) + ("\n" if out else "")


def random_universe(hierarchy: Hierarchy, size: int, rng: np.random.Generator) -> list:
    """``size`` distinct fully specified elements drawn uniformly (fewer if the domain is smaller)."""
    space = 1
    for dim in hierarchy.dims:
        space *= 1 << dim.width
    size = min(size, space)
    seen: dict = {}
    while len(seen) < size:
        batch = [tuple(int(rng.integers(0, 1 << dim.width)) for dim in hierarchy.dims)
                 for _ in range(size - len(seen))]
        for e in batch:
            seen.setdefault(e, None)
    return list(seen)


def gen_zipf(universe: int, n: int, alpha: float, seed: int,
             hierarchy: Optional[Hierarchy] = None) -> list:
    """A deterministic Zipf-distributed stream of ``n`` fully specified elements.

    Rank ``r`` of ``universe`` random elements is drawn with probability
    proportional to ``r ** -alpha``.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if universe < 1 or n < 0:
        raise ValueError("universe must be positive and n non-negative")
    hierarchy = hierarchy or Hierarchy.ipv4()
    rng = np.random.default_rng(seed)
    elements = random_universe(hierarchy, universe, rng)
    ranks = np.arange(1, len(elements) + 1, dtype=float)
    weights = ranks ** -float(alpha)
    weights /= weights.sum()
    picks = rng.choice(len(elements), size=n, p=weights)
    return [elements[i] for i in picks.tolist()]


def gen_uniform(universe: int, n: int, seed: int, hierarchy: Hierarchy) -> list:
    rng = np.random.default_rng(seed)
    elements = random_universe(hierarchy, universe, rng)
    return [elements[i] for i in rng.integers(0, len(elements), size=n).tolist()]


def report_to_dict(report: HhhReport) -> dict:
    h = report.hierarchy
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "epsilon": str(report.epsilon),
        "phi": str(report.phi),
        "N": report.total,
        "H": h.size,
        "d": h.d,
        "hierarchy": h.to_dict(),
        "entries": [
            {"prefix": h.format(e.prefix), "label": list(e.prefix.label),
             "f_min": e.f_min, "f_max": e.f_max, "F_prime": e.F_prime}
            for e in report.entries
        ],
    }


def report_to_json(report: HhhReport) -> str:
    return json.dumps(report_to_dict(report), indent=2) + "\n"


def report_to_csv(report: HhhReport) -> str:
    h = report.hierarchy
    buf = io.StringIO()
    buf.write(f"# epsilon={report.epsilon} phi={report.phi} N={report.total} H={h.size} d={h.d}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["prefix", "label", "f_min", "f_max", "F_prime"])
    for e in report.entries:
        writer.writerow([h.format(e.prefix), "|".join(map(str, e.prefix.label)),
                         e.f_min, e.f_max, e.F_prime])
    return buf.getvalue()


def report_from_dict(data: dict) -> HhhReport:
    if data.get("schema_version") != REPORT_SCHEMA_VERSION:
        raise ValueError(f"unsupported report schema {data.get('schema_version')!r}")
    h = Hierarchy.from_dict(data["hierarchy"])
    entries = []
    for row in data["entries"]:
        p = h.parse(row["prefix"])
        if list(p.label) != list(row["label"]):
            raise ValueError(f"label mismatch for {row['prefix']!r}")
        entries.append(HhhEntry(p, int(row["f_min"]), int(row["f_max"]), int(row["F_prime"])))
    return HhhReport(entries, Fraction(data["epsilon"]), Fraction(data["phi"]), int(data["N"]), h)


def read_report(path) -> HhhReport:
    with open(path) as fh:
        return report_from_dict(json.load(fh))
