"""Exact reference computations for checking streaming output.

Everything here keeps the full multiset of observed elements, so it is only
meant for desk-scale streams. Prefixes are enumerated sparsely: only
generalizations of observed elements can have non-zero counts.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .lattice import Hierarchy, Prefix
from .validation import as_fraction, threshold


@dataclass
class ExactCounts:
    """Exact unconditioned counts of every prefix with non-zero count."""

    hierarchy: Hierarchy
    elements: dict                  # element tuple -> frequency
    counts: dict                    # Prefix -> f(p)
    total: int
    under: dict = field(repr=False)  # Prefix -> element tuples below it

    def f(self, p: Prefix) -> int:
        return self.counts.get(p, 0)


def exact_counts(stream: Iterable, hierarchy: Hierarchy) -> ExactCounts:
    """Count a stream of ``element`` or ``(element, count)`` items exactly."""
    elements: Counter = Counter()
    for item in stream:
        if len(item) == 2 and isinstance(item[0], tuple):
            element, c = item
        else:
            element, c = item, 1
        if c < 1:
            raise ValueError(f"counts must be positive, got {c!r}")
        elements[tuple(element)] += c
    counts: dict = defaultdict(int)
    under: dict = defaultdict(list)
    for element, c in elements.items():
        for p in hierarchy.generalizations(element):
            counts[p] += c
            under[p].append(element)
    return ExactCounts(hierarchy, dict(elements), dict(counts),
                       sum(elements.values()), dict(under))


def _covers(exact: ExactCounts, chosen: Iterable[Prefix]) -> dict:
    covers: dict = defaultdict(list)
    for q in chosen:
        for element in exact.under.get(q, ()):
            covers[element].append(q)
    return covers


def _conditioned(exact: ExactCounts, p: Prefix, covers: dict) -> int:
    is_desc = exact.hierarchy.is_descendant
    total = 0
    for element in exact.under.get(p, ()):
        if not any(q != p and is_desc(q, p) for q in covers.get(element, ())):
            total += exact.elements[element]
    return total


def conditioned_count_wrt(exact: ExactCounts, p: Prefix, chosen: Iterable[Prefix]) -> int:
    """Mass below ``p`` not below any member of ``chosen`` that is strictly below ``p``."""
    return _conditioned(exact, p, _covers(exact, chosen))


def conditioned_counts(exact: ExactCounts, chosen: Iterable[Prefix]) -> dict:
    """Conditioned count w.r.t. ``chosen`` for every prefix with non-zero count."""
    covers = _covers(exact, list(chosen))
    return {p: _conditioned(exact, p, covers) for p in exact.counts}


def exact_hhh(exact: ExactCounts, phi) -> dict:
    """The exact HHH set, built level by level from the bottom.

    Returns a mapping from each HHH to its conditioned count at discovery.
    """
    phi = as_fraction(phi)
    cut = threshold(phi, exact.total)
    hierarchy = exact.hierarchy
    by_level: dict = defaultdict(list)
    for p in exact.counts:
        by_level[p.level].append(p)
    found: dict = {}
    covers: dict = defaultdict(list)
    for level in range(hierarchy.depth, -1, -1):
        new = []
        for p in sorted(by_level.get(level, ())):
            f_cond = _conditioned(exact, p, covers)
            if f_cond >= cut:
                found[p] = f_cond
                new.append(p)
        for p in new:
            for element in exact.under[p]:
                covers[element].append(p)
    return found


@dataclass
class Verdict:
    passed: bool
    accuracy_violations: list
    coverage_violations: list

    def to_dict(self, hierarchy: Hierarchy) -> dict:
        fmt = hierarchy.format
        return {
            "passed": self.passed,
            "accuracy_violations": [
                {"prefix": fmt(p), "f": f, "f_min": lo, "f_max": hi}
                for p, f, lo, hi in self.accuracy_violations],
            "coverage_violations": [
                {"prefix": fmt(p), "F": F} for p, F in self.coverage_violations],
        }


def check_report(exact: ExactCounts, phi, epsilon, report) -> Verdict:
    """Check Accuracy and Coverage of a report against exact counts.

    Accuracy: every entry brackets the true count with width at most
    ``epsilon * N``. Coverage: every prefix outside the report has
    conditioned count (w.r.t. the reported set) below ``phi * N``.
    """
    phi, epsilon = as_fraction(phi), as_fraction(epsilon)
    total = exact.total
    accuracy = []
    for e in report.entries:
        f = exact.f(e.prefix)
        width_ok = (e.f_max - e.f_min) <= epsilon * total
        if not (e.f_min <= f <= e.f_max and width_ok):
            accuracy.append((e.prefix, f, e.f_min, e.f_max))
    chosen = [e.prefix for e in report.entries]
    chosen_set = set(chosen)
    cut = threshold(phi, total)
    coverage = []
    for p, F in sorted(conditioned_counts(exact, chosen).items()):
        if p not in chosen_set and F >= cut:
            coverage.append((p, F))
    return Verdict(not accuracy and not coverage, accuracy, coverage)


def exact_report(exact: ExactCounts, phi):
    """An HHH report built from the exact set, with exact bounds."""
    from .core import HhhEntry, HhhReport

    found = exact_hhh(exact, phi)
    entries = [HhhEntry(p, exact.f(p), exact.f(p), F) for p, F in found.items()]
    return HhhReport(entries, Fraction(0), as_fraction(phi), exact.total, exact.hierarchy)
