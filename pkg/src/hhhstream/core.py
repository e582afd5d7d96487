"""Approximate hierarchical heavy hitters over one Space Saving summary per lattice node."""

from __future__ import annotations

import itertools
import math
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .lattice import Hierarchy, Prefix
from .space_saving import MODES, UNITARY, make_summary
from .validation import (as_fraction, check_elements, check_unit_interval,
                         check_weights, threshold)


@dataclass(frozen=True)
class HhhEntry:
    prefix: Prefix
    f_min: int
    f_max: int
    F_prime: int


@dataclass
class HhhReport:
    """Emitted prefixes with unconditioned bounds and conditioned estimates.

    ``estimates`` maps every prefix the output procedure examined to its
    conditioned-count estimate, emitted or not; it is not serialized.
    """

    entries: list
    epsilon: Fraction
    phi: Fraction
    total: int
    hierarchy: Hierarchy
    estimates: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        fmt = self.hierarchy.format
        self.entries = sorted(self.entries, key=lambda e: (-e.prefix.level, fmt(e.prefix)))

    @property
    def prefixes(self) -> set:
        return {e.prefix for e in self.entries}

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def _emitted_descendants(hierarchy, p, emitted):
    is_desc = hierarchy.is_descendant
    below = []
    for label in hierarchy.descendant_labels[p.label]:
        for h in emitted.get(label, ()):
            if is_desc(h, p):
                below.append(h)
    return below


def maximal_descendants(hierarchy: Hierarchy, p: Prefix, emitted: dict) -> list:
    """``H_p``: emitted strict descendants of ``p`` with no emitted prefix between them and ``p``.

    ``emitted`` maps lattice labels to the emitted prefixes carrying them.
    """
    below = _emitted_descendants(hierarchy, p, emitted)
    is_desc = hierarchy.is_descendant
    return [h for h in below
            if not any(h2 != h and is_desc(h, h2) for h2 in below)]


def conditioned_estimate(hierarchy: Hierarchy, summaries: dict, p: Prefix,
                         emitted: dict, rule: str = "2d", f_min: Optional[dict] = None) -> int:
    """Conservative conditioned count of ``p`` given the prefixes emitted so far.

    ``f_max(p) - sum f_min(H_p) + sum f_max(glb)``, where the glb sum runs
    over pairs of ``H_p``. With ``rule="2d"`` a pair's glb is skipped when it
    also lies below a third member of ``H_p``; with ``rule="nd"`` every pair
    counts. In one dimension members of ``H_p`` never share descendants, so
    both rules reduce to ``f_max(p) - sum f_min(H_p)``.
    """
    if rule not in ("2d", "nd"):
        raise ValueError(f"rule must be '2d' or 'nd', got {rule!r}")
    hp = maximal_descendants(hierarchy, p, emitted)
    est = summaries[p.label].estimate(p).f_max
    for h in hp:
        est -= f_min[h] if f_min is not None else summaries[h.label].estimate(h).f_min
    is_desc = hierarchy.is_descendant
    for a, b in itertools.combinations(hp, 2):
        q = hierarchy.glb(a, b)
        if q is None:
            continue
        if rule == "2d" and any(h3 is not a and h3 is not b and is_desc(q, h3) for h3 in hp):
            continue
        est += summaries[q.label].estimate(q).f_max
    return est


def output_1d(hierarchy: Hierarchy, summaries: dict, total: int, phi) -> tuple:
    """Bottom-up pass with running discounts; returns ``(entries, estimates)``.

    Each prefix carries a discount ``s``. An emitted prefix passes its
    ``f_min`` to its parent, any other prefix passes its own discount on.
    Discounts reach parents even when the parent is not tracked.
    """
    if hierarchy.d != 1:
        raise ValueError(f"1D output needs a one-dimensional hierarchy, got d={hierarchy.d}")
    phi = as_fraction(phi)
    cut = threshold(phi, total)
    entries, estimates = [], {}
    discount: dict = {}
    for level in range(hierarchy.depth, -1, -1):
        summary = summaries[(level,)]
        candidates = set(summary.items())
        candidates.update(discount)
        carry: dict = defaultdict(int)
        for p in sorted(candidates):
            f_min, f_max = summary.estimate(p)
            s = discount.get(p, 0)
            est = f_max - s
            estimates[p] = est
            if est >= cut:
                entries.append(HhhEntry(p, f_min, f_max, est))
                passed = f_min
            else:
                passed = s
            if level and passed:
                carry[hierarchy.parent(p, 0)] += passed
        discount = carry
    return entries, estimates


def output_multi(hierarchy: Hierarchy, summaries: dict, total: int, phi,
                 rule: str = "2d") -> tuple:
    """Level-by-level inclusion-exclusion output for ``d >= 2``.

    ``rule="2d"`` uses the exact two-dimensional correction, ``rule="nd"``
    the pairwise correction that stays conservative in any dimension.
    """
    if hierarchy.d < 2:
        raise ValueError("use output_1d for one-dimensional hierarchies")
    if rule == "2d" and hierarchy.d != 2:
        raise ValueError(f"the 2d rule needs d=2, got d={hierarchy.d}")
    phi = as_fraction(phi)
    cut = threshold(phi, total)
    entries, estimates = [], {}
    emitted: dict = defaultdict(list)
    f_min_of: dict = {}
    for level in range(hierarchy.depth, -1, -1):
        for label in hierarchy.labels_by_level[level]:
            summary = summaries[label]
            for p in sorted(summary.items()):
                est = conditioned_estimate(hierarchy, summaries, p, emitted, rule, f_min_of)
                estimates[p] = est
                if est >= cut:
                    f_min, f_max = summary.estimate(p)
                    entries.append(HhhEntry(p, f_min, f_max, est))
                    f_min_of[p] = f_min
                    # same-level prefixes are never descendants of each other
                    emitted[label].append(p)
    return entries, estimates


class HierarchicalHeavyHitters(BaseEstimator):
    """Streaming approximate hierarchical heavy hitters.

    Keeps one Space Saving summary of ``ceil(1/epsilon)`` counters at every
    lattice node; each inserted element updates the summary of each of its
    generalizations. :meth:`output` turns the summaries into a report whose
    unconditioned bounds are within ``epsilon * N`` and whose omitted
    prefixes all have conditioned count below ``phi * N``.

    Parameters
    ----------
    hierarchy : Hierarchy, default=None
        Domain of the elements. ``None`` means bytewise IPv4 in one dimension.
    epsilon : float, str or Fraction, default=0.01
        Accuracy parameter in (0, 1).
    phi : float, str or Fraction, default=0.05
        Default output threshold in (0, 1).
    mode : {"weighted", "unitary"}, default="weighted"
        Summary implementation. Unitary summaries reject counts above 1.
    capacity : int, default=None
        Counters per node; overrides ``ceil(1/epsilon)``, e.g. ``ceil(3/epsilon)``
        for inputs of a distributed merge.
    """

    def __init__(self, hierarchy=None, epsilon=0.01, phi=0.05, mode="weighted", capacity=None):
        self.hierarchy = hierarchy
        self.epsilon = epsilon
        self.phi = phi
        self.mode = mode
        self.capacity = capacity

    def _initialize(self):
        hierarchy = self.hierarchy if self.hierarchy is not None else Hierarchy.ipv4()
        if not isinstance(hierarchy, Hierarchy):
            raise TypeError(f"hierarchy must be a Hierarchy, got {type(hierarchy).__name__}")
        eps = check_unit_interval("epsilon", self.epsilon)
        check_unit_interval("phi", self.phi)
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        capacity = self.capacity if self.capacity is not None else math.ceil(1 / eps)
        self.hierarchy_ = hierarchy
        self.epsilon_ = eps
        self.capacity_ = int(capacity)
        self.summaries_ = {label: make_summary(self.capacity_, self.mode)
                           for label in hierarchy.labels}
        self.total_ = 0
        self.n_counters_allocated_ = hierarchy.size * self.capacity_
        return self

    def fit(self, X, y=None, sample_weight=None):
        """Reset the state and insert every element of ``X``."""
        self._initialize()
        return self.partial_fit(X, sample_weight=sample_weight)

    def partial_fit(self, X, y=None, sample_weight=None):
        if not hasattr(self, "summaries_"):
            self._initialize()
        rows = check_elements(X, self.hierarchy_)
        weights = check_weights(sample_weight, len(rows))
        if weights is None:
            for row in rows:
                self.insert(row)
        else:
            for row, w in zip(rows, weights):
                self.insert(row, w)
        return self

    def insert(self, element, count: int = 1) -> None:
        """Add ``count`` occurrences of a fully specified element tuple."""
        if not hasattr(self, "summaries_"):
            self._initialize()
        if count < 1:
            raise ValueError(f"count must be a positive integer, got {count!r}")
        if count != 1 and self.mode == UNITARY:
            raise ValueError("unitary mode accepts only counts of 1")
        summaries = self.summaries_
        if self.mode == UNITARY:
            for p in self.hierarchy_.generalizations(element):
                summaries[p.label].update_unitary(p)
        else:
            for p in self.hierarchy_.generalizations(element):
                summaries[p.label].update(p, count)
        self.total_ += count

    def estimate(self, prefix: Prefix):
        """``(f_min, f_max)`` for any prefix of the lattice."""
        check_is_fitted(self, "summaries_")
        return self.summaries_[prefix.label].estimate(prefix)

    def output(self, phi=None, method: str = "auto") -> HhhReport:
        """Compute the approximate HHH report for threshold ``phi``.

        ``method`` is ``"1d"``, ``"2d"``, ``"nd"`` or ``"auto"`` (pick by
        dimension: 1d for d=1, 2d for d=2, nd otherwise).
        """
        check_is_fitted(self, "summaries_")
        phi = check_unit_interval("phi", self.phi if phi is None else phi)
        hierarchy = self.hierarchy_
        if method == "auto":
            method = {1: "1d", 2: "2d"}.get(hierarchy.d, "nd")
        eps_nominal = Fraction(1, self.capacity_)
        if method == "1d":
            if not 2 * eps_nominal < phi:
                warnings.warn(f"phi={phi} <= 2*epsilon; output-size and error bounds do not apply",
                              stacklevel=2)
            entries, estimates = output_1d(hierarchy, self.summaries_, self.total_, phi)
        elif method in ("2d", "nd"):
            entries, estimates = output_multi(hierarchy, self.summaries_, self.total_, phi, method)
        else:
            raise ValueError(f"unknown output method {method!r}")
        return HhhReport(entries, self.epsilon_, phi, self.total_, hierarchy, estimates)

    def conditioned_estimate(self, prefix: Prefix, emitted, rule: Optional[str] = None) -> int:
        """Conditioned-count estimate of any prefix relative to an emitted set."""
        check_is_fitted(self, "summaries_")
        by_label = defaultdict(list)
        for q in emitted:
            by_label[q.label].append(q)
        if rule is None:
            rule = "nd" if self.hierarchy_.d > 2 else "2d"
        return conditioned_estimate(self.hierarchy_, self.summaries_, prefix, by_label, rule)

    def counters_in_use(self) -> int:
        return sum(len(s) for s in self.summaries_.values())
