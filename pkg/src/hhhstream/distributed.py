"""Merging HHH states built independently over parts of a distributed stream."""

from __future__ import annotations

import io
import json
import math
import zipfile
from dataclasses import dataclass
from fractions import Fraction

from sklearn.base import clone
from sklearn.utils.validation import check_is_fitted

from . import space_saving
from .core import HierarchicalHeavyHitters
from .lattice import Hierarchy
from .validation import as_fraction, check_unit_interval

SCHEMA_VERSION = 1
_FIXED_DATE = (1980, 1, 1, 0, 0, 0)


@dataclass(frozen=True)
class MergePlan:
    k: int
    capacity: int
    epsilon_effective: Fraction  # 3 * (1 / capacity): accuracy of one merge


def local_capacity(epsilon) -> int:
    """Counters per node for each distributed site: ``ceil(3/epsilon)``."""
    return math.ceil(3 / check_unit_interval("epsilon", epsilon))


def plan_merge(states: list) -> MergePlan:
    if not states:
        raise ValueError("merge needs at least one state")
    for s in states:
        check_is_fitted(s, "summaries_")
    first = states[0]
    for s in states[1:]:
        if s.hierarchy_ != first.hierarchy_:
            raise ValueError("cannot merge states over different hierarchies")
        if s.epsilon_ != first.epsilon_ or s.capacity_ != first.capacity_:
            raise ValueError("cannot merge states with different epsilon or capacity")
        if s.mode != first.mode:
            raise ValueError("cannot merge states of different modes")
    return MergePlan(len(states), first.capacity_, Fraction(3, first.capacity_))


def merge_states(states: list) -> HierarchicalHeavyHitters:
    """One-pass k-way merge of every lattice node's summaries.

    The result has the inputs' parameters and per-node capacity, total
    ``N = sum N_k``, and ``max_width_``: the largest ``f_max - f_min`` any
    prefix can have after the merge.
    """
    plan = plan_merge(states)
    first = states[0]
    out = clone(first)
    out._initialize()
    for label in out.hierarchy_.labels:
        out.summaries_[label] = space_saving.merge(
            [s.summaries_[label] for s in states], plan.capacity)
    out.total_ = sum(s.total_ for s in states)
    out.merge_plan_ = plan
    out.max_width_ = max_estimate_width(out)
    return out


def max_estimate_width(state: HierarchicalHeavyHitters) -> int:
    """Largest ``f_max - f_min`` over tracked and untracked items of every node."""
    widest = 0
    for summary in state.summaries_.values():
        widest = max(widest, summary.untracked_bound())
        for c in summary.counters():
            widest = max(widest, c.error)
    return widest


def save_state(state: HierarchicalHeavyHitters, path) -> None:
    """Write a manifest plus one serialized summary per lattice node into a zip."""
    check_is_fitted(state, "summaries_")
    hierarchy = state.hierarchy_
    labels = list(hierarchy.labels)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "hierarchy": hierarchy.to_dict(),
        "epsilon": str(state.epsilon_),
        "phi": str(as_fraction(state.phi)),
        "mode": state.mode,
        "capacity": state.capacity_,
        "N": state.total_,
        "nodes": [list(label) for label in labels],
    }
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_STORED) as zf:
        _write(zf, "manifest.json", json.dumps(manifest, indent=2, sort_keys=True).encode())
        for idx, label in enumerate(labels):
            blob = space_saving.to_bytes(state.summaries_[label], hierarchy.encode)
            _write(zf, f"nodes/{idx:04d}.bin", blob)


def _write(zf: zipfile.ZipFile, name: str, data: bytes) -> None:
    info = zipfile.ZipInfo(name, date_time=_FIXED_DATE)
    info.external_attr = 0o644 << 16
    zf.writestr(info, data)


def load_state(path) -> HierarchicalHeavyHitters:
    with zipfile.ZipFile(path) as zf:
        manifest = json.loads(zf.read("manifest.json"))
        if manifest.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported state schema {manifest.get('schema_version')!r}")
        hierarchy = Hierarchy.from_dict(manifest["hierarchy"])
        state = HierarchicalHeavyHitters(
            hierarchy=hierarchy, epsilon=Fraction(manifest["epsilon"]),
            phi=Fraction(manifest["phi"]), mode=manifest["mode"],
            capacity=manifest["capacity"])
        state._initialize()
        nodes = [tuple(n) for n in manifest["nodes"]]
        if sorted(nodes) != sorted(hierarchy.labels):
            raise ValueError("manifest node list does not match the hierarchy")
        for idx, label in enumerate(nodes):
            blob = zf.read(f"nodes/{idx:04d}.bin")
            summary = space_saving.from_bytes(blob, hierarchy.decode)
            if summary.total != manifest["N"]:
                raise ValueError(f"node {label} total {summary.total} != N {manifest['N']}")
            state.summaries_[label] = summary
        state.total_ = manifest["N"]
    return state


def state_bytes(state: HierarchicalHeavyHitters) -> bytes:
    buf = io.BytesIO()
    save_state(state, buf)
    return buf.getvalue()
