import random
from fractions import Fraction

import pytest

from hhhstream import HierarchicalHeavyHitters, Hierarchy
from hhhstream.distributed import (load_state, local_capacity, max_estimate_width,
                                   merge_states, save_state, state_bytes)
from hhhstream.oracle import check_report, exact_counts

from conftest import H1, H2, corpus


def site(h, stream, eps=Fraction(1, 20), phi=Fraction(1, 5), mode="weighted"):
    return HierarchicalHeavyHitters(hierarchy=h, epsilon=eps, phi=phi, mode=mode,
                                    capacity=local_capacity(eps)).fit(stream)


def test_local_capacity():
    assert local_capacity(Fraction(1, 20)) == 60
    assert local_capacity(0.01) == 300


def test_single_state_merge_is_identity():
    stream = corpus(H2, 800, [1])[0][1]
    s = site(H2, stream)
    out = merge_states([s])
    for p in exact_counts(stream, H2).counts:
        assert out.estimate(p) == s.estimate(p)
    assert out.output().entries == s.output().entries


def test_disjoint_unsaturated_merge_is_exact():
    h = H1
    a = site(h, [(1,), (2,), (2,)])
    b = site(h, [(40000,), (40000,), (50000,)])
    out = merge_states([a, b])
    exact = exact_counts([(1,), (2,), (2,), (40000,), (40000,), (50000,)], h)
    assert out.total_ == 6
    for p, f in exact.counts.items():
        assert out.estimate(p) == (f, f)


@pytest.mark.parametrize("h", [H1, H2])
@pytest.mark.parametrize("mode", ["weighted", "unitary"])
def test_four_way_merge_three_eps(h, mode):
    eps, phi = Fraction(1, 20), Fraction(1, 5)
    for seed in range(0, 12, 4):
        parts = [s for _, s in corpus(h, 700, range(seed, seed + 4))]
        merged = merge_states([site(h, p, eps, phi, mode) for p in parts])
        whole = [e for p in parts for e in p]
        exact = exact_counts(whole, h)
        n = exact.total
        assert merged.total_ == n
        assert merged.max_width_ <= 3 * eps * n
        for p, f in exact.counts.items():
            lo, hi = merged.estimate(p)
            assert lo <= f <= hi
            assert hi - lo <= 3 * eps * n
        assert check_report(exact, phi, 3 * eps, merged.output()).passed


def test_merge_order_does_not_change_estimates():
    parts = [s for _, s in corpus(H2, 500, range(4))]
    states = [site(H2, p) for p in parts]
    a = merge_states(states)
    b = merge_states(states[::-1])
    for p in exact_counts([e for s in parts for e in s], H2).counts:
        assert a.estimate(p) == b.estimate(p)
    assert a.output().entries == b.output().entries


def test_merge_rejects_mismatched_inputs():
    a = site(H1, [(1,)])
    with pytest.raises(ValueError):
        merge_states([])
    with pytest.raises(ValueError):
        merge_states([a, site(H2, [(1, 1)])])
    with pytest.raises(ValueError):
        merge_states([a, site(H1, [(1,)], eps=Fraction(1, 10))])
    with pytest.raises(ValueError):
        merge_states([a, site(H1, [(1,)], mode="unitary")])


def test_state_file_round_trip(tmp_path):
    stream = corpus(H2, 800, [2])[0][1]
    s = site(H2, stream, mode="unitary")
    path = tmp_path / "s.zip"
    save_state(s, path)
    back = load_state(path)
    assert back.get_params() == s.get_params() | {"epsilon": back.epsilon, "phi": back.phi}
    assert back.total_ == s.total_
    assert all(back.summaries_[l] == s.summaries_[l] for l in H2.labels)
    assert state_bytes(back) == state_bytes(s) == path.read_bytes()


def test_saved_merge_matches_in_memory_merge(tmp_path):
    parts = [s for _, s in corpus(H1, 600, range(4))]
    states = [site(H1, p) for p in parts]
    paths = []
    for i, s in enumerate(states):
        paths.append(tmp_path / f"{i}.zip")
        save_state(s, paths[-1])
    a = merge_states(states)
    b = merge_states([load_state(p) for p in paths])
    assert state_bytes(a) == state_bytes(b)
    assert b.max_width_ == max_estimate_width(b)


def test_load_rejects_inconsistent_totals(tmp_path):
    import zipfile
    s = site(H1, [(1,), (2,)])
    path = tmp_path / "s.zip"
    save_state(s, path)
    bad = tmp_path / "bad.zip"
    with zipfile.ZipFile(path) as src, zipfile.ZipFile(bad, "w") as dst:
        for item in src.infolist():
            data = src.read(item)
            if item.filename == "manifest.json":
                data = data.replace(b'"N": 2', b'"N": 3')
            dst.writestr(item, data)
    with pytest.raises(ValueError):
        load_state(bad)
