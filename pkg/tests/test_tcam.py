import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from hhhstream import HierarchicalHeavyHitters, Hierarchy
from hhhstream.io import gen_zipf
from hhhstream.oracle import exact_counts
from hhhstream.tcam import (TcamCostModel, TcamSimulator, tag_bits, ternary_key, tcam_run,
                            tcam_single_instance_run)

from conftest import H1, H2, corpus

IP1 = Hierarchy.ipv4()


def software_state(h, stream, eps):
    return HierarchicalHeavyHitters(hierarchy=h, epsilon=eps, mode="unitary").fit(stream)


def test_tag_width():
    assert tag_bits(5) == 3
    assert tag_bits(4) == 2
    assert tag_bits(25) == 5
    assert tag_bits(1) == 1


def test_ternary_key_layout():
    p = IP1.parse("10.1.*.*")
    key = ternary_key(IP1, p, tag=2, width=3)
    assert key == "00001010" + "00000001" + "*" * 16 + "010"
    assert len(key) == 32 + 3


def test_one_search_per_node():
    stream = gen_zipf(200, 500, 1.1, 0, IP1)
    sim = tcam_run(stream, IP1, 0.1)
    assert sim.counts.packets == 500
    assert sim.counts.searches == 5 * 500
    for name, ops in sim.report()["per_instance"].items():
        assert ops["searches"] == 500


def test_root_as_plain_counter():
    stream = gen_zipf(200, 500, 1.1, 0, IP1)
    sim = tcam_run(stream, IP1, 0.1, include_root=False)
    assert sim.counts.searches == 4 * 500
    assert sim.estimate(IP1.root) == (500, 500)
    assert sim.report()["instances"] == 4


@pytest.mark.parametrize("h, eps", [(IP1, 0.1), (H1, 0.05), (H2, 0.1)])
def test_state_equals_software_unitary_path(h, eps):
    for name, stream in corpus(h, 1200, range(4)):
        sim = tcam_run(stream, h, eps)
        sw = software_state(h, stream, eps)
        for label in h.labels:
            assert sim.counters(label) == sw.summaries_[label].counters(), (name, label)
        assert sim.max_ops_per_instance_update <= 4


@given(st.lists(st.integers(0, 40), min_size=1, max_size=150), st.integers(2, 5))
def test_state_equality_property(values, m):
    h = Hierarchy.uniform(1, 8, 2)
    stream = [(v * 5,) for v in values]
    eps = Fraction(1, m)
    sim = tcam_run(stream, h, eps)
    sw = software_state(h, stream, eps)
    for label in h.labels:
        assert sim.counters(label) == sw.summaries_[label].counters()
    exact = exact_counts(stream, h)
    for p in exact.counts:
        assert sim.estimate(p) == sw.estimate(p)


def test_operation_accounting_by_hand():
    # one instance of 2 entries, 1D with a single level below the root
    h = Hierarchy.uniform(1, 4, 4)
    sim = TcamSimulator(h, Fraction(1, 2), include_root=False)
    for v in (1, 2, 1, 3):
        sim.process((v,))
    # insert, insert, hit, replace
    assert (sim.counts.searches, sim.counts.reads, sim.counts.writes) == (4, 1 + 2, 1 + 1 + 1 + 1)
    assert sim.counts.total == 2 + 2 + 3 + 4


def test_worst_case_is_four_per_instance():
    stream = [(i,) for i in range(300)]  # every packet misses once full
    sim = tcam_run(stream, IP1, 0.1)
    assert sim.max_ops_per_instance_update == 4


def test_rejects_weighted_records():
    with pytest.raises(ValueError):
        tcam_run([((1,), 3)], IP1, 0.1)
    tcam_run([((1,), 1)], IP1, 0.1)


def test_single_instance_accuracy():
    eps = Fraction(1, 10)
    for name, stream in corpus(H1, 1500, range(6)):
        sim = tcam_single_instance_run(stream, H1, eps)
        assert sim.counts.searches == H1.size * len(stream)
        exact = exact_counts(stream, H1)
        n = exact.total
        for p, f in exact.counts.items():
            lo, hi = sim.estimate(p)
            assert lo <= f <= hi, name
            assert hi - lo <= eps * n, name


def test_cost_model_file(tmp_path):
    path = tmp_path / "cost.json"
    path.write_text(json.dumps({"min_update": 0, "hit_read": 0}))
    cost = TcamCostModel.from_file(path)
    sim = tcam_run([(1,), (1,)], IP1, 0.5, cost=cost)
    # first packet inserts (2 ops), second hits (search + write)
    assert sim.counts.total == 5 * 2 + 5 * 2


@pytest.mark.parametrize("data", [{"bogus": 1}, {"search": -1}, {"min_update_kind": "erase"}])
def test_cost_model_validation(data):
    with pytest.raises(ValueError):
        TcamCostModel.from_dict(data)


def test_report_is_deterministic():
    stream = gen_zipf(500, 2000, 1.1, 7, IP1)
    a = json.dumps(tcam_run(stream, IP1, 0.05).report(), sort_keys=True)
    b = json.dumps(tcam_run(stream, IP1, 0.05).report(), sort_keys=True)
    assert a == b
