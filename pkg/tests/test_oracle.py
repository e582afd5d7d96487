import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from hhhstream import HierarchicalHeavyHitters, Hierarchy
from hhhstream.core import HhhEntry, HhhReport
from hhhstream.oracle import (check_report, conditioned_count_wrt, conditioned_counts,
                              exact_counts, exact_hhh, exact_report)

from worked2d import A, B, C, D, WORKED_EXACT, W, X, Y, Z, worked_stream, ip

IP2 = Hierarchy.ipv4(dims=2)
TINY = Hierarchy.uniform(2, 2, 1)


@pytest.fixture(scope="module")
def worked():
    return exact_counts(worked_stream(), IP2)


def test_worked_unconditioned_counts(worked):
    f = lambda text: worked.f(IP2.parse(text))
    assert worked.total == 40
    assert f("(*.*.*.*,*.*.*.*)") == 40
    assert f("(10.11.12.13,20.21.22.23)") == 10
    # heavy pair plus the ten (a.b.c.i, w.x.y.i)
    assert f("(10.11.12.*,20.21.22.*)") == 20
    # ... plus the ten (a.b.i.d, w.x.y.i)
    assert f("(10.11.*.*,20.21.22.*)") == 30
    # heavy pair, (a.b.c.i, w.x.y.i) and (a.b.c.i, w.i.y.z)
    assert f("(10.11.12.*,20.*.*.*)") == 30


def test_worked_exact_hhh(worked):
    found = exact_hhh(worked, Fraction(1, 4))
    assert {IP2.format(p): F for p, F in found.items()} == WORKED_EXACT


def test_worked_root_conditioned_count(worked):
    chosen = list(exact_hhh(worked, Fraction(1, 4)))
    assert conditioned_count_wrt(worked, IP2.root, chosen) == 0 < 10


def test_empty_stream():
    ex = exact_counts([], IP2)
    assert ex.counts == {} and ex.total == 0
    assert exact_hhh(ex, 0.5) == {}


def test_single_weighted_element():
    e = (ip(1, 2, 3, 4), ip(5, 6, 7, 8))
    ex = exact_counts([(e, 7)], IP2)
    assert all(ex.f(p) == 7 for p in IP2.generalizations(e))
    assert len(ex.counts) == 25


def test_rejects_non_positive_counts():
    with pytest.raises(ValueError):
        exact_counts([((1, 2), 0)], IP2)


def test_single_repeated_element_is_its_own_hhh():
    e = (ip(A, B, C, D), ip(W, X, Y, Z))
    ex = exact_counts([e] * 5, IP2)
    for phi in ("0.1", "0.5", "1"):
        assert list(exact_hhh(ex, phi)) == [IP2.element(e)]


def test_phi_one_keeps_only_full_mass_items():
    ex = exact_counts([(1,), (1,), (2,)], Hierarchy.ipv4())
    found = exact_hhh(ex, 1)
    # 0.0.0.1 and 0.0.0.2 first meet at 0.0.0.*
    assert [Hierarchy.ipv4().format(p) for p in found] == ["0.0.0.*"]


def test_conditioned_count_with_nothing_chosen(worked):
    for p in worked.counts:
        assert conditioned_count_wrt(worked, p, []) == worked.f(p)


def test_conditioned_count_fully_covered():
    h = Hierarchy.ipv4()
    ex = exact_counts([(ip(9, 9, 9, 9),)] * 4, h)
    assert conditioned_count_wrt(ex, h.parse("9.*.*.*"), [h.parse("9.9.9.9")]) == 0
    assert conditioned_count_wrt(ex, h.parse("9.*.*.*"), [h.parse("9.9.*.*")]) == 0
    # a chosen prefix only discounts its strict ancestors
    assert conditioned_count_wrt(ex, h.parse("9.9.9.9"), [h.parse("9.9.9.9")]) == 4


def test_check_report_accepts_exact_report(worked):
    report = exact_report(worked, Fraction(1, 4))
    verdict = check_report(worked, Fraction(1, 4), 0, report)
    assert verdict.passed
    assert verdict.to_dict(IP2) == {"passed": True, "accuracy_violations": [],
                                    "coverage_violations": []}


def test_check_report_flags_bad_interval(worked):
    report = exact_report(worked, Fraction(1, 4))
    e = report.entries[0]
    report.entries[0] = HhhEntry(e.prefix, e.f_min + 1, e.f_max + 1, e.F_prime)
    verdict = check_report(worked, Fraction(1, 4), Fraction(1, 10), report)
    assert not verdict.passed
    assert [v[0] for v in verdict.accuracy_violations] == [e.prefix]


def test_check_report_flags_wide_interval(worked):
    report = exact_report(worked, Fraction(1, 4))
    e = report.entries[0]
    report.entries[0] = HhhEntry(e.prefix, 0, 40, e.F_prime)
    assert check_report(worked, Fraction(1, 4), Fraction(1, 10), report).accuracy_violations


def test_check_report_flags_missing_hhh(worked):
    report = exact_report(worked, Fraction(1, 4))
    dropped = report.entries.pop()
    verdict = check_report(worked, Fraction(1, 4), 0, report)
    assert not verdict.passed
    assert dropped.prefix in [p for p, _ in verdict.coverage_violations]


@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)), min_size=1, max_size=80),
       st.sampled_from([Fraction(1, 10), Fraction(1, 4), Fraction(1, 2)]))
def test_exact_set_passes_its_own_check(stream, phi):
    ex = exact_counts(stream, TINY)
    assert check_report(ex, phi, 0, exact_report(ex, phi)).passed
    counts = conditioned_counts(ex, exact_hhh(ex, phi))
    assert all(v >= 0 for v in counts.values())


@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)), min_size=1, max_size=80),
       st.fractions(Fraction(1, 20), Fraction(1, 2)), st.fractions(Fraction(1, 20), Fraction(1, 2)))
def test_leaf_heavy_hitters_shrink_as_phi_grows(stream, p1, p2):
    lo, hi = sorted((p1, p2))
    ex = exact_counts(stream, TINY)
    leaves = lambda phi: {p for p in exact_hhh(ex, phi) if p.label == TINY.heights}
    assert leaves(hi) <= leaves(lo)


# --- inclusion-exclusion against the oracle ---------------------------------------

def _exact_tiny(seed):
    rng = random.Random(seed)
    stream = []
    for e in itertools.product(range(4), repeat=2):
        stream.extend([e] * rng.randrange(1, 6))
    est = HierarchicalHeavyHitters(hierarchy=TINY, epsilon=0.5, capacity=64, phi=0.5).fit(stream)
    return est, exact_counts(stream, TINY)


@pytest.mark.parametrize("seed", range(2))
def test_inclusion_exclusion_every_small_set(seed):
    est, ex = _exact_tiny(seed)
    prefixes = list(TINY.all_prefixes())
    root = TINY.root
    below = [q for q in prefixes if q != root]
    for size in range(4):
        for chosen in itertools.combinations(below, size):
            assert est.conditioned_estimate(root, chosen, "2d") == \
                conditioned_count_wrt(ex, root, chosen)


@given(st.integers(0, 48), st.sets(st.integers(0, 48), max_size=12), st.integers(0, 3))
def test_inclusion_exclusion_random_sets(pi, chosen_idx, seed):
    est, ex = _exact_tiny(seed)
    prefixes = list(TINY.all_prefixes())
    p = prefixes[pi]
    chosen = [prefixes[i] for i in sorted(chosen_idx)]
    assert est.conditioned_estimate(p, chosen, "2d") == conditioned_count_wrt(ex, p, chosen)
    assert est.conditioned_estimate(p, chosen, "nd") >= conditioned_count_wrt(ex, p, chosen)
