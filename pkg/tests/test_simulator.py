from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings, strategies as st

from cubeadv.adversary import build_instance, universal_lower_bound
from cubeadv.codes import CapExceeded, warmup_family
from cubeadv.packing import EpsilonPacking, assemble, place, weight
from cubeadv.simulator import (
    Algorithm,
    BoundedSpaceViolation,
    ClassNextFit,
    UnknownAlgorithm,
    check_closed_bins,
    make_algorithm,
    ratio_check,
    run,
    simulate,
)


def warm(d):
    return assemble(warmup_family(d), Fr(1, d * d), mode="counted")


def test_warmup_d3_run():
    p = warm(3)
    i = build_instance(p, 2)
    r = run(i, "ClassNextFit")
    assert r.total_bins == 48
    assert r.per_segment == [(2, 32), (3, 16)]
    assert r.offline_bound == 32 and r.ratio == Fr(3, 2) == weight(p)
    assert r.universal_lb == 44
    assert r.to_json()["ratio"] == "3/2"


def test_single_class_run():
    p = EpsilonPacking.from_cubes(2, Fr(1, 4), [place(2, (1, 1), Fr(1, 4))])
    r = run(build_instance(p, 1))
    assert r.total_bins == 2 and r.ratio == 1


def test_warmup_d4_run():
    p = warm(4)
    i = build_instance(p, 3)
    assert i.multiplier == 1296
    r = run(i)
    assert r.total_bins == 14256 == 2 * 3 * 1296 * Fr(11, 6)
    assert r.ratio == Fr(11, 6)


def test_segment_arithmetic():
    a = ClassNextFit(3, Fr(1, 9), 2)
    assert a.on_segment(3, 128) == 16
    assert a.open_count == 0 and a.closed == 16
    b = ClassNextFit(7, Fr(1, 49), 1)
    assert b.on_segment(2, 11) == 11
    c = ClassNextFit(3, Fr(1, 9), 2)
    assert c.on_segment(3, 5) == 1
    assert c.bins[3].remaining == 3
    assert c.on_segment(3, 3) == 0
    assert c.open_count == 0 and c.total_bins() == 1


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_total_equals_2MN_weight(d):
    p = warm(d)
    for M in (1, 2, 5):
        i = build_instance(p, M)
        assert run(i).total_bins == 2 * M * i.multiplier * weight(p)


def test_reduced_scaling_doubles_with_t():
    p = warm(4)
    r1 = run(build_instance(p, 2, scale="reduced", t=1))
    r2 = run(build_instance(p, 2, scale="reduced", t=2))
    assert r2.total_bins == 2 * r1.total_bins
    assert r1.ratio == r2.ratio == weight(p)


def small_instances():
    out = []
    for d in range(2, 6):
        p = warm(d)
        for M in (1, 2, 3):
            for scale, t in (("full", 1), ("reduced", 1), ("reduced", 2)):
                i = build_instance(p, M, scale=scale, t=t)
                if i.total_items <= 10**5:
                    out.append(i)
    return out


def test_counted_equals_per_item():
    cases = small_instances()
    assert len(cases) >= 20
    for i in cases:
        peak = []
        a = make_algorithm("ClassNextFit", i.d, i.eps, i.M)
        a.on_event = lambda alg: peak.append(alg.open_count)
        per = simulate(i, a, mode="peritem")
        cnt = run(i, mode="counted")
        assert per.to_json() == cnt.to_json()
        assert max(peak) <= i.M


def test_per_item_cap():
    i = build_instance(warm(5), 1)
    with pytest.raises(CapExceeded):
        run(i, mode="peritem")


@settings(max_examples=300, deadline=None)
@given(
    st.integers(2, 3),
    st.integers(1, 3),
    st.lists(st.tuples(st.integers(2, 5), st.integers(1, 200)), min_size=1, max_size=8),
)
def test_segment_shortcut_matches_items_on_any_stream(d, M, segs):
    a = ClassNextFit(d, Fr(1, 25), M)
    b = ClassNextFit(d, Fr(1, 25), M)
    for k, c in segs:
        opened = a.on_segment(k, c)
        assert opened == sum(b.on_item(k) for _ in range(c))
        assert a.closed == b.closed
        assert [(x.k, x.used) for x in a.bins.values()] == [(x.k, x.used) for x in b.bins.values()]


def test_bounded_space_hook_fires_on_misbehaviour():
    class Greedy(Algorithm):
        name = "Greedy"

        def __init__(self, *args, **kw):
            super().__init__(*args, **kw)
            self.n = 0

        @property
        def open_count(self):
            return self.n

        def on_item(self, k):
            self.n += 1
            self._event()
            return 1

    a = Greedy(2, Fr(1, 4), 2)
    a.on_item(2)
    a.on_item(2)
    with pytest.raises(BoundedSpaceViolation):
        a.on_item(2)


def test_unknown_algorithm():
    with pytest.raises(UnknownAlgorithm):
        make_algorithm("FirstFitDecreasing", 2, Fr(1, 4), 1)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_materialized_bins_are_valid(d):
    i = build_instance(warm(d), 1, scale="reduced")
    a = make_algorithm("ClassNextFit", d, i.eps, 1, materialize=True)
    r = simulate(i, a)
    assert len(a.closed_bins) == r.total_bins
    assert check_closed_bins(a)
    assert all(len(b.placed) == (b.k - 1) ** d for b in a.closed_bins)


def test_ratio_check_examples():
    p = warm(3)
    r = run(build_instance(p, 2))
    c = ratio_check(r, p)
    assert c.ok and c.equals_weight and c.ratio == Fr(3, 2)
    assert c.universal_ratio == Fr(11, 8) >= Fr(3, 4)
    single = EpsilonPacking.from_cubes(2, Fr(1, 4), [place(2, (1, 1), Fr(1, 4))])
    c1 = ratio_check(run(build_instance(single, 1)), single)
    assert c1.ratio == 1 and c1.ok


def test_universal_lb_reported():
    i = build_instance(warm(4), 2)
    assert run(i).universal_lb == universal_lower_bound(i)
