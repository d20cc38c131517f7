from fractions import Fraction as Fr
import math

import pytest

from cubeadv.adversary import (
    ExactnessError,
    InstanceStream,
    build_instance,
    instance_from_json,
    instance_from_text,
    instance_to_json,
    instance_to_text,
    max_grid_packing,
    offline_bound,
    per_class_capacity,
    universal_lower_bound,
    validate_assignment,
)
from cubeadv.codes import CapExceeded, build_separated_family, warmup_family
from cubeadv.packing import EpsilonPacking, assemble, homogeneous_packing, place, weight


@pytest.fixture(scope="module")
def warm3():
    return assemble(warmup_family(3), Fr(1, 9))


def single_class():
    return EpsilonPacking.from_cubes(2, Fr(1, 4), [place(2, (1, 1), Fr(1, 4))])


def test_instance_warmup_full(warm3):
    i = build_instance(warm3, 2)
    assert i.multiplier == 8
    assert i.segments == [(2, 32), (3, 128)]
    assert i.nu() == {2: 1, 3: 4} and i.weight() == Fr(3, 2)


def test_instance_reduced(warm3):
    i = build_instance(warm3, 1, scale="reduced", t=1)
    assert i.multiplier == 8 and i.segments == [(2, 16), (3, 64)]
    j = build_instance(warm3, 1, scale="reduced", t=3)
    assert j.segments == [(2, 48), (3, 192)]


def test_instance_single_class():
    i = build_instance(single_class(), 1)
    assert i.multiplier == 1 and i.segments == [(2, 2)]


def test_instance_rejects_lower_bound_counts():
    p = assemble(build_separated_family(1000, seed=42), mode="counted")
    with pytest.raises(ExactnessError):
        build_instance(p, 2)


def test_instance_digit_cap():
    p = assemble(warmup_family(12), mode="counted")
    with pytest.raises(CapExceeded):
        build_instance(p, 2, max_digits=20)


def test_offline_bound_examples(warm3):
    assert offline_bound(build_instance(warm3, 2)).bin_count == 32
    assert offline_bound(build_instance(warm3, 1, scale="reduced")).bin_count == 16
    tiny = build_instance(single_class(), 1)
    cert = offline_bound(tiny)
    assert cert.bin_count == 2
    assert cert.assignment == [(2, 0, (1, 1)), (2, 1, (1, 1))]
    assert validate_assignment(cert, tiny)


def test_offline_assignment_warmup(warm3):
    i = build_instance(warm3, 2)
    cert = offline_bound(i)
    assert len(cert.bins()) == 32
    assert validate_assignment(cert, i)


def test_assignment_rejects_crowded_bin(warm3):
    i = build_instance(warm3, 2)
    cert = offline_bound(i)
    k, _, w = cert.assignment[0]
    cert.assignment[1] = (k, 0, w)
    assert not validate_assignment(cert, i)


def test_per_class_capacity():
    assert per_class_capacity(2, 10) == 1
    assert per_class_capacity(3, 3) == 8
    assert per_class_capacity(5, 2) == 16


@pytest.mark.parametrize(
    "k, d, eps, steps, expected",
    [(5, 2, Fr(1, 25), 1, 16), (3, 2, Fr(1, 9), 3, 4), (3, 3, Fr(1, 9), 1, 8), (4, 2, Fr(1, 16), 2, 9)],
)
def test_grid_search_matches_capacity(k, d, eps, steps, expected):
    assert max_grid_packing(k, d, eps, steps) == expected == per_class_capacity(k, d)


def test_universal_lower_bound_examples(warm3):
    i = build_instance(warm3, 2)
    assert universal_lower_bound(i) == 44
    assert universal_lower_bound(i) >= i.M * i.multiplier * weight(warm3) == 24
    assert universal_lower_bound(build_instance(single_class(), 1)) == 1


@pytest.mark.parametrize("d", [2, 3, 4, 5])
@pytest.mark.parametrize("M", [1, 2, 3, 7])
def test_universal_bound_invariants(d, M):
    p = assemble(warmup_family(d), mode="counted")
    i = build_instance(p, M)
    lb = universal_lower_bound(i)
    w = weight(p)
    assert lb >= M * i.multiplier * w
    assert Fr(lb, offline_bound(i).bin_count) >= w / 2


def test_universal_bound_homogeneous():
    p = homogeneous_packing(3, 2, Fr(1, 9))
    i = build_instance(p, 2)
    assert i.segments == [(3, 2 * 2 * 4 * 4)]
    assert universal_lower_bound(i) == 64 // 4 - 2


def test_stream_validation():
    with pytest.raises(ValueError):
        InstanceStream(2, Fr(1, 4), [(3, 2), (2, 2)], 1, 1)
    with pytest.raises(ValueError):
        InstanceStream(2, Fr(1, 4), [(2, 0)], 1, 1)


def test_items_expansion_and_cap(warm3):
    i = build_instance(warm3, 2)
    items = list(i.items())
    assert items == [2] * 32 + [3] * 128
    with pytest.raises(CapExceeded):
        list(i.items(cap=100))


def test_text_and_json_round_trip(warm3):
    i = build_instance(warm3, 2)
    text = instance_to_text(i)
    assert text.splitlines()[1:] == ["2 32", "3 128"]
    back = instance_from_text(text)
    assert back.segments == i.segments and back.M == 2 and back.multiplier == 8
    assert instance_to_text(back) == text
    j = instance_from_json(instance_to_json(i))
    assert j == i


def test_huge_counts_exact():
    p = assemble(warmup_family(30), mode="counted")
    i = build_instance(p, 2)
    assert i.multiplier == math.prod((k - 1) ** 30 for k in range(2, 31))
    assert i.weight() == weight(p)
    assert instance_from_text(instance_to_text(i)).segments == i.segments
