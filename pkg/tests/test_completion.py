from math import lcm

import pytest

from progroup import perm as P
from progroup.bounds import BOUNDS
from progroup.catalog import builtin
from progroup.completion import is_level, pro_completion, quotient_map_exists, subdirect_witness
from progroup.errors import BoundExceeded, InputError
from progroup.smallgroup import SmallGroup, direct_product, generating_tuple, is_isomorphic

import oracles as O


def test_z2_rank_two_is_klein():
    C = pro_completion(2, [builtin("Z2")])
    assert C.order() == 4
    assert is_isomorphic(C.small_group(), builtin("V4")) is not None


def test_s3_rank_one_is_cyclic_of_order_six():
    C = pro_completion(1, [builtin("S3")])
    S3 = builtin("S3")
    assert C.order() == lcm(*[int(o) for o in S3.element_orders]) == 6
    assert is_isomorphic(C.small_group(), builtin("Z6")) is not None


def test_z4_rank_two():
    C = pro_completion(2, [builtin("Z4")])
    assert C.order() == 16
    assert is_isomorphic(C.small_group(), direct_product(builtin("Z4"), builtin("Z4"))) is not None


@pytest.mark.parametrize("names,n", [(["S3"], 2), (["Z2", "Z3"], 2), (["V4"], 2), (["D4"], 2),
                                     (["Q8"], 2), (["Z2"], 3), (["Z3"], 2), (["A4"], 2)])
def test_order_matches_unpruned_product(names, n):
    S = [builtin(x) for x in names]
    assert pro_completion(n, S).order() == O.completion_order([G.table.tolist() for G in S], n)


@pytest.mark.parametrize("names,n", [(["S3"], 2), (["D4"], 2)])
def test_pruning_and_dedup_preserve_the_group(names, n):
    S = [builtin(x) for x in names]
    full = pro_completion(n, S, dedup=False, prune=False)
    small = pro_completion(n, S)
    assert full.order() == small.order()
    assert small.degree <= full.degree


@pytest.mark.parametrize("names,n", [(["S3"], 2), (["Z2", "Z3"], 2), (["A4"], 2)])
def test_coordinates_reproducible(names, n):
    S = [builtin(x) for x in names]
    C = pro_completion(n, S)
    assert len(C.generators) == n
    for k in range(len(C.hom_list)):
        G, images = C.coordinate_hom(k)
        assert G in S
        assert quotient_map_exists(C, G, images)


def test_every_group_in_s_is_a_quotient():
    S = [builtin("S3"), builtin("D4")]
    C = pro_completion(2, S)
    for G in S:
        tuples = [(a, b) for a in range(G.order) for b in range(G.order) if G.generates((a, b))]
        assert all(quotient_map_exists(C, G, t) for t in tuples)


def test_non_quotient_rejected():
    C = pro_completion(2, [builtin("Z2")])
    Z4 = builtin("Z4")
    assert not quotient_map_exists(C, Z4, (Z4.marked[0], 0))


def test_rejects_rank_zero():
    with pytest.raises(InputError):
        pro_completion(0, [builtin("Z2")])


def test_rejects_empty_set():
    with pytest.raises(InputError):
        pro_completion(2, [])


def test_degree_bound_names_dominant_group():
    with pytest.raises(BoundExceeded, match="S3"):
        pro_completion(3, [builtin("Z2"), builtin("S3")], degree_bound=20)


def test_work_bound_stops_large_completion(monkeypatch):
    monkeypatch.setattr(BOUNDS, "completion_work", 10 ** 7)
    with pytest.raises(BoundExceeded, match="work bound"):
        pro_completion(2, [builtin("S5")])


def test_level_quotient():
    assert is_level(builtin("Z2"), [builtin("S3")])


def test_level_exponent_obstruction():
    assert not is_level(builtin("Z4"), [builtin("Z2")])


def test_level_subdirect_product():
    # S3 x A3 on six points sits inside S3 x S3 by construction
    gens = [P.from_cycles([(0, 1)], 6), P.from_cycles([(0, 1, 2)], 6), P.from_cycles([(3, 4, 5)], 6)]
    E = SmallGroup.from_perms(gens)
    assert E.order == 18
    assert is_isomorphic(E, direct_product(builtin("S3"), builtin("Z3"))) is not None
    assert is_level(E, [builtin("S3")])


@pytest.mark.parametrize("name,S,expected", [
    ("V4", ["Z2"], True), ("Z4", ["V4"], False), ("S3", ["Z6"], False), ("Z6", ["S3"], True),
    ("Z3^2", ["S3"], True), ("Z2^3", ["Z2"], True), ("Z9", ["Z3"], False)])
def test_level_forced_cases(name, S, expected):
    assert is_level(builtin(name), [builtin(x) for x in S]) == expected


@pytest.mark.parametrize("name,S", [("Q8", ["D4"]), ("D4", ["Q8"]), ("V4", ["Q8"]), ("A4", ["S4"]),
                                    ("S3", ["D6"]), ("Z4", ["Q8"]), ("Z2xZ4", ["D4"]), ("D4", ["Z2xZ4"])])
def test_level_shortcut_agrees_with_completion(name, S):
    E = builtin(name)
    Sg = [builtin(x) for x in S]
    d = 2
    C = pro_completion(d, Sg)
    direct = quotient_map_exists(C, E, generating_tuple(E, d))
    assert is_level(E, Sg) == direct
    if subdirect_witness(E, Sg):
        assert direct
