import pytest

from progroup.catalog import builtin, elementary_abelian
from progroup.chief import cf_of_set, chief_factor_pairs, pair_in, same_multiset
from progroup.smallgroup import is_isomorphic

import oracles as O


def profile(pairs):
    return sorted((p.M.order, p.A.order) for p in pairs)


def test_s3_pairs():
    pairs = chief_factor_pairs(builtin("S3"))
    assert profile(pairs) == [(2, 1), (3, 2)]
    z3 = next(p for p in pairs if p.M.order == 3)
    assert z3.A.order == 2  # all of Aut(Z/3)


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_cyclic_prime_pairs(p):
    pairs = chief_factor_pairs(builtin(f"Z{p}"))
    assert profile(pairs) == [(p, 1)]


def test_s4_pairs():
    pairs = chief_factor_pairs(builtin("S4"))
    assert profile(pairs) == [(2, 1), (3, 2), (4, 6)]
    v4 = next(p for p in pairs if p.M.order == 4)
    assert is_isomorphic(v4.M, builtin("V4")) is not None
    assert is_isomorphic(v4.A, builtin("S3")) is not None  # GL_2(F_2)


def test_a4_pairs():
    pairs = chief_factor_pairs(builtin("A4"))
    assert profile(pairs) == [(3, 1), (4, 3)]


@pytest.mark.parametrize("name", ["D4", "Q8"])
def test_two_groups_have_central_series(name):
    assert profile(chief_factor_pairs(builtin(name))) == [(2, 1)] * 3


SUITE = ["Z2", "Z3", "Z5", "S3", "A4", "S4", "D4", "Q8"]


@pytest.mark.parametrize("name", SUITE)
def test_pairs_match_every_chief_series(name):
    G = builtin(name)
    T = G.table.tolist()
    series = O.chief_series_all(T)
    profiles = {tuple(O.chief_factor_profile(T, s)) for s in series}
    assert len(profiles) == 1
    assert tuple(profile(chief_factor_pairs(G))) in profiles
    assert len(chief_factor_pairs(G)) == len(series[0]) - 1


@pytest.mark.parametrize("name", ["Z3", "S3", "A4", "S4"])
def test_unique_chief_series(name):
    # only one chief series exists, so independence is vacuous here
    assert len(O.chief_series_all(builtin(name).table.tolist())) == 1


@pytest.mark.parametrize("name", ["D4", "Q8", "Z2^3", "D6", "Z6"])
def test_series_independence(name):
    G = builtin(name)
    assert len(O.chief_series_all(G.table.tolist())) >= 2
    base = chief_factor_pairs(G, pick=0)
    for pick in (1, 2):
        assert same_multiset(base, chief_factor_pairs(G, pick=pick))


def test_cf_of_s3():
    cf = cf_of_set([builtin("S3")])
    assert profile(cf) == [(2, 1), (3, 1), (3, 2)]
    for pair in chief_factor_pairs(builtin("S3")):
        assert pair_in(pair, cf)


def test_cf_of_z2():
    assert profile(cf_of_set([builtin("Z2")])) == [(2, 1)]


def test_cf_of_a4_contains_subgroup_factors():
    cf = cf_of_set([builtin("A4")])
    prof = profile(cf)
    assert (4, 3) in prof and (2, 1) in prof
    v4_pairs = chief_factor_pairs(elementary_abelian(2, 2))
    assert all(pair_in(p, cf) for p in v4_pairs)


def test_cf_monotone_in_s():
    small = cf_of_set([builtin("S3")])
    big = cf_of_set([builtin("S4")])
    assert all(pair_in(p, big) for p in small)
