from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from progroup import intervals as I
from progroup.catalog import builtin
from progroup.extensions import HExtension, NonabelianKernel, irreducible_H_modules
from progroup.measure import (achievable, distribution_table, engine_for, generation_probability,
                              lambda_value, mu_u, mu_un, multiplicity, power_of, sur_count_completion)

import oracles as O

B = builtin
Z1, Z2, Z3, Z4, V4 = (B(x) for x in ["Z1", "Z2", "Z3", "Z4", "V4"])


def trivial_module(H, p):
    return next(m for m in irreducible_H_modules(H, p, 1) if m.is_trivial_action())


def ext_over_trivial(E):
    return HExtension(E, Z1, np.zeros(E.order, dtype=np.int64), frozenset(range(E.order)))


def keyed(table):
    """Library table rows re-keyed by the oracle's invariant of each class."""
    out = {}
    for H, v in table.rows:
        k = O.group_key(H.table.tolist())
        assert k not in out
        out[k] = v.exact
    return out


# -- generation probability ---------------------------------------------------

def test_generation_probability_empty():
    assert generation_probability([], 2, 0) == 1


def test_generation_probability_klein():
    G = trivial_module(Z1, 2)
    spanning = sum(1 for a, b in product(product(range(2), repeat=2), repeat=2)
                   if O.rank_mod_p([a, b], 2) == 2)
    assert generation_probability([(G, 2)], 2, 0) == Fraction(spanning, 16) == Fraction(3, 8)


def test_generation_probability_a5():
    A5 = B("A5")
    T = A5.table.tolist()
    full = frozenset(range(60))
    hits = sum(1 for g in range(60) if O.normal_closure(T, [g]) == full)
    assert generation_probability([(NonabelianKernel(A5), 1)], 1, 0) == Fraction(hits, 60) == Fraction(59, 60)


# -- lifting counts -------------------------------------------------------------

def test_sur_count_two_element_chain():
    assert sur_count_completion(3, ext_over_trivial(Z2)) == 7


def test_sur_count_not_level_is_zero():
    assert sur_count_completion(3, ext_over_trivial(Z4), [Z2]) == 0


def test_sur_count_klein():
    assert sur_count_completion(2, ext_over_trivial(V4)) == O.generating_tuples(V4.table.tolist(), 2) == 6


@pytest.mark.parametrize("name,n", [("S3", 2), ("Z6", 2), ("D4", 2), ("Q8", 2), ("A4", 2), ("Z2^3", 3), ("Z3", 1)])
def test_sur_count_over_trivial_base_is_generating_tuples(name, n):
    E = B(name)
    assert sur_count_completion(n, ext_over_trivial(E)) == O.generating_tuples(E.table.tolist(), n)


# -- multiplicities -------------------------------------------------------------

def test_multiplicity_elementary_rank():
    m = multiplicity([Z2], 3, Z1, trivial_module(Z1, 2))
    # R is the whole completion (Z/2)^n
    assert 2 ** m == O.completion_order([Z2.table.tolist()], 3) == 8


def test_multiplicity_over_z2():
    assert multiplicity([Z2], 2, Z2, trivial_module(Z2, 2)) == 1


def test_multiplicity_not_level():
    assert multiplicity([Z3], 2, Z2, trivial_module(Z2, 3)) == 0
    assert mu_un([Z3], Z2, 2, 0).exact == 0


NESTINGS = [(["Z2"], ["Z2", "Z4"], ["Z2", "Z4", "V4"]), (["Z3"], ["Z3", "S3"]), (["Z2"], ["Z2^3"], ["Z2^3", "Z2xZ4"])]


@pytest.mark.parametrize("chain", NESTINGS)
def test_multiplicity_monotone_in_S(chain):
    for H, p, n in [(Z1, 2, 2), (Z2, 2, 2), (Z2, 2, 3), (Z1, 3, 2)]:
        G = trivial_module(H, p)
        ms = [multiplicity([B(x) for x in S], n, H, G) for S in chain]
        assert ms == sorted(ms)


# -- lambda ------------------------------------------------------------------------

def test_lambda_trivial_base():
    lv = lambda_value([Z2], Z1, trivial_module(Z1, 2))
    assert lv.value == 1 and lv.abelian and lv.cross_checked


def test_lambda_z4_klein():
    eng = engine_for([Z4, V4])
    G = trivial_module(Z2, 2)
    lv = eng.lam(Z2, G)
    auts = [O.count_h_automorphisms(e.E.table.tolist(), e.pi.tolist()) for e in eng.extensions(Z2, G)]
    assert len(auts) == 2
    assert lv.value == (G.hH - 1) * sum(Fraction(1, a) for a in auts)
    assert power_of(2, lv.value) is not None
    assert lv.cross_checked and lv.second_route == lv.value


def test_lambda_a5():
    A5 = B("A5")
    eng = engine_for([A5])
    G = next(k for k in eng.kernels(Z1) if not k.abelian)
    assert eng.lam(Z1, G).value == Fraction(1, O.count_automorphisms(A5.table.tolist())) == Fraction(1, 120)


REGRESSION = [(["Z2"], "Z1"), (["Z2"], "Z2"), (["Z2"], "V4"), (["Z3"], "Z3"), (["Z4"], "Z2"), (["Z4", "V4"], "Z2"),
              (["S3"], "Z1"), (["S3"], "Z2"), (["S3"], "S3"), (["S3"], "Z3"), (["D4"], "V4"), (["Q8"], "Z2"),
              (["A4"], "Z3"), (["Z2", "Z3"], "Z6")]


@pytest.mark.parametrize("S,H", REGRESSION)
def test_lambda_routes_agree_and_powers(S, H):
    eng = engine_for([B(x) for x in S])
    Hg = B(H)
    for G in eng.kernels(Hg):
        lv = eng.lam(Hg, G)
        if G.abelian and lv.value:
            assert power_of(G.hH, lv.value) is not None
            assert lv.cross_checked and lv.second_route == lv.value


# -- mu_{u,n} ----------------------------------------------------------------------

@pytest.mark.parametrize("H,expected_corank", [("Z1", 0), ("Z2", 1), ("V4", 2)])
def test_mu_un_f2_examples(H, expected_corank):
    census = O.rank_census(2, 2, 2)
    assert mu_un([Z2], B(H), 2, 0).exact == census[expected_corank]


@pytest.mark.parametrize("n,u", [(2, 0), (3, 0), (2, 1), (3, 1)])
def test_table_matches_f2_rank_census(n, u):
    census = O.rank_census(2, n + u, n)
    got = keyed(distribution_table([Z2], n, u))
    want = {O.group_key(elementary(k)): v for k, v in census.items()}
    assert got == want
    assert sum(got.values()) == 1


def elementary(k):
    T = O.cyclic_table(1)
    for _ in range(k):
        T = O.direct_table(T, O.cyclic_table(2))
    return T


def test_table_z3_one_generator():
    got = keyed(distribution_table([Z3], 1, 0))
    assert got == {O.group_key(O.cyclic_table(1)): Fraction(2, 3), O.group_key(O.cyclic_table(3)): Fraction(1, 3)}


HAAR_CASES = [(["Z2", "Z3"], 1, 0), (["Z2", "Z3"], 2, 0), (["Z2", "Z3"], 1, 1), (["Z4"], 1, 0), (["Z4"], 2, 0),
              (["Z4"], 1, 1), (["Z2", "Z4"], 2, 0), (["S3"], 1, 0), (["S3"], 1, 1), (["Z3"], 2, 1), (["V4"], 1, 0)]


@pytest.mark.parametrize("S,n,u", HAAR_CASES)
def test_table_matches_haar_census(S, n, u):
    T, _ = O.completion_table([B(x).table.tolist() for x in S], n)
    got = keyed(distribution_table([B(x) for x in S], n, u))
    assert got == O.haar_census(T, n + u)


@pytest.mark.parametrize("S,n,u", [(["Z2"], 2, 0), (["Z2", "Z3"], 2, 0), (["Z4"], 2, 1), (["S3"], 1, 0)])
def test_expected_surjections(S, n, u):
    """E|Sur(X, E)| = |Sur(F_n, E)| / |E|^(n+u) for each group E in the table."""
    table = distribution_table([B(x) for x in S], n, u)
    for E, _ in table.rows:
        TE = E.table.tolist()
        lhs = sum(v.exact * O.surjection_count(H.table.tolist(), TE) for H, v in table.rows)
        assert lhs == Fraction(O.generating_tuples(TE, n), E.order ** (n + u))


def test_mu_un_accepts_zero_relations():
    assert mu_un([Z2], Z2, 1, -1).exact == 1
    assert mu_un([Z2], Z1, 1, -1).exact == 0


def test_mu_un_rejects_negative_relation_count():
    from progroup.errors import InputError
    with pytest.raises(InputError):
        mu_un([Z2], Z1, 1, -2)


# -- mu_u ------------------------------------------------------------------------------

@pytest.mark.parametrize("u,start", [(1, 2), (0, 1)])
def test_mu_u_trivial_group(u, start):
    lo, hi = mu_u([Z2], Z1, u).bounds
    ref = O.q_product(2, start)
    # the truncated oracle overshoots the infinite product by less than 2^-200
    assert lo <= ref and hi >= ref - Fraction(1, 2 ** 190)
    assert hi - lo <= Fraction(1, 10 ** 6)


def test_mu_u_not_level_is_zero():
    for u in range(3):
        assert mu_u([Z2], Z4, u).exact == 0


@pytest.mark.parametrize("u", [0, 1, 2])
def test_mu_u_elementary_closed_form(u):
    # S = {Z/2}: mu_u((Z/2)^k) = 2^-k(k+u) prod_{i>k+u}(1-2^-i) / prod_{i<=k}(1-2^-i)
    for k in range(3):
        H = B({0: "Z1", 1: "Z2", 2: "V4"}[k])
        ref = Fraction(1, 2 ** (k * (k + u))) * O.q_product(2, k + u + 1) / O.q_product(2, 1, k)
        lo, hi = mu_u([Z2], H, u).bounds
        assert lo - Fraction(1, 2 ** 150) <= ref <= hi + Fraction(1, 2 ** 150)


# -- achievability -----------------------------------------------------------------------

def test_klein_needs_three_relations_over_d4():
    D4 = B("D4")
    assert not achievable([D4], V4, 0)
    assert achievable([D4], V4, 1)
    assert mu_u([D4], V4, 0).bounds[1] == 0


def test_klein_achievable_over_z2():
    assert achievable([Z2], V4, 0)
    assert mu_un([Z2], V4, 2, 0).exact == Fraction(1, 16)


@pytest.mark.parametrize("S", [["Z2"], ["S3"], ["A4"], ["Z3", "Z2"]])
@pytest.mark.parametrize("u", [1, 2])
def test_trivial_group_achievable(S, u):
    assert achievable([B(x) for x in S], Z1, u)


@pytest.mark.parametrize("S,H", [(["Z2"], "Z1"), (["Z2"], "Z2"), (["Z2"], "V4"), (["Z2"], "Z4"), (["D4"], "V4"),
                                 (["D4"], "D4"), (["S3"], "S3"), (["S3"], "Z6"), (["Z4"], "Z4"), (["Z3"], "Z3")])
@pytest.mark.parametrize("u", [0, 1])
def test_achievable_iff_positive_limit(S, H, u):
    Sg = [B(x) for x in S]
    lo, hi = mu_u(Sg, B(H), u).bounds
    assert achievable(Sg, B(H), u) == (lo > 0)
    assert lo >= 0


@settings(max_examples=15, deadline=None)
@given(st.sampled_from([("Z2", 1), ("Z2", 2), ("Z3", 2), ("Z4", 2), ("S3", 1), ("D4", 1), ("Z5", 2)]),
       st.integers(0, 2))
def test_tables_sum_to_one(case, u):
    name, n = case
    t = distribution_table([B(name)], n, u)
    assert t.complete and sum(v.exact for _, v in t.rows) == 1
    assert all(v.exact >= 0 for _, v in t.rows)


def test_interval_helpers_round_trip():
    with I.precision():
        x = I.from_fraction(Fraction(1, 3))
        assert I.contains(x, Fraction(1, 3))
