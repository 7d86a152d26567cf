import time
from fractions import Fraction

import mpmath
import pytest

from progroup import perm as P
from progroup.catalog import builtin
from progroup.errors import InputError
from progroup.measure import mu_u
from progroup.special import (AbelianPType, SimpleGroupRow, SimpleGroupTable, abelian_measure,
                              abelian_p_aut_order, load_simple_groups, primes_upto, pro_p_measure,
                              relation_rank, shipped_table, trivial_measure)

import oracles as O


def contains(value, x):
    lo, hi = value.bounds
    return lo <= Fraction(x) <= hi


def overlap(a, b):
    (alo, ahi), (blo, bhi) = a.bounds, b.bounds
    return alo <= bhi and blo <= ahi


# -- the trivial group over all finite groups ------------------------------------------

@pytest.mark.parametrize("u,approx", [(1, "0.4357"), (2, "0.7168"), (3, "0.8616")])
def test_trivial_measure_matches_published_values(u, approx):
    start = time.perf_counter()
    v = trivial_measure(u, 10 ** 5, 10 ** 6)
    lo, hi = v.bounds
    assert hi - lo <= Fraction(1, 10 ** 3)
    # published to four decimals
    x = Fraction(approx)
    assert lo <= x + Fraction(1, 20000) and x - Fraction(1, 20000) <= hi
    assert time.perf_counter() - start <= 10


@pytest.mark.parametrize("u", [0, -1])
def test_trivial_measure_vanishes_without_spare_relations(u):
    assert trivial_measure(u).exact == 0


def test_trivial_measure_increasing_in_u():
    vals = [trivial_measure(u).bounds for u in (1, 2, 3)]
    assert vals[0][1] < vals[1][0] and vals[1][1] < vals[2][0]


@pytest.mark.parametrize("u", [1, 2])
def test_trivial_measure_nested_cutoffs(u):
    coarse = trivial_measure(u, 10 ** 3, 10 ** 4).bounds
    fine = trivial_measure(u, 10 ** 5, 10 ** 6).bounds
    assert coarse[0] <= fine[0] and fine[1] <= coarse[1]


def test_trivial_measure_rejects_cutoff_beyond_table():
    with pytest.raises(InputError):
        trivial_measure(1, 10 ** 5, 10 ** 7)


# -- the simple-group table ----------------------------------------------------------------

def test_shipped_table_shape():
    t = shipped_table()
    orders = [r.order for r in t.rows]
    assert orders[:5] == [60, 168, 360, 504, 660]
    assert len(t.rows) == 56
    assert max(orders) < 10 ** 6 <= t.complete_through


def test_a5_automorphisms_bruteforce():
    row = shipped_table().rows[0]
    assert row.aut_order == O.count_automorphisms(builtin("A5").table.tolist()) == 120


def alternating_gens(n):
    three = tuple([1, 2, 0] + list(range(3, n)))
    if n % 2:
        long = tuple(list(range(1, n)) + [0])
    else:  # an (n-1)-cycle fixing 0
        long = tuple([0] + list(range(2, n)) + [1])
    return [three, long]


def psl2_gens(q):
    """PSL(2, q), q prime, on the projective line {0..q-1, inf = q}: x+1, a^2 x, -1/x."""
    inf = q
    a = next(g for g in range(2, q) if len({pow(g, k, q) for k in range(q - 1)}) == q - 1)
    shift = tuple([(x + 1) % q for x in range(q)] + [inf])
    scale = tuple([a * a * x % q for x in range(q)] + [inf])
    invert = tuple([inf] + [(-pow(x, -1, q)) % q for x in range(1, q)] + [0])
    return [shift, scale, invert]


@pytest.mark.parametrize("gens", [alternating_gens(5), alternating_gens(6), alternating_gens(7),
                                  psl2_gens(7), psl2_gens(11), psl2_gens(13), psl2_gens(17)])
def test_table_orders_by_schreier_sims(gens):
    order = P.build_group(gens).order()
    assert order in {r.order for r in shipped_table().rows}


def test_loader_requires_header(tmp_path):
    f = tmp_path / "t.csv"
    f.write_text("60,A5,120\n")
    with pytest.raises(InputError, match="header"):
        load_simple_groups(str(f))


def test_loader_rejects_three_groups_of_one_order(tmp_path):
    f = tmp_path / "t.csv"
    f.write_text("order,name,aut_order\n60,a,120\n60,b,120\n60,c,120\n")
    with pytest.raises(InputError, match="more than two"):
        load_simple_groups(str(f))


def test_table_rejects_small_aut():
    with pytest.raises(InputError):
        SimpleGroupTable([SimpleGroupRow(60, "A5", 30)], 60)


def test_primes_upto():
    assert primes_upto(30).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


# -- abelian groups ----------------------------------------------------------------------------

def test_aut_z2_z4():
    assert abelian_p_aut_order(2, [2, 1]) == O.count_automorphisms(O.abelian_p_table(2, [2, 1])) == 8


@pytest.mark.parametrize("p,exps", [(2, [1]), (2, [2]), (2, [1, 1]), (2, [2, 1]), (2, [1, 1, 1]), (3, [1, 1]),
                                    (2, [3, 1]), (2, [2, 2]), (3, [2]), (5, [1]), (2, [2, 1, 1])])
def test_basis_count_oracle_against_exhaustive(p, exps):
    assert O.abelian_p_group_aut_count(p, exps) == O.count_automorphisms(O.abelian_p_table(p, exps))


ABELIAN_UP_TO_128 = [(p, part) for p, kmax in [(2, 7), (3, 4), (5, 3), (7, 2), (11, 2)]
                     for k in range(1, kmax + 1) for part in O.partitions_of(k)]


@pytest.mark.parametrize("p,part", ABELIAN_UP_TO_128)
def test_aut_formula_all_abelian_p_groups_to_128(p, part):
    assert abelian_p_aut_order(p, part) == O.abelian_p_group_aut_count(p, list(part))


def prime_product_oracle(start, cutoff=2 * 10 ** 5):
    """prod_p prod_{i>=start} (1 - p^-i) in floating point; the omitted tail is below 4/cutoff^(start-1)."""
    mpmath.mp.dps = 30
    log = mpmath.mpf(0)
    sieve = bytearray([1]) * (cutoff + 1)
    for q in range(2, cutoff + 1):
        if sieve[q]:
            sieve[q * q::q] = bytearray(len(sieve[q * q::q]))
            i = start
            while True:
                t = mpmath.mpf(q) ** -i
                if t < mpmath.mpf(10) ** -25:
                    break
                log += mpmath.log1p(-t)
                i += 1
    return mpmath.exp(log)


def test_abelian_z2_u1():
    v = abelian_measure({2: AbelianPType(2, (1,))}, 1)
    ref = prime_product_oracle(2) / 2
    lo, hi = v.bounds
    slack = 4 / (2 * 10 ** 5)
    assert float(lo) - slack <= float(ref) <= float(hi) + slack
    assert hi - lo <= Fraction(1, 10 ** 3)


def test_abelian_rank_case_split():
    t = {2: AbelianPType(2, (1,), rank=1), 3: AbelianPType(3, (), rank=1)}
    assert abelian_measure(t, -1).bounds[0] > 0
    for u in (0, 1, -2):
        assert abelian_measure(t, u).exact == 0


def test_abelian_mismatched_ranks_are_zero():
    t = {2: AbelianPType(2, (), rank=1), 3: AbelianPType(3, (), rank=2)}
    assert abelian_measure(t, -1).exact == 0


def test_abelian_type_validation():
    with pytest.raises(InputError):
        AbelianPType(4, (1,))
    with pytest.raises(InputError):
        AbelianPType(2, (0,))


@pytest.mark.parametrize("H,part", [("Z1", ()), ("Z2", (1,)), ("Z4", (2,)), ("V4", (1, 1))])
@pytest.mark.parametrize("u", [0, 1])
def test_abelian_one_prime_matches_engine(H, part, u):
    engine_value = mu_u([builtin("Z8")], builtin(H), u)
    closed = abelian_measure({2: AbelianPType(2, part)}, u, primes=[2])
    assert overlap(engine_value, closed)


# -- pro-p ----------------------------------------------------------------------------------------

@pytest.mark.parametrize("p", [2, 3, 5])
def test_pro_p_cyclic(p):
    v = pro_p_measure(p, 1, 1, 0, p - 1, p)
    ref = O.q_product(p, 1) / (p - 1)
    assert contains(v, ref) or abs(float(v.bounds[0]) - float(ref)) < 1e-12
    assert overlap(v, abelian_measure({p: AbelianPType(p, (1,))}, 0, primes=[p]))


def test_pro_p_too_few_relations():
    assert pro_p_measure(2, 2, 3, 0, 6, 4).exact == 0


def test_relation_rank_of_klein_four():
    V4 = builtin("V4")
    r = relation_rank(V4, [builtin("D4")], 2)
    assert r == 3  # d(d+1)/2 for d = 2
    v = pro_p_measure(2, 2, r, 1, 6, 4)
    assert v.bounds[0] > 0


def test_pro_p_rejects_bad_ranks():
    with pytest.raises(InputError):
        pro_p_measure(2, 2, 1, 0, 6, 4)
