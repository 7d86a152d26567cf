"""Closed-form measures for infinite S, evaluated as certified intervals.

Products over primes are summed in log form.  For every prime p <= P the
terms log(1 - p^-i) are added exactly in interval arithmetic until they fall
below 2^-(prec+8), with the remainder bounded by twice the geometric tail.
Primes beyond P, and simple groups beyond the cutoff B, are bounded by

    sum_{n > X} 2 n^(-u-1) <= 2 / (u X^u),

using -log(1 - y) <= y / (1 - y), |Aut G| >= |G| and at most two simple
groups of each order.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Mapping, Optional, Sequence

import numpy as np
from mpmath import iv

from . import intervals as I
from .errors import InputError
from .measure import MeasureValue

SHIPPED_COVERAGE = 10 ** 6


# ---------------------------------------------------------------------------
# primes
# ---------------------------------------------------------------------------


def primes_upto(n: int) -> np.ndarray:
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(n ** 0.5) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return np.flatnonzero(sieve)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


# ---------------------------------------------------------------------------
# simple groups
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SimpleGroupRow:
    order: int
    name: str
    aut_order: int


@dataclass
class SimpleGroupTable:
    rows: list
    complete_through: int

    def __post_init__(self):
        self.rows = sorted(self.rows, key=lambda r: (r.order, r.name))
        counts: dict = {}
        for r in self.rows:
            if r.aut_order < r.order:
                raise InputError(f"{r.name}: automorphism group smaller than the group")
            if r.aut_order % r.order:
                raise InputError(f"{r.name}: |Aut| must be a multiple of |G|")
            counts[r.order] = counts.get(r.order, 0) + 1
            if counts[r.order] > 2:
                raise InputError(f"more than two simple groups of order {r.order}")

    def up_to(self, bound: int) -> list:
        return [r for r in self.rows if r.order <= bound]


def load_simple_groups(path: Optional[str] = None, complete_through: Optional[int] = None
                       ) -> SimpleGroupTable:
    """Read an ``order,name,aut_order`` CSV; the shipped file covers orders up to 10^6."""
    if path is None:
        text = resources.files("progroup").joinpath("data/simple_groups.csv").read_text()
        lines = text.splitlines()
        coverage = SHIPPED_COVERAGE if complete_through is None else complete_through
    else:
        try:
            with open(path, newline="") as fh:
                lines = fh.read().splitlines()
        except OSError as exc:
            raise InputError(f"cannot read simple-group table: {exc}") from exc
        coverage = complete_through
    reader = csv.reader(lines)
    header = next(reader, None)
    if header != ["order", "name", "aut_order"]:
        raise InputError("simple-group table needs the header line order,name,aut_order")
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if not rec:
            continue
        if len(rec) != 3:
            raise InputError(f"simple-group table line {lineno}: expected 3 fields")
        try:
            rows.append(SimpleGroupRow(int(rec[0]), rec[1], int(rec[2])))
        except ValueError as exc:
            raise InputError(f"simple-group table line {lineno}: {exc}") from exc
    if coverage is None:
        coverage = max((r.order for r in rows), default=0)
    return SimpleGroupTable(rows, coverage)


@lru_cache(maxsize=1)
def shipped_table() -> SimpleGroupTable:
    return load_simple_groups()


# ---------------------------------------------------------------------------
# interval pieces
# ---------------------------------------------------------------------------


def _log_q_product(p: int, start: int, prec: int):
    """Enclosure of sum_{i >= start} log(1 - p^-i), start >= 1."""
    acc = iv.mpf(0)
    i = start
    cutoff = Fraction(1, 2 ** (prec + 8))
    while True:
        y = Fraction(1, p ** i)
        if y < cutoff:
            break
        acc += iv.log(1 - I.from_fraction(y))
        i += 1
    # remaining terms: each -log(1 - y) <= 2y, geometric sum of y
    rest = 2 * Fraction(1, p ** i) * Fraction(p, p - 1)
    return acc + iv.mpf([-I.from_fraction(rest).b, 0])


def prime_log_product(shift: int, prime_cutoff: int, prec: int = 96):
    """Enclosure of sum over all primes p of sum_{i > shift} log(1 - p^-i), shift >= 1.

    Returns (interval, tail bound used for primes beyond the cutoff).
    """
    if shift < 1:
        raise InputError("the prime product vanishes unless the shift is at least 1")
    total = iv.mpf(0)
    for p in primes_upto(prime_cutoff).tolist():
        total += _log_q_product(p, shift + 1, prec)
    tail = Fraction(2, shift * prime_cutoff ** shift)
    return total + iv.mpf([-I.from_fraction(tail).b, 0]), tail


def _q_product_at(p: int, start: int):
    """prod_{i >= start} (1 - p^-i) as an interval; exact 0 when start <= 0."""
    if start <= 0:
        return None
    return I.q_product_tail(Fraction(1), p, start=start)


# ---------------------------------------------------------------------------
# measures
# ---------------------------------------------------------------------------


def trivial_measure(u: int, prime_cutoff: int = 10 ** 5, simple_cutoff: int = 10 ** 6,
                    table: Optional[SimpleGroupTable] = None,
                    max_width: Optional[float] = None) -> MeasureValue:
    """Measure of the trivial group when S contains every finite group."""
    if u <= 0:
        return MeasureValue(Fraction(0), notes=["the prime product vanishes for u <= 0"])
    if prime_cutoff < 2 or simple_cutoff < 60:
        raise InputError("cutoffs too small")
    table = shipped_table() if table is None else table
    if simple_cutoff > table.complete_through:
        raise InputError(f"simple-group table is only complete through order {table.complete_through}")
    with I.precision(128):
        logp, ptail = prime_log_product(u, prime_cutoff)
        s = sum((Fraction(1, r.order ** u * r.aut_order) for r in table.up_to(simple_cutoff)),
                Fraction(0))
        stail = Fraction(2, u * simple_cutoff ** u)
        logs = iv.mpf([-I.from_fraction(s + stail).b, -I.from_fraction(s).a])
        value = iv.exp(logp + logs)
    notes = [f"prime tail |log| <= 2/(u P^u) = {float(ptail):.3e} with P = {prime_cutoff}",
             f"simple-group tail <= 2/(u B^u) = {float(stail):.3e} with B = {simple_cutoff}"]
    out = MeasureValue(interval=value, notes=notes)
    if max_width is not None and I.width(value) > Fraction(max_width):
        raise InputError("cutoffs too small for the requested width")
    return out


@dataclass(frozen=True)
class AbelianPType:
    p: int
    partition: tuple = ()
    rank: int = 0

    def __post_init__(self):
        if not is_prime(self.p):
            raise InputError(f"{self.p} is not prime")
        if any(x < 1 for x in self.partition):
            raise InputError("partition entries must be positive")
        if self.rank < 0:
            raise InputError("rank must be nonnegative")
        object.__setattr__(self, "partition", tuple(sorted(self.partition, reverse=True)))

    @property
    def torsion_order(self) -> int:
        return self.p ** sum(self.partition)


def abelian_p_aut_order(p: int, partition: Sequence[int]) -> int:
    """|Aut| of the abelian p-group with the given exponents (Hillar and Rhea)."""
    e = sorted(partition)  # ascending
    n = len(e)
    if n == 0:
        return 1
    d = [max(l for l in range(n) if e[l] == e[k]) + 1 for k in range(n)]
    c = [min(l for l in range(n) if e[l] == e[k]) + 1 for k in range(n)]
    out = 1
    for k in range(n):
        out *= p ** d[k] - p ** k
    for j in range(n):
        out *= p ** (e[j] * (n - d[j]))
    for i in range(n):
        out *= p ** ((e[i] - 1) * (n - c[i] + 1))
    return out


def abelian_measure(types: Mapping[int, AbelianPType], u: int,
                    primes: Optional[Sequence[int]] = None, prime_cutoff: int = 10 ** 5) -> MeasureValue:
    """Measure of {maximal abelian quotient = H} for S = all abelian groups.

    ``primes`` restricts to the maximal abelian pro-P quotient for a finite
    set of primes P (e.g. one prime for the pro-p abelianization).  With all
    primes, primes absent from ``types`` carry the common torsion-free rank.
    """
    for p, t in types.items():
        if t.p != p:
            raise InputError(f"type for {p} has prime {t.p}")
    if primes is not None:
        extra = set(types) - set(primes)
        if any(types[p].partition or types[p].rank for p in extra):
            return MeasureValue(Fraction(0), notes=["H has a nontrivial part at an excluded prime"])
    ranks = {t.rank for t in types.values()}
    if len(ranks) > 1:
        return MeasureValue(Fraction(0), notes=["torsion-free ranks differ between primes"])
    r = ranks.pop() if ranks else 0
    aut = 1
    order = 1
    for t in types.values():
        aut *= abelian_p_aut_order(t.p, t.partition)
        order *= t.torsion_order
    if r > 0:
        if u != -r:
            return MeasureValue(Fraction(0), notes=["positive only when u equals minus the rank"])
        base = Fraction(order ** r, aut)  # 1 / (|Aut H_1| |H_1|^{-u})
        start = 1 - u
    else:
        base = Fraction(1, aut) / Fraction(order) ** u
        start = 1 + u
    if start <= 0:
        return MeasureValue(Fraction(0), notes=["a factor (1 - p^0) vanishes"])
    with I.precision(128):
        if primes is None:
            if start == 1:
                return MeasureValue(Fraction(0), notes=["product over all primes of (1 - 1/p) diverges to 0"])
            logp, tail = prime_log_product(start - 1, prime_cutoff)
            value = I.from_fraction(base) * iv.exp(logp)
            notes = [f"prime tail |log| <= {float(tail):.3e} beyond P = {prime_cutoff}"]
        else:
            value = I.from_fraction(base)
            for p in sorted(set(primes)):
                value = value * _q_product_at(p, start)
            notes = []
    return MeasureValue(interval=value, notes=notes)


def pro_p_measure(p: int, d: int, r: int, u: int, aut_order: int, order: int) -> MeasureValue:
    """Measure of {maximal pro-p quotient = H} for H with generator rank d, relation rank r."""
    if not is_prime(p):
        raise InputError(f"{p} is not prime")
    if order < 1 or aut_order < 1:
        raise InputError("orders must be positive")
    if d < 0 or r < 0:
        raise InputError("ranks must be nonnegative")
    if r < d:
        raise InputError(f"relation rank {r} below generator rank {d}: not a finite p-group")
    if order == 1 and (d or r):
        raise InputError("the trivial group has d = r = 0")
    start = 1 + u - r + d
    if start <= 0:
        return MeasureValue(Fraction(0), notes=[f"zero since u < r - d = {r - d}"])
    base = Fraction(1, aut_order) / Fraction(order) ** u
    with I.precision(128):
        value = I.from_fraction(base) * _q_product_at(p, start)
    return MeasureValue(interval=value)


def relation_rank(H, S, p: int) -> int:
    """m(S, d(H), H, Z/p) for a p-group H; equals r(H) once the closure of S
    contains the p-covering group of H."""
    from .measure import engine_for
    from .smallgroup import rank

    eng = engine_for(S)
    for G in eng.kernels(H):
        if G.abelian and G.p == p and G.dim == 1 and G.is_trivial_action:
            return eng.multiplicity(max(rank(H), 1), H, G)
    return 0
