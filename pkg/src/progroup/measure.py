"""Exact measures of the sets U_{S,H} = {random quotient isomorphic to H}.

For the completion C of F_n with respect to S and a level-S quotient H, the
kernel R of the fundamental sequence 1 -> R -> F -> H -> 1 is a product of
irreducible F-groups.  The multiplicity of each irreducible G is read off
from lifting counts over H-extensions with kernel G, and the probability
that n+u random elements normally generate R is a product over the factors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import intervals as I
from . import linalg as L
from .bounds import BOUNDS
from .chief import cf_of_set
from .completion import (MarkedCompletion, cached_completion, element_perm, graph_is_hom,
                         is_level)
from .errors import BoundExceeded, ConsistencyError, InputError
from .extensions import (HExtension, IrreducibleHGroup, candidate_kernels,
                         extensions_for_kernel, intertwiners, set_key)
from .smallgroup import (SmallGroup, count_automorphisms, extend_map, generating_tuple,
                         is_isomorphic, normal_subgroup_sets, rank, sur_count_free)


# ---------------------------------------------------------------------------
# value types
# ---------------------------------------------------------------------------


@dataclass
class MeasureValue:
    exact: Optional[Fraction] = None
    interval: object = None  # mpmath iv.mpf
    complete: bool = True
    notes: list = field(default_factory=list)

    def __post_init__(self):
        if self.exact is None and self.interval is None:
            raise InputError("a measure value needs an exact value or an interval")
        if self.exact is not None and self.interval is not None:
            if not I.contains(self.interval, self.exact):
                raise ConsistencyError("exact value outside its interval")

    @property
    def bounds(self) -> tuple[Fraction, Fraction]:
        if self.interval is not None:
            return I.endpoints(self.interval)
        return self.exact, self.exact

    def is_zero(self) -> bool:
        return self.exact == 0

    def to_json(self) -> dict:
        out: dict = {"complete": self.complete}
        if self.exact is not None:
            out["exact"] = {"num": str(self.exact.numerator), "den": str(self.exact.denominator)}
        if self.interval is not None:
            lo, hi = I.interval_strings(self.interval)
            out["interval"] = {"lo": lo, "hi": hi}
        if self.notes:
            out["notes"] = list(self.notes)
        return out


@dataclass
class MultiplicityReport:
    entries: list  # (kernel, m)
    complete: bool = True

    def nonzero(self) -> list:
        return [(G, m) for G, m in self.entries if m > 0]


@dataclass
class LambdaValue:
    value: Fraction
    abelian: bool
    exact: bool = True
    h: Optional[int] = None
    second_route: Optional[Fraction] = None
    second_route_name: str = ""
    cross_checked: bool = False
    extensions: list = field(default_factory=list)  # (|E|, |Aut_H|)


# ---------------------------------------------------------------------------
# generation probability
# ---------------------------------------------------------------------------


def generation_probability(factors: Sequence[tuple], n: int, u: int) -> Fraction:
    """P(n+u uniform elements of R = prod G_i^{m_i} normally generate R as an F-group).

    ``factors`` holds (G, m) with G an IrreducibleHGroup (abelian) or a
    NonabelianKernel; kernels must be pairwise non-isomorphic.
    """
    k = n + u
    if k < 0:
        raise InputError("n + u must be nonnegative")
    out = Fraction(1)
    for G, m in factors:
        q = Fraction(1, G.order ** k)
        if G.abelian:
            for j in range(m):
                out *= 1 - G.hH ** j * q
        else:
            out *= (1 - q) ** m
    return out


def power_of(h: int, value: Fraction) -> Optional[int]:
    """e with value == h**e, or None."""
    if value <= 0:
        return None
    num, den = value.numerator, value.denominator
    if den == 1:
        e = 0
        while num % h == 0:
            num //= h
            e += 1
        return e if num == 1 else None
    if num != 1:
        return None
    e = 0
    while den % h == 0:
        den //= h
        e += 1
    return -e if den == 1 else None


# ---------------------------------------------------------------------------
# lifting counts
# ---------------------------------------------------------------------------


def sur_count_completion(n: int, ext: HExtension, S: Optional[Sequence[SmallGroup]] = None) -> int:
    """|Sur_H(rho, pi)| = sum_D nu(D, E) (|D|/|H|)^n, and 0 when E is not level S."""
    if S is not None and not ext.is_level(S):
        return 0
    poset = ext.poset
    h = ext.H.order
    total = 0
    for D, v in poset.moebius.items():
        total += v * (len(D) // h) ** n
    if total < 0:
        raise ConsistencyError("negative lifting count")
    return total


def direct_lift_count(C: MarkedCompletion, ext: HExtension, h_images: Sequence[int]) -> int:
    """Count lifts e_i of h_i (i = 1..n) that define a surjection C -> E, by enumeration."""
    from itertools import product
    fibres = [ext.fibre(h).tolist() for h in h_images]
    size = 1
    for f in fibres:
        size *= len(f)
    if size > 200_000:
        raise BoundExceeded(f"direct lift enumeration over {size} tuples")
    count = 0
    E = ext.E
    for lifts in product(*fibres):
        if not E.generates(lifts):
            continue
        if graph_is_hom(C.generators, [element_perm(E, x) for x in lifts]):
            count += 1
    return count


# ---------------------------------------------------------------------------
# the engine
# ---------------------------------------------------------------------------


class MeasureEngine:
    """Caches the chief factors, completions and extension lists for one set S."""

    def __init__(self, S: Sequence[SmallGroup]):
        if not S:
            raise InputError("S must be nonempty")
        self.S = list(S)
        self.key = set_key(self.S)
        self._cf = None
        self._cands: dict = {}
        self._exts: dict = {}
        self._level: dict = {}

    # -- shared data ----------------------------------------------------
    @property
    def cf(self):
        if self._cf is None:
            self._cf = cf_of_set(self.S)
        return self._cf

    def completion(self, n: int) -> MarkedCompletion:
        return cached_completion(n, self.S)

    def _try_completion(self, n: int) -> Optional[MarkedCompletion]:
        try:
            return self.completion(n)
        except BoundExceeded:
            return None

    def is_level(self, H: SmallGroup) -> bool:
        k = id(H)
        if k not in self._level:
            self._level[k] = (H, is_level(H, self.S))
        return self._level[k][1]

    def candidates(self, H: SmallGroup):
        k = id(H)
        if k not in self._cands:
            self._cands[k] = (H, candidate_kernels(H, self.cf))
        return self._cands[k][1]

    def kernels(self, H: SmallGroup) -> list:
        c = self.candidates(H)
        return list(c.abelian) + [kern for kern, _ in c.nonabelian]

    def _pairs_for(self, H: SmallGroup, G) -> list:
        for kern, pairs in self.candidates(H).nonabelian:
            if kern is G:
                return pairs
        return []

    def extensions(self, H: SmallGroup, G) -> list[HExtension]:
        k = (id(H), id(G))
        if k not in self._exts:
            self._exts[k] = (H, G, extensions_for_kernel(H, G, self._pairs_for(H, G)))
        return self._exts[k][2]

    # -- multiplicities -------------------------------------------------
    def multiplicity(self, n: int, H: SmallGroup, G) -> int:
        if not self.is_level(H):
            return 0
        C = self._try_completion(n)
        if C is not None and C.order() % (H.order * G.order) != 0:
            return 0
        total = Fraction(0)
        for ext in self.extensions(H, G):
            if C is not None and C.order() % ext.order:
                continue
            s = sur_count_completion(n, ext)
            if s == 0:
                continue
            if C is not None:
                level = is_level(ext.E, self.S, completion=C)
            else:
                level = ext.is_level(self.S)
            if level:
                total += Fraction(s, ext.aut_H)
        if G.abelian:
            h = G.hH
            val = 1 + (h - 1) * total
            if val.denominator != 1:
                raise ConsistencyError(f"multiplicity sum {total} is not integral")
            m = power_of(h, val)
            if m is None or m < 0:
                raise ConsistencyError(f"(h^m - 1)/(h - 1) = {total} has no solution with h = {h}")
            return m
        if total.denominator != 1:
            raise ConsistencyError(f"nonabelian multiplicity {total} is not an integer")
        return int(total)

    def multiplicities(self, n: int, H: SmallGroup) -> MultiplicityReport:
        return MultiplicityReport([(G, self.multiplicity(n, H, G)) for G in self.kernels(H)])

    # -- lambda ---------------------------------------------------------
    def lam(self, H: SmallGroup, G, cross_check: bool = True) -> LambdaValue:
        if not self.is_level(H):
            return LambdaValue(Fraction(0), G.abelian, h=getattr(G, "hH", None))
        total = Fraction(0)
        record = []
        for ext in self.extensions(H, G):
            if ext.is_level(self.S):
                total += Fraction(1, ext.aut_H)
                record.append((ext.order, ext.aut_H))
        if not G.abelian:
            return LambdaValue(total, False, extensions=record)
        h = G.hH
        value = (h - 1) * total
        out = LambdaValue(value, True, h=h, extensions=record)
        if value and power_of(h, value) is None:
            raise ConsistencyError(f"lambda = {value} is not a power of h = {h}")
        if cross_check:
            second = self._lambda_from_completion(H, G)
            if second is not None:
                name, val = second
                out.second_route, out.second_route_name = val, name
                if val != value:
                    raise ConsistencyError(f"lambda mismatch: definition sum {value}, {name} {val}")
                out.cross_checked = True
        return out

    def _lambda_from_completion(self, H: SmallGroup, G: IrreducibleHGroup) -> Optional[tuple[str, Fraction]]:
        # h^m - 1 = lambda |G|^n - [the split extension is level], and the split
        # extension is level whenever any extension is.  So m > 0 gives
        # lambda = h^m / |G|^n, while m = 0 is ambiguous between lambda = 0 and
        # lambda = |G|^-n; one more generator separates the two.
        n = max(rank(H), 1)
        got = self._head_exponent(H, G, n)
        if got is None:
            return None
        name, m = got
        if m > 0:
            return name, Fraction(G.hH ** m, G.order ** n)
        got = self._head_exponent(H, G, n + 1)
        if got is None:
            return None
        name, m1 = got
        if m1 == 0:
            return name, Fraction(0)
        if G.hH ** m1 != G.order:
            raise ConsistencyError("completion route: multiplicity jump does not match |G|")
        return name, Fraction(1, G.order ** n)

    def _head_exponent(self, H: SmallGroup, G: IrreducibleHGroup, n: int) -> Optional[tuple[str, int]]:
        C = self._try_completion(n)
        if C is None:
            return None
        if C.order() <= BOUNDS.table_order:
            m = head_multiplicity(C, H, G)
            name = "module head of the completion"
        else:
            try:
                tup = generating_tuple(H, n)
                total = Fraction(0)
                for ext in self.extensions(H, G):
                    if C.order() % ext.order:
                        continue
                    s = direct_lift_count(C, ext, tup)
                    total += Fraction(s, ext.aut_H)
                m = power_of(G.hH, 1 + (G.hH - 1) * total)
                name = "lift enumeration in the completion"
            except BoundExceeded:
                return None
        if m is None:
            raise ConsistencyError("completion route gave a non-power multiplicity")
        return name, m

    # -- measures -------------------------------------------------------
    def mu_un(self, H: SmallGroup, n: int, u: int) -> MeasureValue:
        if n < 1:
            raise InputError("n must be at least 1")
        if n + u < 0:
            raise InputError("n + u must be nonnegative (a negative number of relations)")
        if not self.is_level(H):
            return MeasureValue(Fraction(0), notes=["H is not level S"])
        sur = sur_count_free(n, H)
        if sur == 0:
            return MeasureValue(Fraction(0), notes=[f"H needs more than {n} generators"])
        factors = self.multiplicities(n, H).nonzero()
        aut = count_automorphisms(H)
        value = Fraction(sur, aut * H.order ** (n + u)) * generation_probability(factors, n, u)
        return MeasureValue(value)

    def mu_u(self, H: SmallGroup, u: int) -> MeasureValue:
        if not self.is_level(H):
            return MeasureValue(Fraction(0), notes=["H is not level S"])
        aut = count_automorphisms(H)
        base = Fraction(1, aut) / Fraction(H.order) ** u
        notes = []
        with I.precision():
            acc = I.from_fraction(base)
            for G in self.kernels(H):
                lv = self.lam(H, G)
                if lv.value == 0:
                    continue
                x = lv.value / Fraction(G.order) ** u
                if G.abelian:
                    e = power_of(G.hH, x)
                    if e is not None and e >= 1:
                        notes.append(f"factor for {G.describe()} vanishes (lambda/|G|^u = h^{e})")
                        return MeasureValue(Fraction(0), notes=notes)
                    acc = acc * I.q_product_tail(x, G.hH)
                else:
                    acc = acc * I.exp_neg(x)
        return MeasureValue(interval=acc, notes=notes)

    def achievable(self, H: SmallGroup, u: int) -> bool:
        if not self.is_level(H):
            return False
        n = max(rank(H), 1)
        if n + u < 0:
            return False
        return self.mu_un(H, n, u).exact > 0

    def distribution_table(self, n: int, u: int, catalog: Sequence[SmallGroup] = ()) -> "DistributionTable":
        C = self.completion(n)
        rows = []
        complete = True
        if C.order() <= BOUNDS.quotient_index and C.order() <= 6000:
            classes = quotient_classes(C.small_group())
        else:
            complete = False
            classes = []
            for H in catalog:
                if C.order() % H.order == 0 and self.is_level(H):
                    if not any(is_isomorphic(H, K) for K in classes):
                        classes.append(H)
        for H in classes:
            rows.append((H, self.mu_un(H, n, u)))
        total = sum((v.exact for _, v in rows), Fraction(0))
        if complete and total != 1:
            raise ConsistencyError(f"distribution sums to {total}, not 1")
        return DistributionTable(self.S, n, u, rows, complete, 1 - total)


@dataclass
class DistributionTable:
    S: list
    n: int
    u: int
    rows: list  # (H, MeasureValue)
    complete: bool
    residual: Fraction

    def as_dict(self) -> dict:
        return {group_name(H): v.exact for H, v in self.rows}


def group_name(H: SmallGroup) -> str:
    if H.label:
        return H.label
    from .catalog import identify
    return identify(H)


def quotient_classes(G: SmallGroup) -> list[SmallGroup]:
    """One representative per isomorphism class of quotients of G."""
    out: list[SmallGroup] = []
    for N in normal_subgroup_sets(G):
        Q = G.quotient(N)[0] if len(N) > 1 else SmallGroup.from_table(G.table, check=False)
        Q.label = None
        if not any(is_isomorphic(Q, K) for K in out):
            out.append(Q)
    out.sort(key=lambda K: K.order)
    return out


def head_multiplicity(C: MarkedCompletion, H: SmallGroup, G: IrreducibleHGroup) -> int:
    """Multiplicity of G in the head of the kernel N of C -> H, via Hom_C(N, G)."""
    Cs = C.small_group()
    n = C.n
    tup = generating_tuple(H, n)
    rho = extend_map(Cs, Cs.marked, tup, H)
    if rho is None:
        raise ConsistencyError("H is not a quotient of the completion")
    N = np.flatnonzero(rho == 0)
    p = G.p
    t, inv = Cs.table, Cs.inverse
    # p-th powers of N and commutators of generators of N
    Nsub, emb = Cs.subgroup_group(N.tolist())
    ngens = [int(emb[g]) for g in Nsub.generating_sequence()]
    powers = N.copy()
    acc = N.copy()
    for _ in range(p - 1):
        acc = t[acc, N]
    powers = acc
    comms = [int(t[t[inv[a], inv[b]], t[a, b]]) for a in ngens for b in ngens]
    Pn = Cs.normal_closure(list(set(powers.tolist())) + comms)
    ids = Cs.cosets(Pn)
    # basis of N/Pn
    basis: list[int] = []
    span = Cs.closure_mask(Pn)
    for x in N.tolist():
        if not span[x]:
            basis.append(x)
            span = Cs.closure_mask(list(Pn) + basis)
    r = len(basis)
    if r == 0:
        return 0
    code_of = {}
    vecs = L.all_vectors(p, r)
    for code in range(p ** r):
        x = 0
        for i in range(r):
            for _ in range(int(vecs[code][i])):
                x = int(t[x, basis[i]])
        code_of[int(ids[x])] = code
    mats_V = []
    mats_G = []
    for c in Cs.marked:
        ci = int(inv[c])
        cols = []
        for b in basis:
            y = int(t[t[c, b], ci])
            cols.append(vecs[code_of[int(ids[y])]])
        mats_V.append(np.array(cols, dtype=np.int64).T.reshape(r, r))
        mats_G.append(G.matrices[int(rho[c])])
    k = len(Cs.marked)
    hom = intertwiners(np.array(mats_V), np.array(mats_G), list(range(k)), p)
    dim = hom.shape[0]
    e = 0
    h = G.hH
    while h > 1:
        h //= p
        e += 1
    if dim % e:
        raise ConsistencyError("Hom dimension is not a multiple of log_p h")
    return dim // e


# ---------------------------------------------------------------------------
# module-level conveniences
# ---------------------------------------------------------------------------

_ENGINES: dict = {}


def engine_for(S: Sequence[SmallGroup]) -> MeasureEngine:
    key = tuple(id(G) for G in S)
    hit = _ENGINES.get(key)
    if hit is None:
        hit = (list(S), MeasureEngine(S))
        _ENGINES[key] = hit
    return hit[1]


def multiplicity(S, n: int, H: SmallGroup, G) -> int:
    return engine_for(S).multiplicity(n, H, G)


def lambda_value(S, H: SmallGroup, G) -> LambdaValue:
    return engine_for(S).lam(H, G)


def mu_un(S, H: SmallGroup, n: int, u: int) -> MeasureValue:
    return engine_for(S).mu_un(H, n, u)


def mu_u(S, H: SmallGroup, u: int) -> MeasureValue:
    return engine_for(S).mu_u(H, u)


def achievable(S, H: SmallGroup, u: int) -> bool:
    return engine_for(S).achievable(H, u)


def distribution_table(S, n: int, u: int, catalog: Sequence[SmallGroup] = ()) -> DistributionTable:
    return engine_for(S).distribution_table(n, u, catalog)
