"""Chief factor pairs (M, A): a chief factor M and the image A of the group in Aut(M)."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .bounds import BOUNDS
from .errors import BoundExceeded
from .smallgroup import (SmallGroup, automorphism_maps, conjugacy_classes_of_subgroups,
                         is_isomorphic, minimal_normal_subgroups)


@dataclass(eq=False)
class ChiefFactorPair:
    M: SmallGroup
    A: SmallGroup  # abstract group; A.perms[a] is a's permutation of M's elements

    @property
    def abelian(self) -> bool:
        return self.M.is_abelian

    @cached_property
    def action(self) -> np.ndarray:
        """(|A|, |M|) array: row a is the permutation of M induced by a."""
        if self.A.perms is None:
            raise BoundExceeded("action group too large to store element permutations")
        return np.asarray(self.A.perms, dtype=np.int64)

    @cached_property
    def signature(self) -> tuple:
        orbit_sizes = Counter()
        seen = np.zeros(self.M.order, dtype=bool)
        act = self.action
        for x in range(self.M.order):
            if not seen[x]:
                orb = np.unique(act[:, x])
                seen[orb] = True
                orbit_sizes[orb.size] += 1
        return (self.M.order, self.A.order, self.M.invariant_key, self.A.invariant_key,
                tuple(sorted(orbit_sizes.items())))

    def describe(self) -> str:
        return f"({_name(self.M)}, order-{self.A.order} action)"

    def __repr__(self) -> str:
        return f"<ChiefFactorPair |M|={self.M.order} |A|={self.A.order}>"


def _name(G: SmallGroup) -> str:
    return G.label or f"order {G.order}"


def _pair_from(Q: SmallGroup, N: Iterable[int]) -> ChiefFactorPair:
    M, emb = Q.subgroup_group(N)
    pos = np.full(Q.order, -1, dtype=np.int64)
    pos[emb] = np.arange(emb.size)
    perms = []
    for q in Q.marked:
        conj = Q.conj_map(q)
        perms.append(tuple(pos[conj[emb]].tolist()))
    if not perms:
        perms = [tuple(range(M.order))]
    A = SmallGroup.from_perms(perms)
    return ChiefFactorPair(M, A)


def chief_factor_pairs(G: SmallGroup, pick: int = 0) -> list[ChiefFactorPair]:
    """Pairs along one chief series, bottom up.

    ``pick`` chooses which minimal normal subgroup to factor out at each step,
    so different values give (possibly) different chief series.
    """
    if G.order > BOUNDS.table_order:
        raise BoundExceeded(f"chief series: order {G.order} exceeds bound {BOUNDS.table_order}")
    out = []
    Q = G
    step = 0
    while Q.order > 1:
        mins = minimal_normal_subgroups(Q)
        N = mins[(pick + step) % len(mins)] if pick else mins[0]
        out.append(_pair_from(Q, N))
        Q, _ = Q.quotient(N)
        step += 1
    return out


def _transport(pair: ChiefFactorPair, alpha: np.ndarray) -> list[np.ndarray]:
    """Generators of A moved along alpha: M -> M'."""
    ainv = np.empty_like(alpha)
    ainv[alpha] = np.arange(alpha.size)
    out = []
    for a in pair.A.marked:
        p = pair.action[a]
        out.append(alpha[p[ainv]])
    return out


def pairs_isomorphic(P1: ChiefFactorPair, P2: ChiefFactorPair) -> bool:
    """Is there an isomorphism M1 -> M2 carrying A1 onto A2?"""
    if P1.signature != P2.signature:
        return False
    iso = is_isomorphic(P1.M, P2.M)
    if iso is None:
        return False
    moved = _transport(P1, iso.mapping)
    target = {row.tobytes() for row in P2.action}
    for beta in automorphism_maps(P2.M):
        binv = np.empty_like(beta)
        binv[beta] = np.arange(beta.size)
        if all(beta[q[binv]].tobytes() in target for q in moved):
            return True
    return False


def dedup_pairs(pairs: Sequence[ChiefFactorPair]) -> list[ChiefFactorPair]:
    out: list[ChiefFactorPair] = []
    for p in pairs:
        if not any(pairs_isomorphic(p, q) for q in out):
            out.append(p)
    return out


def same_multiset(a: Sequence[ChiefFactorPair], b: Sequence[ChiefFactorPair]) -> bool:
    if len(a) != len(b):
        return False
    rest = list(b)
    for p in a:
        for i, q in enumerate(rest):
            if pairs_isomorphic(p, q):
                del rest[i]
                break
        else:
            return False
    return True


def cf_of_set(S: Sequence[SmallGroup]) -> list[ChiefFactorPair]:
    """CF of the closure of S under subgroups and quotients.

    Chief factors of a quotient K/N already occur in K (run a chief series of K
    through N), so subgroups of members of S suffice.
    """
    pairs: list[ChiefFactorPair] = []
    count = 0
    for G in S:
        for cls in conjugacy_classes_of_subgroups(G):
            count += 1
            if count > BOUNDS.closure_groups:
                raise BoundExceeded("subgroup closure of S exceeds the group-count bound")
            K, _ = G.subgroup_group(cls[0])
            for p in chief_factor_pairs(K):
                if not any(pairs_isomorphic(p, q) for q in pairs):
                    pairs.append(p)
    return pairs


def pair_in(pair: ChiefFactorPair, pairs: Sequence[ChiefFactorPair]) -> bool:
    return any(pairs_isomorphic(pair, q) for q in pairs)


def simple_groups_in(pairs: Sequence[ChiefFactorPair]) -> list[SmallGroup]:
    """Nonabelian simple groups Gamma with some chief factor Gamma^j."""
    out: list[SmallGroup] = []
    for p in pairs:
        if p.abelian:
            continue
        gamma = simple_component(p.M)
        if not any(is_isomorphic(gamma, g) for g in out):
            out.append(gamma)
    return out


def simple_component(M: SmallGroup) -> SmallGroup:
    """For a characteristically simple nonabelian M = Gamma^j, return Gamma."""
    mins = minimal_normal_subgroups(M)
    K, _ = M.subgroup_group(min(mins, key=len))
    return K
