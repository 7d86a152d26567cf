"""Finite pro-S completions of free groups, and level-S membership.

The completion of F_n with respect to a finite set S is the image of the free
generators in the product of G over all homomorphisms F_n -> G, G in S: any
quotient of F_n lying in the subgroup/quotient/product closure of S factors
through a subgroup of such a product.  Homomorphisms in the same Aut(G)-orbit
have the same kernel, so one per orbit suffices, and a coordinate whose kernel
already contains the intersection of the earlier kernels changes nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import perm as P
from .bounds import BOUNDS
from .errors import BoundExceeded, InputError
from .smallgroup import (SmallGroup, automorphism_maps, generating_tuple, iter_homs,
                         normal_subgroup_sets, rank)


def element_perm(G: SmallGroup, g: int) -> P.Perm:
    if G.perms is not None:
        return tuple(G.perms[g].tolist())
    return G.regular_perm(g)


def graph_is_hom(src: Sequence[P.Perm], dst: Sequence[P.Perm],
                 meter: Optional[P.WorkMeter] = None) -> bool:
    """Does src[i] -> dst[i] extend to a homomorphism <src> -> <dst>?

    Builds the subgroup of the direct product generated by the pairs, using
    base points from the first factor only; a nontrivial element fixing the
    whole first factor witnesses a nontrivial intersection with the second.
    """
    split = len(src[0])
    degree = split + len(dst[0])
    chain = P.StabilizerChain(degree, base_limit=split, meter=meter)
    for a, b in zip(src, dst):
        joined = tuple(a) + tuple(x + split for x in b)
        chain.add_generator(joined)
        if chain.kernel_witness is not None:
            return False
    return chain.kernel_witness is None


def _hom_orbit_reps(G: SmallGroup, n: int, dedup: bool) -> list[tuple[int, ...]]:
    tuples = np.array(np.meshgrid(*[np.arange(G.order)] * n, indexing="ij")).reshape(n, -1).T
    if dedup:
        auts = np.array(automorphism_maps(G))
        # canonical representative: lexicographically least image; chunked to bound memory
        weights = G.order ** np.arange(n - 1, -1, -1)
        step = max(1, 4_000_000 // (len(auts) * n))
        keep = []
        for lo in range(0, len(tuples), step):
            chunk = tuples[lo:lo + step]
            canon = (auts[:, chunk] * weights).sum(axis=2).min(axis=0)
            own = (chunk * weights).sum(axis=1)
            keep.append(chunk[own == canon])
        tuples = np.concatenate(keep)
    reps = [tuple(int(x) for x in t) for t in tuples]
    sizes = {t: len(G.generated(t)) for t in reps}
    reps.sort(key=lambda t: (-sizes[t], t))
    return reps


@dataclass
class MarkedCompletion:
    underlying: P.FiniteGroup
    n: int
    hom_list: list  # (index into S, images of the n free generators)
    S: list
    offered: dict = field(default_factory=dict)  # S index -> number of orbit representatives

    def order(self) -> int:
        return self.underlying.order()

    @property
    def degree(self) -> int:
        return self.underlying.degree

    @property
    def generators(self) -> list[P.Perm]:
        return self.underlying.generators

    def small_group(self) -> SmallGroup:
        return SmallGroup.from_perms(self.generators, label=f"C{self.n}")

    def coordinate_hom(self, k: int):
        """(G, images) for the k-th product coordinate."""
        gi, images = self.hom_list[k]
        return self.S[gi], images


def pro_completion(n: int, S: Sequence[SmallGroup], dedup: bool = True, prune: bool = True,
                   degree_bound: Optional[int] = None) -> MarkedCompletion:
    if n < 1:
        raise InputError("free rank n must be at least 1")
    if not S:
        raise InputError("S must be nonempty")
    bound = BOUNDS.completion_degree if degree_bound is None else degree_bound
    gens: Optional[list[P.Perm]] = None
    hom_list = []
    offered = {}
    contrib = {}
    meter = P.WorkMeter(BOUNDS.completion_work, "building the completion")
    for gi, G in enumerate(S):
        if G.order == 1:
            continue
        if G.order ** n > 5_000_000:
            raise BoundExceeded(f"Hom(F_{n}, {G.label or G.order}) has too many elements to enumerate")
        reps = _hom_orbit_reps(G, n, dedup)
        offered[gi] = len(reps)
        for images in reps:
            if all(x == 0 for x in images):
                continue
            block = [element_perm(G, x) for x in images]
            if gens is not None and prune and graph_is_hom(gens, block, meter):
                continue
            if gens is None:
                gens = [tuple(b) for b in block]
            else:
                shift = len(gens[0])
                gens = [tuple(a) + tuple(x + shift for x in b) for a, b in zip(gens, block)]
            hom_list.append((gi, images))
            contrib[gi] = contrib.get(gi, 0) + len(block[0])
            if len(gens[0]) > bound:
                worst = max(contrib, key=contrib.get)
                name = S[worst].label or f"group of order {S[worst].order}"
                raise BoundExceeded(f"completion degree exceeds {bound}; dominated by {name}")
    if gens is None:
        gens = [(0,)] * n
    F = P.FiniteGroup(gens, len(gens[0]), label=f"completion(n={n})")
    return MarkedCompletion(F, n, hom_list, list(S), offered)


_CACHE: dict = {}


def cached_completion(n: int, S: Sequence[SmallGroup]) -> MarkedCompletion:
    # the stored list keeps the groups alive, so their ids stay unique
    key = (n, tuple(id(G) for G in S))
    hit = _CACHE.get(key)
    if hit is None:
        hit = (list(S), pro_completion(n, S))
        _CACHE[key] = hit
    return hit[1]


_TARGETS: dict = {}


def _quotient_targets(S: Sequence[SmallGroup]) -> list[SmallGroup]:
    key = tuple(id(G) for G in S)
    hit = _TARGETS.get(key)
    if hit is None:
        out = []
        for G in S:
            for N in normal_subgroup_sets(G):
                if len(N) < G.order:
                    out.append(G if len(N) == 1 else G.quotient(N)[0])
        hit = (list(S), out)
        _TARGETS[key] = hit
    return hit[1]


def _embeds(Q: SmallGroup, targets: Sequence[SmallGroup]) -> bool:
    for T in targets:
        if T.order % Q.order == 0:
            if Q.order == 1:
                return True
            for _ in iter_homs(Q, T, injective=True):
                return True
    return False


def subdirect_witness(E: SmallGroup, S: Sequence[SmallGroup]) -> bool:
    """Sufficient test: E is a subdirect product of groups embedding in quotients of members of S."""
    if E.order > BOUNDS.table_order:
        return False
    targets = _quotient_targets(S)
    meet = np.ones(E.order, dtype=bool)
    for N in sorted(normal_subgroup_sets(E), key=len):
        if len(N) == E.order:
            continue
        arr = np.fromiter(N, dtype=np.int64)
        mask = np.zeros(E.order, dtype=bool)
        mask[arr] = True
        if (meet & mask).sum() == meet.sum():
            continue  # would not shrink the intersection
        Q = E if len(N) == 1 else E.quotient(N)[0]
        if _embeds(Q, targets):
            meet &= mask
            if meet.sum() == 1:
                return True
    return False


def is_level(E: SmallGroup, S: Sequence[SmallGroup], n: Optional[int] = None,
             completion: Optional[MarkedCompletion] = None) -> bool:
    """Is E a quotient of the completion on d(E) (or n >= d(E)) generators?

    The completion is relatively free in the closure of S, so a single
    generating tuple of E decides the question.  A cheap subdirect-product
    test is tried first when no completion is supplied.
    """
    if E.order == 1:
        return True
    if completion is None and subdirect_witness(E, S):
        return True
    d = rank(E) if n is None and completion is None else (completion.n if completion else n)
    tup = generating_tuple(E, d)
    if tup is None:
        raise InputError(f"E needs more than {d} generators")
    C = completion if completion is not None else cached_completion(d, S)
    return graph_is_hom(C.generators, [element_perm(E, x) for x in tup])


def quotient_map_exists(C: MarkedCompletion, E: SmallGroup, images: Sequence[int]) -> bool:
    """Does the marked generator i -> images[i] define a homomorphism C -> E?"""
    return graph_is_hom(C.generators, [element_perm(E, x) for x in images])
