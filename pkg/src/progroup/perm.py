"""Permutation groups with Schreier-Sims stabilizer chains.

Permutations are tuples of images on 0..degree-1.  Products compose left to
right: ``mul(p, q)[i] == q[p[i]]`` (apply p first).
"""

from __future__ import annotations

from collections import deque
from typing import Iterable, Optional, Sequence

import numpy as np

from .bounds import BOUNDS
from .errors import BoundExceeded, InputError

Perm = tuple  # tuple[int, ...]


def identity(degree: int) -> Perm:
    return tuple(range(degree))


def mul(p: Perm, q: Perm) -> Perm:
    return tuple([q[i] for i in p])


def inv(p: Perm) -> Perm:
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


def is_identity(p: Perm) -> bool:
    return all(i == j for i, j in enumerate(p))


def power(p: Perm, k: int) -> Perm:
    result = identity(len(p))
    base = p if k >= 0 else inv(p)
    k = abs(k)
    while k:
        if k & 1:
            result = mul(result, base)
        base = mul(base, base)
        k >>= 1
    return result


def perm_order(p: Perm) -> int:
    from math import lcm

    seen = [False] * len(p)
    out = 1
    for start in range(len(p)):
        if seen[start]:
            continue
        length = 0
        i = start
        while not seen[i]:
            seen[i] = True
            i = p[i]
            length += 1
        out = lcm(out, length)
    return out


def from_cycles(cycles: Iterable[Sequence[int]], degree: int) -> Perm:
    img = list(range(degree))
    for cyc in cycles:
        for a, b in zip(cyc, list(cyc[1:]) + [cyc[0]]):
            img[a] = b
    return check_perm(img)


def check_perm(images: Sequence[int], degree: Optional[int] = None) -> Perm:
    p = tuple(int(x) for x in images)
    if degree is not None and len(p) != degree:
        raise InputError(f"permutation has degree {len(p)}, expected {degree}")
    if sorted(p) != list(range(len(p))):
        raise InputError(f"{list(p)} is not a bijection on 0..{len(p) - 1}")
    return p


def conjugate(p: Perm, g: Perm) -> Perm:
    """g^-1 p g."""
    return mul(mul(inv(g), p), g)


class WorkMeter:
    """Shared budget of permutation-multiplication work (in points moved)."""

    def __init__(self, limit: int, what: str = "stabilizer chain"):
        self.limit = limit
        self.spent = 0
        self.what = what

    def spend(self, amount: int) -> None:
        self.spent += amount
        if self.spent > self.limit:
            raise BoundExceeded(f"{self.what} exceeded the work bound {self.limit}")


class StabilizerChain:
    """Deterministic Schreier-Sims with incremental strong generators.

    ``base_limit`` restricts base points to ``range(base_limit)``.  If a
    nontrivial element fixing all those points turns up, construction stops
    and ``kernel_witness`` holds it; the graph-subgroup test uses this to
    detect a nontrivial intersection with the second direct factor early.
    """

    def __init__(self, degree: int, base_limit: Optional[int] = None,
                 meter: Optional[WorkMeter] = None):
        self.degree = degree
        self.meter = meter
        self.base_limit = degree if base_limit is None else base_limit
        self.base: list[int] = []
        self.level_gens: list[list[Perm]] = []
        self.transversal: list[dict[int, Perm]] = []  # point -> u with u[base] = point
        self.transversal_inv: list[dict[int, Perm]] = []
        self.orbit_list: list[list[int]] = []
        self._checked: list[set] = []
        self.kernel_witness: Optional[Perm] = None

    # -- queries -------------------------------------------------------
    def order(self) -> int:
        out = 1
        for orb in self.orbit_list:
            out *= len(orb)
        return out

    def sift(self, g: Perm, start: int = 0) -> tuple[Perm, int]:
        for i in range(start, len(self.base)):
            b = g[self.base[i]]
            u_inv = self.transversal_inv[i].get(b)
            if u_inv is None:
                return g, i
            g = mul(g, u_inv)
            if self.meter is not None:
                self.meter.spend(self.degree)
        return g, len(self.base)

    def contains(self, g: Perm) -> bool:
        h, _ = self.sift(g)
        return is_identity(h)

    def strong_generators(self) -> list[Perm]:
        seen = {}
        for gens in self.level_gens:
            for g in gens:
                seen[g] = None
        return list(seen)

    def random_element(self, rng: np.random.Generator) -> Perm:
        g = identity(self.degree)
        for i in range(len(self.base) - 1, -1, -1):
            orb = self.orbit_list[i]
            pt = orb[int(rng.integers(len(orb)))]
            g = mul(g, self.transversal[i][pt])
        return g

    # -- construction --------------------------------------------------
    def _new_level(self, point: int) -> None:
        self.base.append(point)
        ident = identity(self.degree)
        self.level_gens.append([])
        self.transversal.append({point: ident})
        self.transversal_inv.append({point: ident})
        self.orbit_list.append([point])
        self._checked.append(set())

    def _extend_orbit(self, level: int) -> None:
        trans = self.transversal[level]
        tinv = self.transversal_inv[level]
        orb = self.orbit_list[level]
        gens = self.level_gens[level]
        queue = deque(orb)
        while queue:
            pt = queue.popleft()
            u = trans[pt]
            for x in gens:
                q = x[pt]
                if q not in trans:
                    v = mul(u, x)
                    trans[q] = v
                    tinv[q] = inv(v)
                    orb.append(q)
                    queue.append(q)

    def _moved_base_point(self, g: Perm) -> Optional[int]:
        for i in range(self.base_limit):
            if g[i] != i:
                return i
        return None

    def _install(self, h: Perm, lo: int, hi: int) -> bool:
        """Add h as a strong generator on levels lo..hi (hi may be a new level)."""
        if hi == len(self.base):
            pt = self._moved_base_point(h)
            if pt is None:
                self.kernel_witness = h
                return False
            self._new_level(pt)
        for lvl in range(lo, hi + 1):
            self.level_gens[lvl].append(h)
            self._extend_orbit(lvl)
        return True

    def add_generator(self, g: Perm) -> bool:
        """Extend the group by g.  Returns False if g was already a member."""
        if self.kernel_witness is not None:
            return False
        h, j = self.sift(g)
        if j == len(self.base) and is_identity(h):
            return False
        if not self._install(h, 0, j):
            return True
        self._complete(j)
        return True

    def _complete(self, i: int) -> None:
        while i >= 0 and self.kernel_witness is None:
            found = None
            trans = self.transversal[i]
            tinv = self.transversal_inv[i]
            checked = self._checked[i]
            for pt in self.orbit_list[i]:
                u = trans[pt]
                for gi, x in enumerate(self.level_gens[i]):
                    key = (pt, gi)
                    if key in checked:
                        continue
                    checked.add(key)
                    s = mul(mul(u, x), tinv[x[pt]])
                    if self.meter is not None:
                        self.meter.spend(2 * self.degree)
                    h, j = self.sift(s, i + 1)
                    if j < len(self.base) or not is_identity(h):
                        found = (h, j)
                        break
                if found:
                    break
            if found is None:
                i -= 1
                continue
            h, j = found
            if not self._install(h, i + 1, j):
                return
            i = j


class FiniteGroup:
    """Permutation group given by generators; the chain is built on first use."""

    def __init__(self, generators: Sequence[Perm], degree: Optional[int] = None,
                 label: Optional[str] = None):
        gens = [tuple(g) for g in generators]
        if degree is None:
            if not gens:
                raise InputError("empty generator list needs an explicit degree")
            degree = len(gens[0])
        if degree <= 0:
            raise InputError("degree must be positive")
        for g in gens:
            if len(g) != degree:
                raise InputError(f"generator of degree {len(g)} in a degree-{degree} group")
        self.degree = degree
        self.generators = gens
        self.label = label
        self._chain: Optional[StabilizerChain] = None

    @property
    def chain(self) -> StabilizerChain:
        if self._chain is None:
            chain = StabilizerChain(self.degree)
            for g in self.generators:
                chain.add_generator(g)
            self._chain = chain
        return self._chain

    def order(self) -> int:
        return self.chain.order()

    def contains(self, g: Perm) -> bool:
        if len(g) != self.degree:
            raise InputError("degree mismatch")
        return self.chain.contains(tuple(g))

    def uniform_element(self, rng: np.random.Generator) -> Perm:
        return self.chain.random_element(rng)

    def identity(self) -> Perm:
        return identity(self.degree)

    def elements(self, limit: int = 10**6) -> list[Perm]:
        """Exhaustive BFS closure under right multiplication by generators."""
        start = identity(self.degree)
        seen = {start: None}
        queue = deque([start])
        while queue:
            x = queue.popleft()
            for g in self.generators:
                y = mul(x, g)
                if y not in seen:
                    seen[y] = None
                    if len(seen) > limit:
                        raise BoundExceeded(f"closure exceeds {limit} elements")
                    queue.append(y)
        return list(seen)

    def is_normal_in(self, G: "FiniteGroup") -> bool:
        return all(self.contains(conjugate(n, g)) for n in self.generators for g in G.generators)

    def __repr__(self) -> str:
        name = self.label or "FiniteGroup"
        return f"<{name} degree={self.degree} gens={len(self.generators)}>"


def build_group(generators: Sequence[Sequence[int]], label: Optional[str] = None) -> FiniteGroup:
    if not generators:
        raise InputError("build_group needs at least one generator")
    gens = [check_perm(g) for g in generators]
    degree = len(gens[0])
    if degree == 0:
        raise InputError("degree 0")
    if any(len(g) != degree for g in gens):
        raise InputError("generators have different degrees")
    G = FiniteGroup(gens, degree, label)
    _ = G.chain
    return G


def contains(G: FiniteGroup, g: Sequence[int]) -> bool:
    return G.contains(tuple(g))


def uniform_element(G: FiniteGroup, rng: np.random.Generator) -> Perm:
    return G.uniform_element(rng)


def subgroup(G: FiniteGroup, elems: Sequence[Perm], label: Optional[str] = None) -> FiniteGroup:
    gens = [tuple(e) for e in elems if not is_identity(e)]
    H = FiniteGroup(gens, G.degree, label)
    return H


def normal_closure(G: FiniteGroup, elems: Sequence[Perm]) -> FiniteGroup:
    for e in elems:
        if not G.contains(e):
            raise InputError("element outside the ambient group")
    gens = [tuple(e) for e in elems if not is_identity(e)]
    N = FiniteGroup(list(gens), G.degree)
    chain = StabilizerChain(G.degree)
    for g in gens:
        chain.add_generator(g)
    queue = deque(gens)
    while queue:
        n = queue.popleft()
        for g in G.generators:
            c = conjugate(n, g)
            if chain.add_generator(c):
                N.generators.append(c)
                queue.append(c)
    N._chain = chain
    return N


def coset_representative(N: FiniteGroup, g: Perm) -> Perm:
    """Canonical element of the coset N*g: greedily minimise images of N's base."""
    ch = N.chain
    for i, beta in enumerate(ch.base):
        trans = ch.transversal[i]
        best = min(ch.orbit_list[i], key=lambda d: g[d])
        g = mul(trans[best], g)
    return g


def quotient(G: FiniteGroup, N: FiniteGroup, index_bound: Optional[int] = None):
    """Return (Q, projection) with Q the Cayley-table group G/N.

    The projection maps each generator of G to its coset in Q, so Q's marked
    generators are the images of G's generators.
    """
    from .smallgroup import Homomorphism, SmallGroup

    if not N.is_normal_in(G):
        raise InputError("subgroup is not normal")
    bound = BOUNDS.quotient_index if index_bound is None else index_bound
    index = G.order() // N.order()
    if index > bound:
        raise BoundExceeded(f"quotient index {index} exceeds bound {bound}")
    start = coset_representative(N, G.identity())
    reps = [start]
    where = {start: 0}
    actions = [[] for _ in G.generators]
    i = 0
    while i < len(reps):
        r = reps[i]
        for k, x in enumerate(G.generators):
            c = coset_representative(N, mul(r, x))
            j = where.get(c)
            if j is None:
                j = len(reps)
                where[c] = j
                reps.append(c)
            actions[k].append(j)
        i += 1
    assert len(reps) == index
    gen_images = [actions[k][0] for k in range(len(G.generators))]
    Q = SmallGroup.from_right_action(actions, gen_images)
    proj = Homomorphism(G, Q, gen_images)
    return Q, proj
