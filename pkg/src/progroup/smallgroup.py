"""Groups stored as multiplication tables, with identity at index 0.

Everything here is exhaustive over the elements, so sizes are capped by
``BOUNDS``.  Subgroups are frozensets of element indices.
"""

from __future__ import annotations

from collections import Counter, deque
from functools import cached_property
from itertools import product
from typing import Callable, Iterable, Iterator, Optional, Sequence

import numpy as np

from . import perm as P
from .bounds import BOUNDS
from .errors import BoundExceeded, ConsistencyError, InputError

Subset = frozenset

TABLE_MEMORY_LIMIT = 6000  # largest order whose full table we materialise


def _require(order: int, bound: int, what: str) -> None:
    if order > bound:
        raise BoundExceeded(f"{what}: order {order} exceeds bound {bound}")


class SmallGroup:
    """Finite group given by its right-regular Cayley graph and (lazily) its table.

    ``actions[k][x]`` is the index of ``x * gens[k]`` for the generators used to
    build the group; ``marked`` are the indices of the distinguished generators
    (usually the same elements).
    """

    def __init__(self, table: Optional[np.ndarray] = None, marked: Optional[Sequence[int]] = None,
                 label: Optional[str] = None, actions: Optional[np.ndarray] = None,
                 perms: Optional[np.ndarray] = None):
        if table is None and actions is None:
            raise InputError("need a table or generator actions")
        if table is not None:
            table = np.ascontiguousarray(table, dtype=np.int32)
            self.order = int(table.shape[0])
            self.__dict__["table"] = table
        else:
            self.order = int(actions.shape[1])
        self._actions = actions
        self.label = label
        self.perms = perms  # optional faithful permutation image of every element
        if marked is None:
            marked = self.generating_sequence()
        self.marked = [int(x) for x in marked]

    # -- construction ---------------------------------------------------
    @classmethod
    def from_right_action(cls, actions: Sequence[Sequence[int]], marked: Sequence[int],
                          label: Optional[str] = None, perms=None) -> "SmallGroup":
        if len(actions) == 0:
            return cls(table=np.zeros((1, 1), dtype=np.int32), marked=[], label=label)
        acts = np.asarray(actions, dtype=np.int32).reshape(len(actions), -1)
        return cls(marked=marked, label=label, actions=acts, perms=perms)

    @classmethod
    def from_perms(cls, generators: Sequence[Sequence[int]], label: Optional[str] = None,
                   limit: Optional[int] = None) -> "SmallGroup":
        gens = [tuple(g) for g in generators]
        if not gens:
            raise InputError("need at least one generator")
        degree = len(gens[0])
        limit = BOUNDS.quotient_index if limit is None else limit
        start = P.identity(degree)
        elems = [start]
        where = {start: 0}
        actions = [[] for _ in gens]
        i = 0
        while i < len(elems):
            x = elems[i]
            for k, g in enumerate(gens):
                y = P.mul(x, g)
                j = where.get(y)
                if j is None:
                    j = len(elems)
                    if j >= limit:
                        raise BoundExceeded(f"group generated by permutations exceeds {limit} elements")
                    where[y] = j
                    elems.append(y)
                actions[k].append(j)
            i += 1
        marked = [actions[k][0] for k in range(len(gens))]
        perms = np.array(elems, dtype=np.int32) if len(elems) * degree <= 5_000_000 else None
        return cls.from_right_action(actions, marked, label, perms)

    @classmethod
    def from_table(cls, table, marked=None, label=None, check: bool = True) -> "SmallGroup":
        t = np.asarray(table, dtype=np.int32)
        n = t.shape[0]
        if t.shape != (n, n):
            raise InputError("table must be square")
        if check:
            ar = np.arange(n)
            if not (np.array_equal(t[0], ar) and np.array_equal(t[:, 0], ar)):
                raise InputError("index 0 must be the identity")
            for row in t:
                if len(set(row.tolist())) != n:
                    raise InputError("table rows are not permutations")
            if n <= 64:
                left = t[t]  # left[a, b, c] = (ab)c
                right = t[:, t]  # right[a, b, c] = a(bc)
                if not np.array_equal(left, right):
                    raise InputError("table is not associative")
        return cls(table=t, marked=marked, label=label)

    # -- basic structure -------------------------------------------------
    @cached_property
    def table(self) -> np.ndarray:
        n = self.order
        if n > TABLE_MEMORY_LIMIT:
            raise BoundExceeded(f"refusing to build a {n}x{n} multiplication table")
        acts = self._actions
        parent, via, order = _bfs_tree(acts)
        table = np.empty((n, n), dtype=np.int32)
        table[:, 0] = np.arange(n)
        for j in order[1:]:
            table[:, j] = acts[via[j]][table[:, parent[j]]]
        return table

    @cached_property
    def actions(self) -> np.ndarray:
        if self._actions is not None:
            return self._actions
        return np.ascontiguousarray(self.table[:, self.marked].T)

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    @cached_property
    def inverse(self) -> np.ndarray:
        rows, cols = np.nonzero(self.table == 0)
        inv = np.empty(self.order, dtype=np.int32)
        inv[rows] = cols
        return inv

    @cached_property
    def element_orders(self) -> np.ndarray:
        n = self.order
        t = self.table
        ar = np.arange(n)
        orders = np.zeros(n, dtype=np.int64)
        cur = ar.copy()
        k = 1
        while (orders == 0).any():
            hit = (cur == 0) & (orders == 0)
            orders[hit] = k
            cur = t[cur, ar]
            k += 1
        return orders

    @cached_property
    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    def commute_with(self, elems: Iterable[int]) -> np.ndarray:
        t = self.table
        mask = np.ones(self.order, dtype=bool)
        for g in elems:
            mask &= t[:, g] == t[g, :]
        return mask

    @cached_property
    def center(self) -> Subset:
        return frozenset(np.flatnonzero(self.commute_with(self.marked)).tolist())

    def conj_map(self, g: int) -> np.ndarray:
        """x -> g^-1 x g as an index array."""
        t = self.table
        return t[t[self.inverse[g], :], g]

    @cached_property
    def class_ids(self) -> np.ndarray:
        maps = [self.conj_map(g) for g in self.marked]
        ids = np.full(self.order, -1, dtype=np.int64)
        c = 0
        for start in range(self.order):
            if ids[start] >= 0:
                continue
            ids[start] = c
            stack = [start]
            while stack:
                x = stack.pop()
                for m in maps:
                    y = int(m[x])
                    if ids[y] < 0:
                        ids[y] = c
                        stack.append(y)
            c += 1
        return ids

    @cached_property
    def class_sizes(self) -> np.ndarray:
        """Size of the conjugacy class of each element."""
        counts = np.bincount(self.class_ids)
        return counts[self.class_ids]

    @cached_property
    def derived_subgroup(self) -> Subset:
        # normal closure of commutators of generators
        t, inv = self.table, self.inverse
        gens = {int(t[t[inv[a], inv[b]], t[a, b]]) for a in self.marked for b in self.marked}
        return self.normal_closure(gens)

    # -- subgroups --------------------------------------------------------
    def closure_mask(self, elems: Iterable[int]) -> np.ndarray:
        gens = np.unique(np.fromiter((int(e) for e in elems), dtype=np.int64))
        gens = gens[gens != 0]
        mask = np.zeros(self.order, dtype=bool)
        mask[0] = True
        frontier = np.array([0])
        if gens.size == 0:
            return mask
        t = self.table
        fresh = np.zeros(self.order, dtype=bool)
        while frontier.size:
            fresh[t[frontier[:, None], gens[None, :]].ravel()] = True
            fresh &= ~mask
            frontier = np.flatnonzero(fresh)
            mask |= fresh
            fresh[:] = False
        return mask

    def generated(self, elems: Iterable[int]) -> Subset:
        return frozenset(np.flatnonzero(self.closure_mask(elems)).tolist())

    def generates(self, elems: Iterable[int]) -> bool:
        return bool(self.closure_mask(elems).all())

    def is_normal(self, K: Iterable[int]) -> bool:
        K = frozenset(K)
        arr = np.fromiter(K, dtype=np.int64)
        mask = np.zeros(self.order, dtype=bool)
        mask[arr] = True
        return all(mask[self.conj_map(g)[arr]].all() for g in self.marked)

    def normal_closure(self, elems: Iterable[int]) -> Subset:
        mask = self.closure_mask(elems)
        maps = [self.conj_map(g) for g in self.marked]
        while True:
            members = np.flatnonzero(mask)
            extra = np.unique(np.concatenate([m[members] for m in maps]))
            extra = extra[~mask[extra]]
            if extra.size == 0:
                return frozenset(members.tolist())
            mask = self.closure_mask(np.concatenate([members, extra]).tolist())

    def cosets(self, N: Iterable[int]) -> np.ndarray:
        """coset_id[g] for the left cosets gN, numbered by smallest element."""
        arr = np.fromiter(sorted(N), dtype=np.int64)
        keys = self.table[:, arr].min(axis=1)
        _, ids = np.unique(keys, return_inverse=True)
        return ids.astype(np.int64)

    def quotient(self, N: Iterable[int], label: Optional[str] = None) -> tuple["SmallGroup", np.ndarray]:
        """G/N as a SmallGroup plus the projection as an index array."""
        N = frozenset(N)
        if not self.is_normal(N):
            raise InputError("quotient by a non-normal subgroup")
        ids = self.cosets(N)
        m = int(ids.max()) + 1
        reps = np.full(m, self.order, dtype=np.int64)
        np.minimum.at(reps, ids, np.arange(self.order))
        qt = ids[self.table[np.ix_(reps, reps)]]
        Q = SmallGroup(table=qt, marked=[int(ids[g]) for g in self.marked], label=label)
        return Q, ids

    def subgroup_group(self, K: Iterable[int], label: Optional[str] = None) -> tuple["SmallGroup", np.ndarray]:
        """K as a standalone SmallGroup plus the embedding (new index -> old index)."""
        els = np.array(sorted(K), dtype=np.int64)
        pos = np.full(self.order, -1, dtype=np.int64)
        pos[els] = np.arange(els.size)
        sub = pos[self.table[np.ix_(els, els)]]
        if (sub < 0).any():
            raise InputError("subset is not closed under multiplication")
        return SmallGroup(table=sub, label=label), els

    def regular_perm(self, g: int) -> P.Perm:
        """Right-regular action x -> x*g."""
        return tuple(self.table[:, g].tolist())

    def perm_generators(self) -> list[P.Perm]:
        """A faithful permutation image of the marked generators."""
        if self.perms is not None:
            return [tuple(self.perms[g].tolist()) for g in self.marked]
        return [self.regular_perm(g) for g in self.marked]

    def generating_sequence(self) -> list[int]:
        """A short generating list, each element enlarging the subgroup so far."""
        cached = self.__dict__.get("_genseq")
        if cached is not None:
            return list(cached)
        n = self.order
        if n == 1:
            self.__dict__["_genseq"] = []
            return []
        orders = self.element_orders
        ranked = sorted(range(1, n), key=lambda x: (-int(orders[x]), x))
        if orders[ranked[0]] == n:
            self.__dict__["_genseq"] = [ranked[0]]
            return [ranked[0]]
        gens: list[int] = []
        mask = np.zeros(n, dtype=bool)
        mask[0] = True
        while not mask.all():
            best, best_mask = None, None
            tried = 0
            for x in ranked:
                if mask[x]:
                    continue
                m = self.closure_mask(gens + [x])
                if best_mask is None or m.sum() > best_mask.sum():
                    best, best_mask = x, m
                tried += 1
                if best_mask.all() or tried >= 24:
                    break
            gens.append(best)
            mask = best_mask
        if len(gens) > 2:
            short = self._try_two_generators(ranked)
            if short is not None:
                gens = short
        self.__dict__["_genseq"] = gens
        return list(gens)

    def _try_two_generators(self, ranked: list[int]) -> Optional[list[int]]:
        rng = np.random.default_rng(len(ranked))
        pool = np.asarray(ranked)
        for _ in range(200):
            a, b = (int(x) for x in rng.choice(pool, size=2, replace=False))
            if self.generates([a, b]):
                if self.generated([a]) == self.generated([a, b]):
                    a, b = b, a
                if self.generated([a]) == self.generated([a, b]):
                    continue
                return [a, b]
        top = ranked[: min(len(ranked), 40)]
        for a in top:
            for b in ranked:
                if b != a and self.generates([a, b]):
                    if self.generated([a]) == self.generated([a, b]):
                        continue
                    return [a, b]
        return None

    # -- invariants -------------------------------------------------------
    @cached_property
    def invariant_key(self) -> tuple:
        """Cheap isomorphism invariant used for fast rejection and hashing."""
        if self.order == 1:
            return (1,)
        hist = tuple(sorted(Counter(self.element_orders.tolist()).items()))
        classes = int(self.class_ids.max()) + 1
        return (self.order, hist, len(self.center), len(self.derived_subgroup), classes)

    def __repr__(self) -> str:
        return f"<SmallGroup {self.label or ''} order={self.order}>"


def _bfs_tree(actions: np.ndarray):
    n = actions.shape[1]
    parent = np.full(n, -1, dtype=np.int64)
    via = np.full(n, -1, dtype=np.int64)
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    order = [0]
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for k in range(actions.shape[0]):
            y = int(actions[k, x])
            if not seen[y]:
                seen[y] = True
                parent[y] = x
                via[y] = k
                order.append(y)
                queue.append(y)
    if len(order) != n:
        raise InputError("generators do not reach every element")
    return parent, via, order


def cyclic(n: int) -> SmallGroup:
    ar = np.arange(n)
    return SmallGroup(table=(ar[:, None] + ar[None, :]) % n, marked=[1 % n] if n > 1 else [],
                      label=f"Z{n}")


def direct_product(A: SmallGroup, B: SmallGroup, label: Optional[str] = None) -> SmallGroup:
    """Elements a*|B| + b."""
    nb = B.order
    ta = A.table[:, None, :, None] * nb
    tb = B.table[None, :, None, :]
    t = (ta + tb).reshape(A.order * nb, A.order * nb)
    marked = [a * nb for a in A.marked] + list(B.marked)
    return SmallGroup(table=t, marked=[m for m in marked if m != 0], label=label)


# ---------------------------------------------------------------------------
# homomorphisms
# ---------------------------------------------------------------------------


class Homomorphism:
    """Map determined by images of the source's generators.

    For table sources the full element map is computed and verified against
    the source table; an inconsistent assignment raises InputError.
    """

    def __init__(self, source, target: SmallGroup, images: Sequence[int],
                 mapping: Optional[np.ndarray] = None, evaluate: Optional[Callable] = None):
        self.source = source
        self.target = target
        self.images = [int(x) for x in images]
        self._evaluate = evaluate
        if isinstance(source, SmallGroup):
            if mapping is None:
                mapping = extend_map(source, source.marked, self.images, target)
                if mapping is None:
                    raise InputError("generator images do not define a homomorphism")
            self.mapping = np.asarray(mapping, dtype=np.int64)
        else:
            self.mapping = None

    def __call__(self, x):
        if self.mapping is not None:
            return int(self.mapping[x])
        if self._evaluate is None:
            raise InputError("this homomorphism can only map generators")
        return self._evaluate(x)

    def image(self) -> Subset:
        return self.target.generated(self.images)

    def is_surjective(self) -> bool:
        return len(self.image()) == self.target.order

    def kernel(self) -> Subset:
        if self.mapping is None:
            raise InputError("kernel needs a table source")
        return frozenset(np.flatnonzero(self.mapping == 0).tolist())

    def is_injective(self) -> bool:
        return len(self.kernel()) == 1


Isomorphism = Homomorphism


class _Stages:
    """BFS layers of <g1>, <g1,g2>, ... used for staged homomorphism checks."""

    def __init__(self, G: SmallGroup, gens: Sequence[int]):
        self.G = G
        self.gens = list(gens)
        self.layers: list[list[tuple[np.ndarray, np.ndarray, np.ndarray]]] = []
        self.members: list[np.ndarray] = []
        t = G.table
        for i in range(len(self.gens)):
            gi = np.array(self.gens[: i + 1])
            seen_i = np.zeros(G.order, dtype=bool)
            seen_i[0] = True
            frontier = np.array([0])
            layers = []
            while frontier.size:
                kids = t[np.ix_(frontier, gi)]  # rows: parents, cols: generator
                par = np.repeat(frontier, gi.size)
                via = np.tile(np.arange(gi.size), frontier.size)
                flat = kids.ravel()
                fresh = ~seen_i[flat]
                flat, par, via = flat[fresh], par[fresh], via[fresh]
                flat, first = np.unique(flat, return_index=True)
                par, via = par[first], via[first]
                seen_i[flat] = True
                if flat.size:
                    layers.append((flat, par, via))
                frontier = flat
            self.layers.append(layers)
            self.members.append(np.flatnonzero(seen_i))

    def extend(self, i: int, images: Sequence[int], T: np.ndarray, n: int) -> Optional[np.ndarray]:
        """Map on stage i determined by images of g1..g_{i+1}; None if not a homomorphism."""
        img = np.asarray(images, dtype=np.int64)
        phi = np.full(n, -1, dtype=np.int64)
        phi[0] = 0
        for nodes, par, via in self.layers[i]:
            phi[nodes] = T[phi[par], img[via]]
        mem = self.members[i]
        gi = np.array(self.gens[: i + 1])
        lhs = phi[self.G.table[np.ix_(mem, gi)]]
        rhs = T[np.ix_(phi[mem], img)]
        if (lhs < 0).any() or not np.array_equal(lhs, rhs):
            return None
        return phi


def extend_map(G: SmallGroup, gens: Sequence[int], images: Sequence[int], T: SmallGroup) -> Optional[np.ndarray]:
    """Full map G -> T sending gens to images, or None if it is not a homomorphism."""
    gens = list(gens)
    if not gens:
        return np.zeros(G.order, dtype=np.int64) if G.order == 1 else None
    st = _Stages(G, gens)
    if st.members[-1].size != G.order:
        raise InputError("generators do not generate the source")
    return st.extend(len(gens) - 1, images, T.table, G.order)


def _word_filters(i: int) -> list[tuple]:
    """Short words in x_j (j < i) and x_i whose element orders are compared."""
    words = []
    for j in range(i):
        words += [((j, 1), (i, 1)), ((j, 1), (i, -1)), ((j, 1), (i, 1), (i, 1)),
                  ((j, 1), (j, 1), (i, 1)), ((j, 1), (i, 1), (j, -1), (i, -1)),
                  ((j, 1), (i, 1), (j, 1), (i, -1))]
    return words


def _eval_word(G: SmallGroup, word, assign: list) -> np.ndarray:
    """Evaluate a word where each letter value may be a scalar or an array."""
    t, inv = G.table, G.inverse
    acc = None
    for k, e in word:
        v = assign[k]
        v = v if e == 1 else inv[v]
        acc = v if acc is None else t[acc, v]
    return np.asarray(acc)


def iter_homs(G: SmallGroup, T: SmallGroup, gens: Optional[Sequence[int]] = None,
              candidates: Optional[Sequence[Sequence[int]]] = None,
              injective: bool = False, surjective: bool = False) -> Iterator[np.ndarray]:
    """All homomorphisms G -> T (as full index maps), by staged backtracking.

    ``candidates[i]`` restricts the image of the i-th generator.  Injective
    searches compare element orders and class sizes exactly; otherwise the
    image order must divide the source order.
    """
    gens = list(G.generating_sequence() if gens is None else gens)
    if not gens:
        if G.order == 1:
            yield np.zeros(1, dtype=np.int64)
        return
    if injective and G.order > T.order:
        return
    st = _Stages(G, gens)
    if st.members[-1].size != G.order:
        raise InputError("gens must generate G")
    go, to = G.element_orders, T.element_orders
    all_T = np.arange(T.order)
    cand_arrays = []
    for i, g in enumerate(gens):
        base = all_T if candidates is None else np.asarray(candidates[i], dtype=np.int64)
        if injective:
            keep = (to[base] == go[g])
            if G.order == T.order:
                keep &= T.class_sizes[base] == G.class_sizes[g]
        else:
            keep = (go[g] % to[base]) == 0
        cand_arrays.append(base[keep])
    filters = [_word_filters(i) for i in range(len(gens))]
    word_orders = [[int(go[int(_eval_word(G, w, gens))]) for w in filters[i]] for i in range(len(gens))]
    Tt = T.table
    budget = [BOUNDS.search_nodes]

    def rec(i: int, chosen: list) -> Iterator[np.ndarray]:
        cands = cand_arrays[i]
        if cands.size == 0:
            return
        assign = chosen + [cands]
        for w, want in zip(filters[i], word_orders[i]):
            vals = to[_eval_word(T, w, assign)]
            cands = cands[(vals == want) if injective else (want % vals == 0)]
            assign[-1] = cands
            if cands.size == 0:
                return
        for y in cands.tolist():
            budget[0] -= 1
            if budget[0] < 0:
                raise BoundExceeded("homomorphism search exceeded node budget")
            imgs = chosen + [y]
            phi = st.extend(i, imgs, Tt, G.order)
            if phi is None:
                continue
            if injective and np.unique(phi[st.members[i]]).size != st.members[i].size:
                continue
            if i + 1 < len(gens):
                yield from rec(i + 1, imgs)
            else:
                if surjective and not T.generates(imgs):
                    continue
                yield phi

    yield from rec(0, [])


def is_isomorphic(A: SmallGroup, B: SmallGroup) -> Optional[Homomorphism]:
    if A.order != B.order:
        return None
    if A.order == 1:
        return Homomorphism(A, B, [], mapping=np.zeros(1, dtype=np.int64))
    if A.invariant_key != B.invariant_key:
        return None
    if A.is_abelian != B.is_abelian:
        return None
    gens = A.generating_sequence()
    for phi in iter_homs(A, B, gens, injective=True):
        return Homomorphism(A, B, [int(phi[g]) for g in A.marked], mapping=phi)
    return None


def automorphism_maps(A: SmallGroup, candidates=None, gens=None) -> list[np.ndarray]:
    _require(A.order, BOUNDS.table_order, "automorphisms")
    if A.order == 1:
        return [np.zeros(1, dtype=np.int64)]
    out = []
    for phi in iter_homs(A, A, gens=gens, candidates=candidates, injective=True):
        out.append(phi)
        if len(out) > BOUNDS.aut_group_order:
            raise BoundExceeded("automorphism group too large to list")
    return out


def automorphisms(A: SmallGroup) -> list[Homomorphism]:
    return [Homomorphism(A, A, [int(phi[g]) for g in A.marked], mapping=phi)
            for phi in automorphism_maps(A)]


def count_automorphisms(A: SmallGroup, candidates=None, gens=None) -> int:
    """Order of the group of automorphisms allowed by ``candidates``.

    The allowed maps must form a group (all of Aut(A), or the stabilizer of
    some structure such as a projection).  The order is the product over i of
    the orbit length of g_i under the automorphisms fixing g_0..g_{i-1}; each
    orbit is grown from automorphisms found by first-hit searches, so only
    candidates outside the current orbit cost an exhaustive search.
    """
    _require(A.order, BOUNDS.table_order, "automorphisms")
    if A.order == 1:
        return 1
    gens = list(A.generating_sequence() if gens is None else gens)
    k = len(gens)
    base = [np.arange(A.order) if candidates is None else np.asarray(candidates[i], dtype=np.int64)
            for i in range(k)]
    found: list[np.ndarray] = []  # automorphisms; each fixes a prefix of gens
    fixes: list[int] = []  # length of the fixed prefix
    total = 1
    for i in range(k):
        g = gens[i]
        if g not in set(base[i].tolist()):
            raise InputError("candidate sets must allow the identity map")
        orbit = {g}
        stack = [g]

        def grow():
            while stack:
                x = stack.pop()
                for phi, f in zip(found, fixes):
                    if f >= i:
                        y = int(phi[x])
                        if y not in orbit:
                            orbit.add(y)
                            stack.append(y)

        grow()
        for y in base[i].tolist():
            if y in orbit:
                continue
            cands = [[gens[j]] for j in range(i)] + [[y]] + [base[j] for j in range(i + 1, k)]
            phi = next(iter_homs(A, A, gens=gens, candidates=cands, injective=True), None)
            if phi is not None:
                found.append(phi)
                fixes.append(i)
                stack.extend(orbit)
                grow()
        total *= len(orbit)
    return total


# ---------------------------------------------------------------------------
# subgroup lattice
# ---------------------------------------------------------------------------


class Subgroup:
    __slots__ = ("elements", "normal")

    def __init__(self, elements: Subset, normal: bool):
        self.elements = elements
        self.normal = normal

    @property
    def order(self) -> int:
        return len(self.elements)

    def __repr__(self) -> str:
        return f"<Subgroup order={self.order}{' normal' if self.normal else ''}>"


def subgroup_sets(G: SmallGroup) -> list[Subset]:
    """Every subgroup, by cyclic extension: each subgroup is <K, g> for a smaller K."""
    _require(G.order, BOUNDS.subgroup_order, "subgroup enumeration")
    cyc: dict[Subset, int] = {}
    for g in range(G.order):
        c = G.generated([g])
        if c not in cyc:
            cyc[c] = g
    found = set(cyc)
    layer = list(cyc)
    cyc_items = list(cyc.items())
    while layer:
        nxt = []
        for K in layer:
            klist = list(K)
            for C, g in cyc_items:
                if g in K or C <= K:
                    continue
                J = G.generated(klist + [g])
                if J not in found:
                    found.add(J)
                    nxt.append(J)
        layer = nxt
    return sorted(found, key=lambda s: (len(s), sorted(s)))


def subgroups(G: SmallGroup) -> list[Subgroup]:
    return [Subgroup(K, G.is_normal(K)) for K in subgroup_sets(G)]


def conjugacy_classes_of_subgroups(G: SmallGroup, subs: Optional[list[Subset]] = None) -> list[list[Subset]]:
    subs = subgroup_sets(G) if subs is None else subs
    maps = [G.conj_map(g) for g in G.marked]
    index = {K: i for i, K in enumerate(subs)}
    seen = [False] * len(subs)
    classes = []
    for i, K in enumerate(subs):
        if seen[i]:
            continue
        seen[i] = True
        cls = [K]
        stack = [K]
        while stack:
            X = stack.pop()
            arr = np.fromiter(X, dtype=np.int64)
            for m in maps:
                Y = frozenset(m[arr].tolist())
                j = index[Y]
                if not seen[j]:
                    seen[j] = True
                    cls.append(Y)
                    stack.append(Y)
        classes.append(cls)
    return classes


def normal_subgroup_sets(G: SmallGroup) -> list[Subset]:
    """All normal subgroups: joins of normal closures of single elements."""
    base = {}
    for c in np.unique(G.class_ids):
        x = int(np.flatnonzero(G.class_ids == c)[0])
        N = G.normal_closure([x])
        base[N] = None
    found = set(base)
    layer = list(found)
    base_list = list(base)
    while layer:
        nxt = []
        for K in layer:
            for N in base_list:
                if N <= K:
                    continue
                J = G.generated(list(K) + list(N))
                if J not in found:
                    found.add(J)
                    nxt.append(J)
        layer = nxt
    return sorted(found, key=lambda s: (len(s), sorted(s)))


def minimal_normal_subgroups(G: SmallGroup) -> list[Subset]:
    closures = {}
    for c in np.unique(G.class_ids):
        x = int(np.flatnonzero(G.class_ids == c)[0])
        if x == 0:
            continue
        closures[G.normal_closure([x])] = None
    cands = sorted(closures, key=len)
    return [N for N in cands if not any(M < N for M in cands)]


def moebius_from_top(nodes: list[Subset]) -> dict[Subset, int]:
    """nu(D) with nu(top) = 1 and sum_{D <= D'} nu(D') = 0 below the top."""
    order = sorted(nodes, key=len, reverse=True)
    nu: dict[Subset, int] = {}
    for i, D in enumerate(order):
        if i == 0:
            nu[D] = 1
            continue
        s = 0
        for Dp in order[:i]:
            if len(Dp) > len(D) and D < Dp:
                s += nu[Dp]
        nu[D] = -s
    return nu


def sub_extension_nodes(E: SmallGroup, fibers: Sequence[np.ndarray], kernel: Subset) -> list[Subset]:
    """Subgroups D of E meeting every fibre, i.e. mapping onto the quotient.

    ``fibers[i]`` is the preimage of the i-th generator of the quotient.  Every
    such D contains a subgroup generated by one lift per fibre, and is reached
    from it by adjoining kernel elements one at a time.
    """
    seeds = set()
    for lifts in product(*[f.tolist() for f in fibers]):
        seeds.add(E.generated(lifts))
    found = set(seeds)
    layer = list(seeds)
    kern = sorted(kernel)
    while layer:
        nxt = []
        for D in layer:
            dl = list(D)
            for x in kern:
                if x in D:
                    continue
                J = E.generated(dl + [x])
                if J not in found:
                    found.add(J)
                    nxt.append(J)
        layer = nxt
    return list(found)


# ---------------------------------------------------------------------------
# counting generating tuples
# ---------------------------------------------------------------------------


def _sur_enumerate(n: int, H: SmallGroup) -> int:
    full = frozenset(range(H.order))
    memo: dict[tuple, int] = {}
    joins: dict[tuple, Subset] = {}

    def count(K: Subset, r: int) -> int:
        if r == 0:
            return 1 if K == full else 0
        key = (K, r)
        if key in memo:
            return memo[key]
        total = len(K) * count(K, r - 1)
        kl = list(K)
        for x in range(H.order):
            if x in K:
                continue
            jk = (K, x)
            J = joins.get(jk)
            if J is None:
                J = H.generated(kl + [x])
                joins[jk] = J
            total += count(J, r - 1)
        memo[key] = total
        return total

    return count(frozenset({0}), n)


def _sur_lattice(n: int, H: SmallGroup) -> int:
    nu = moebius_from_top(subgroup_sets(H))
    return sum(v * len(K) ** n for K, v in nu.items())


def _sur_chief(n: int, H: SmallGroup) -> int:
    if H.order == 1:
        return 1
    N = min(minimal_normal_subgroups(H), key=len)
    Q, ids = H.quotient(N)
    base = _sur_chief(n, Q)
    if base == 0:
        return 0
    qgens = Q.generating_sequence()
    fibers = [np.flatnonzero(ids == q) for q in qgens]
    nodes = sub_extension_nodes(H, fibers, N)
    nu = moebius_from_top(nodes)
    lifts = sum(v * (len(D) // Q.order) ** n for D, v in nu.items())
    return base * lifts


def sur_count_free(n: int, H: SmallGroup, method: str = "auto") -> int:
    """Number of generating n-tuples of H, i.e. |Sur(F_n, H)|."""
    if n < 0:
        raise InputError("n must be nonnegative")
    if H.order == 1:
        return 1
    if n == 0:
        return 0
    if method == "auto":
        method = "lattice" if H.order <= 64 else "chief"
    if method == "enumerate":
        if H.order ** n > 10**6:
            raise BoundExceeded("tuple enumeration beyond 10^6 tuples")
        return _sur_enumerate(n, H)
    if method == "lattice":
        return _sur_lattice(n, H)
    if method == "chief":
        return _sur_chief(n, H)
    raise InputError(f"unknown method {method}")


def rank(H: SmallGroup) -> int:
    """Minimal number of generators d(H)."""
    d = 0
    while sur_count_free(d, H) == 0:
        d += 1
    return d


def generating_tuple(H: SmallGroup, k: int, rng: Optional[np.random.Generator] = None) -> Optional[list[int]]:
    """Some generating k-tuple of H, or None if d(H) > k."""
    if H.order == 1:
        return [0] * k
    if k == 0:
        return None
    seq = H.generating_sequence()
    if len(seq) <= k:
        return seq + [0] * (k - len(seq))
    rng = rng or np.random.default_rng(0)
    for _ in range(2000):
        tup = rng.integers(0, H.order, size=k).tolist()
        if H.generates(tup):
            return tup
    if sur_count_free(k, H) == 0:
        return None
    # exhaustive fallback: extend greedily through joins
    for tup in product(range(H.order), repeat=k):
        if H.generates(tup):
            return list(tup)
    raise ConsistencyError("positive generating count but no tuple found")
