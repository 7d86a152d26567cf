"""H-extensions with irreducible kernel, their automorphisms and sub-extension posets.

Abelian kernels: an extension of H by an F_p[H]-module V is determined by an
H-equivariant map t from the relation module of a presentation of H to V.  We
use the Cayley-graph presentation (generators of H, one relator per non-tree
edge of a BFS spanning tree), so t is a vector of values on the Schreier
generators subject to linear equivariance conditions.  Derivations give the
coboundaries; the quotient is H^2(H, V).  Extension classes with kernel
isomorphic to V as an H-module are the orbits of Aut_H(V) on H^2.

Nonabelian kernels: the kernel is centerless, so E embeds in A x H where A is
the image of E in Aut(kernel), and E is the fibre product of H -> A/Inn and
A -> A/Inn.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Optional, Sequence

import numpy as np

from . import linalg as L
from .bounds import BOUNDS
from .chief import ChiefFactorPair, cf_of_set, pair_in
from .completion import is_level
from .errors import BoundExceeded, ConsistencyError, InputError
from .smallgroup import (Homomorphism, SmallGroup, _bfs_tree, automorphism_maps,
                         count_automorphisms, iter_homs, moebius_from_top,
                         sub_extension_nodes, subgroup_sets, conjugacy_classes_of_subgroups)


# ---------------------------------------------------------------------------
# modules
# ---------------------------------------------------------------------------


def vector_group(p: int, d: int) -> SmallGroup:
    """(Z/p)^d with element index equal to the vector code."""
    vecs = L.all_vectors(p, d)
    codes = L.vector_codes((vecs[:, None, :] + vecs[None, :, :]) % p, p)
    return SmallGroup(table=codes, marked=[p ** i for i in range(d)], label=f"Z{p}^{d}" if d > 1 else f"Z{p}")


def _gens_and_actions(H: SmallGroup) -> tuple[list[int], np.ndarray]:
    gens = H.generating_sequence()
    if not gens:
        return [], np.zeros((0, H.order), dtype=np.int64)
    return gens, np.ascontiguousarray(H.table[:, gens].T).astype(np.int64)


def extend_representation(H: SmallGroup, gens: Sequence[int], mats: Sequence[np.ndarray], p: int,
                          d: int) -> Optional[np.ndarray]:
    """rho(h) for every h from rho on gens (left action), or None if the relations fail."""
    rho = np.zeros((H.order, d, d), dtype=np.int64)
    rho[0] = np.eye(d, dtype=np.int64)
    if not gens:
        return rho if H.order == 1 else None
    acts = H.table[:, list(gens)].T
    parent, via, order = _bfs_tree(acts)
    for h in order[1:]:
        rho[h] = (rho[parent[h]] @ mats[via[h]]) % p
    for k, m in enumerate(mats):
        if not np.array_equal(rho[acts[k]], (rho @ m) % p):
            return None
    return rho


def intertwiners(rho1: np.ndarray, rho2: np.ndarray, gens: Sequence[int], p: int) -> np.ndarray:
    """Basis of {X : X rho1(g) = rho2(g) X for the generators}, as flattened rows."""
    d1 = rho1.shape[1]
    d2 = rho2.shape[1]
    rows = []
    I1, I2 = np.eye(d1, dtype=np.int64), np.eye(d2, dtype=np.int64)
    for g in gens:
        A, B = rho1[g], rho2[g]
        # X is d2 x d1, vec row-major: (X A)[r,c] = sum_k X[r,k] A[k,c]
        rows.append(np.kron(I2, A.T) - np.kron(B, I1))
    if not rows:
        return np.eye(d1 * d2, dtype=np.int64)
    return L.nullspace(np.vstack(rows) % p, p)


def _is_irreducible(rho: np.ndarray, p: int) -> bool:
    d = rho.shape[1]
    vecs = L.all_vectors(p, d)[1:]
    for v in vecs:
        # only one vector per line
        nz = np.flatnonzero(v)[0]
        if v[nz] != 1:
            continue
        span = (rho @ v) % p
        if L.rank(span, p) < d:
            return False
    return True


@dataclass(eq=False)
class IrreducibleHGroup:
    """An irreducible F_p[H]-module, stored as left-action matrices for every element of H."""

    H: SmallGroup
    p: int
    dim: int
    matrices: np.ndarray  # (|H|, d, d)
    hH: int = 0

    def __post_init__(self):
        if not self.hH:
            gens = self.H.generating_sequence()
            self.hH = self.p ** intertwiners(self.matrices, self.matrices, gens, self.p).shape[0]

    abelian = True

    @property
    def order(self) -> int:
        return self.p ** self.dim

    @cached_property
    def underlying(self) -> SmallGroup:
        return vector_group(self.p, self.dim)

    @cached_property
    def vectors(self) -> np.ndarray:
        return L.all_vectors(self.p, self.dim)

    @cached_property
    def code_action(self) -> np.ndarray:
        """(|H|, p^d): code of h.v for each h and vector code v."""
        imgs = np.einsum("hij,vj->hvi", self.matrices, self.vectors) % self.p
        return L.vector_codes(imgs, self.p)

    @property
    def action(self) -> list[tuple]:
        """Permutations of the module's elements induced by H's marked generators."""
        return [tuple(self.code_action[g].tolist()) for g in self.H.marked]

    def is_trivial_action(self) -> bool:
        return bool((self.matrices == np.eye(self.dim, dtype=np.int64)).all())

    def isomorphic(self, other: "IrreducibleHGroup") -> bool:
        if (self.p, self.dim) != (other.p, other.dim):
            return False
        gens = self.H.generating_sequence()
        return intertwiners(self.matrices, other.matrices, gens, self.p).shape[0] > 0

    def describe(self) -> str:
        kind = "trivial" if self.is_trivial_action() else "nontrivial"
        return f"(Z/{self.p})^{self.dim} {kind} action, h={self.hH}"

    def __repr__(self) -> str:
        return f"<IrreducibleHGroup {self.describe()}>"


@dataclass(eq=False)
class NonabelianKernel:
    """Kernel type Gamma^j, taken up to group isomorphism."""

    underlying: SmallGroup
    abelian = False

    @property
    def order(self) -> int:
        return self.underlying.order

    def describe(self) -> str:
        return self.underlying.label or f"nonabelian of order {self.order}"

    def __repr__(self) -> str:
        return f"<NonabelianKernel {self.describe()}>"


def _dedup_modules(mods: list[IrreducibleHGroup]) -> list[IrreducibleHGroup]:
    out: list[IrreducibleHGroup] = []
    for m in mods:
        if not any(m.isomorphic(o) for o in out):
            out.append(m)
    return out


def general_linear_group(p: int, d: int) -> SmallGroup:
    """GL_d(F_p) as permutations of vector codes; element matrices via matrix_of."""
    vecs = L.all_vectors(p, d)
    gens = []
    # elementary generators: diagonal primitive scaling and transvections
    prim = next(a for a in range(1, p) if all(pow(a, (p - 1) // q, p) != 1 for q in _prime_factors(p - 1))) if p > 2 else 1
    mats = []
    if p > 2:
        m = np.eye(d, dtype=np.int64)
        m[0, 0] = prim
        mats.append(m)
    for i in range(d):
        for j in range(d):
            if i != j:
                m = np.eye(d, dtype=np.int64)
                m[i, j] = 1
                mats.append(m)
    if d == 1 and p == 2:
        mats.append(np.eye(1, dtype=np.int64))
    for m in mats:
        gens.append(tuple(L.vector_codes((vecs @ m.T) % p, p).tolist()))
    return SmallGroup.from_perms(gens, label=f"GL{d}({p})", limit=BOUNDS.table_order)


def _prime_factors(n: int) -> list[int]:
    out, q = [], 2
    while q * q <= n:
        if n % q == 0:
            out.append(q)
            while n % q == 0:
                n //= q
        q += 1
    if n > 1:
        out.append(n)
    return out


def matrix_of(perm: Sequence[int], p: int, d: int) -> np.ndarray:
    """Matrix whose columns are the images of the basis vectors."""
    vecs = L.all_vectors(p, d)
    cols = [vecs[perm[p ** i]] for i in range(d)]
    return np.array(cols, dtype=np.int64).T.reshape(d, d)


def irreducible_H_modules(H: SmallGroup, p: int, jmax: int) -> list[IrreducibleHGroup]:
    """All irreducible F_p[H]-modules of dimension at most jmax, up to isomorphism."""
    # an irreducible module is a quotient of the regular module, so dim <= |H|
    jmax = min(jmax, H.order)
    gens = H.generating_sequence()
    out: list[IrreducibleHGroup] = []
    for d in range(1, jmax + 1):
        count = 1
        for i in range(d):
            count *= p ** d - p ** i
        if count > BOUNDS.table_order:
            raise BoundExceeded(f"GL_{d}(F_{p}) has {count} elements; matrix search bound is {BOUNDS.table_order}")
        GL = general_linear_group(p, d)
        if not gens:
            if d == 1:
                out.append(IrreducibleHGroup(H, p, 1, np.ones((1, 1, 1), dtype=np.int64)))
            continue
        found = []
        for phi in iter_homs(H, GL, gens):
            mats = [matrix_of(GL.perms[phi[g]], p, d) for g in gens]
            rho = extend_representation(H, gens, mats, p, d)
            if rho is None:
                raise ConsistencyError("homomorphism into GL failed to give a representation")
            if _is_irreducible(rho, p):
                found.append(IrreducibleHGroup(H, p, d, rho))
        out.extend(_dedup_modules(found))
    return out


def _basis_coordinates(M: SmallGroup, p: int) -> tuple[list[int], np.ndarray]:
    """A basis of an elementary abelian M and elem_of[code] for vector codes."""
    basis = M.generating_sequence()
    d = len(basis)
    elem_of = np.zeros(p ** d, dtype=np.int64)
    vecs = L.all_vectors(p, d)
    t = M.table
    for code in range(1, p ** d):
        v = vecs[code]
        x = 0
        for i in range(d):
            for _ in range(int(v[i])):
                x = int(t[x, basis[i]])
        elem_of[code] = x
    return basis, elem_of


def modules_from_pair(H: SmallGroup, pair: ChiefFactorPair) -> list[IrreducibleHGroup]:
    """Modules M with H acting through a surjection H -> A, up to isomorphism."""
    M, A = pair.M, pair.A
    p = int(M.element_orders.max()) if M.order > 1 else 1
    basis, elem_of = _basis_coordinates(M, p)
    d = len(basis)
    code_of = np.empty(M.order, dtype=np.int64)
    code_of[elem_of] = np.arange(elem_of.size)
    act = pair.action
    gens = H.generating_sequence()
    found = []
    if H.order == 1:
        if A.order == 1:
            found.append(IrreducibleHGroup(H, p, d, np.eye(d, dtype=np.int64)[None]))
        return found
    vecs = L.all_vectors(p, d)
    for phi in iter_homs(H, A, gens, surjective=True):
        mats = []
        for g in gens:
            a_inv = int(A.inverse[phi[g]])
            perm = act[a_inv]
            cols = [vecs[code_of[perm[elem_of[p ** i]]]] for i in range(d)]
            mats.append(np.array(cols, dtype=np.int64).T.reshape(d, d))
        rho = extend_representation(H, gens, mats, p, d)
        if rho is None:
            raise ConsistencyError("chief-factor action does not give a representation")
        found.append(IrreducibleHGroup(H, p, d, rho))
    return _dedup_modules(found)


# ---------------------------------------------------------------------------
# H-extensions
# ---------------------------------------------------------------------------


def set_key(S: Sequence[SmallGroup]) -> str:
    return ",".join(sorted(G.label or f"#{G.order}" for G in S))


@dataclass(eq=False)
class HExtension:
    E: SmallGroup
    H: SmallGroup
    pi: np.ndarray  # E index -> H index
    kernel: frozenset
    kernel_spec: object = None
    level_flags: dict = field(default_factory=dict)
    label: str = ""

    def __post_init__(self):
        if len(self.kernel) * self.H.order != self.E.order:
            raise ConsistencyError("|kernel| * |H| != |E|")

    @property
    def order(self) -> int:
        return self.E.order

    @cached_property
    def projection(self) -> Homomorphism:
        return Homomorphism(self.E, self.H, [int(self.pi[g]) for g in self.E.marked], mapping=self.pi)

    def fibre(self, h: int) -> np.ndarray:
        return np.flatnonzero(self.pi == h)

    @cached_property
    def aut_H(self) -> int:
        return aut_H(self)

    @cached_property
    def poset(self) -> "SubExtensionPoset":
        return moebius_table(self)

    def is_level(self, S: Sequence[SmallGroup], **kw) -> bool:
        key = set_key(S)
        if key not in self.level_flags:
            self.level_flags[key] = is_level(self.E, S, **kw)
        return self.level_flags[key]

    def is_split(self) -> bool:
        gens = self.H.generating_sequence()
        fibres = [self.fibre(g).tolist() for g in gens]
        for lifts in product(*fibres):
            if len(self.E.generated(lifts)) == self.H.order:
                return True
        return not gens

    def __repr__(self) -> str:
        return f"<HExtension |E|={self.E.order} |H|={self.H.order} {self.label}>"


def h_extensions_isomorphic(e1: HExtension, e2: HExtension) -> bool:
    """Is there an isomorphism f: E1 -> E2 with pi2 . f = pi1?"""
    if e1.E.order != e2.E.order or e1.E.invariant_key != e2.E.invariant_key:
        return False
    gens = e1.E.generating_sequence()
    cands = [e2.fibre(int(e1.pi[g])) for g in gens]
    for _ in iter_homs(e1.E, e2.E, gens, candidates=cands, injective=True):
        return True
    return False


def aut_H(ext: HExtension) -> int:
    """|{f in Aut(E) : pi . f = pi}|."""
    E = ext.E
    if E.order == 1:
        return 1
    gens = E.generating_sequence()
    cands = [ext.fibre(int(ext.pi[g])) for g in gens]
    return count_automorphisms(E, candidates=cands, gens=gens)


@dataclass(eq=False)
class SubExtensionPoset:
    nodes: list  # frozensets, largest first
    moebius: dict  # node -> nu(D, E)

    @property
    def top(self) -> frozenset:
        return self.nodes[0]

    def check_identity(self) -> bool:
        for D in self.nodes:
            s = sum(v for Dp, v in self.moebius.items() if D <= Dp)
            if s != (1 if D == self.top else 0):
                return False
        return True

    def __len__(self) -> int:
        return len(self.nodes)


def moebius_table(ext: HExtension) -> SubExtensionPoset:
    E, H = ext.E, ext.H
    if E.order > BOUNDS.subgroup_order:
        raise BoundExceeded(f"sub-extension poset: order {E.order} exceeds bound {BOUNDS.subgroup_order}")
    gens = H.generating_sequence()
    fibres = [ext.fibre(g) for g in gens]
    nodes = sub_extension_nodes(E, fibres, ext.kernel) if gens else subgroup_sets(E)
    nu = moebius_from_top(nodes)
    ordered = sorted(nodes, key=len, reverse=True)
    return SubExtensionPoset(ordered, nu)


def trivial_extension(H: SmallGroup) -> HExtension:
    return HExtension(H, H, np.arange(H.order), frozenset({0}), label="E=H")


# ---------------------------------------------------------------------------
# abelian kernels
# ---------------------------------------------------------------------------


class CohomologyData:
    """Z = equivariant maps on Schreier generators, B = those coming from derivations."""

    def __init__(self, H: SmallGroup, module: IrreducibleHGroup):
        if module.H is not H and module.H.order != H.order:
            raise InputError("module belongs to a different group")
        self.H, self.module = H, module
        p, d = module.p, module.dim
        self.p, self.d = p, d
        gens, acts = _gens_and_actions(H)
        self.gens, self.acts = gens, acts
        k = len(gens)
        n = H.order
        if k:
            parent, via, order = _bfs_tree(acts)
        else:
            parent, via, order = np.full(1, -1), np.full(1, -1), [0]
        self.parent, self.via, self.bfs = parent, via, order
        sidx = np.full((n, k), -1, dtype=np.int64)
        m = 0
        for a in range(n):
            for l in range(k):
                b = int(acts[l, a])
                if b != 0 and parent[b] == a and via[b] == l:
                    continue
                sidx[a, l] = m
                m += 1
        self.sidx, self.m = sidx, m
        if m * d > 4000:
            raise BoundExceeded(f"cocycle system has {m * d} unknowns")
        words: list[list[int]] = [[] for _ in range(n)]
        for h in order[1:]:
            words[h] = words[parent[h]] + [int(via[h])]
        self.words = words
        self.Z = self._cocycles()
        self.B_rows = self._coboundaries()
        RB, pivB = L.rref(self.B_rows, p) if self.B_rows.shape[0] else (np.zeros((0, m * d), dtype=np.int64), [])
        self.RB, self.pivB = RB, pivB
        reduced = np.array([L.reduce_vector(z, RB, pivB, p) for z in self.Z], dtype=np.int64).reshape(self.Z.shape[0], m * d)
        RC, pivC = L.rref(reduced, p) if reduced.shape[0] else (np.zeros((0, m * d), dtype=np.int64), [])
        self.RC, self.pivC = RC, pivC
        if len(pivB) + len(pivC) != self.Z.shape[0]:
            raise ConsistencyError("coboundaries are not contained in the cocycles")

    @property
    def h2_dim(self) -> int:
        return len(self.pivC)

    @property
    def h2_order(self) -> int:
        return self.p ** self.h2_dim

    def _walk(self, start: int, letters: list[tuple[int, int]]) -> tuple[dict, int]:
        acts, sidx = self.acts, self.sidx
        inv_acts = self._inv_acts
        coef: dict[int, int] = {}
        c = start
        for l, e in letters:
            if e == 1:
                s = sidx[c, l]
                if s >= 0:
                    coef[s] = coef.get(s, 0) + 1
                c = int(acts[l, c])
            else:
                c = int(inv_acts[l, c])
                s = sidx[c, l]
                if s >= 0:
                    coef[s] = coef.get(s, 0) - 1
        return coef, c

    @cached_property
    def _inv_acts(self) -> np.ndarray:
        inv = np.empty_like(self.acts)
        for l in range(self.acts.shape[0]):
            inv[l, self.acts[l]] = np.arange(self.acts.shape[1])
        return inv

    def _cocycles(self) -> np.ndarray:
        p, d, m = self.p, self.d, self.m
        rho = self.module.matrices
        if m == 0:
            return np.zeros((0, 0), dtype=np.int64)
        k = len(self.gens)
        rows = []
        eye = np.eye(d, dtype=np.int64)
        for a in range(self.H.order):
            for l in range(k):
                s = self.sidx[a, l]
                if s < 0:
                    continue
                b = int(self.acts[l, a])
                body = [(x, 1) for x in self.words[a]] + [(l, 1)] + [(x, -1) for x in reversed(self.words[b])]
                for j in range(k):
                    coef, end = self._walk(0, [(j, 1)] + body + [(j, -1)])
                    if end != 0:
                        raise ConsistencyError("conjugated relator does not close up")
                    block = np.zeros((d, m * d), dtype=np.int64)
                    for s2, c in coef.items():
                        block[:, s2 * d:(s2 + 1) * d] += c * eye
                    block[:, s * d:(s + 1) * d] -= rho[self.gens[j]]
                    rows.append(block % p)
        if not rows:
            return np.eye(m * d, dtype=np.int64)
        return L.nullspace(np.vstack(rows), p)

    def coboundary(self, c: np.ndarray) -> np.ndarray:
        """t-vector of the derivation with delta(x_l) = c[l]."""
        p, d = self.p, self.d
        rho = self.module.matrices
        n = self.H.order
        dw = np.zeros((n, d), dtype=np.int64)
        for h in self.bfs[1:]:
            par = int(self.parent[h])
            dw[h] = (dw[par] + rho[par] @ c[int(self.via[h])]) % p
        t = np.zeros((self.m, d), dtype=np.int64)
        for a in range(n):
            for l in range(len(self.gens)):
                s = self.sidx[a, l]
                if s >= 0:
                    b = int(self.acts[l, a])
                    t[s] = (dw[a] + rho[a] @ c[l] - dw[b]) % p
        return t.reshape(-1)

    def _coboundaries(self) -> np.ndarray:
        k, d = len(self.gens), self.d
        rows = []
        for l in range(k):
            for i in range(d):
                c = np.zeros((k, d), dtype=np.int64)
                c[l, i] = 1
                rows.append(self.coboundary(c))
        return np.array(rows, dtype=np.int64).reshape(len(rows), self.m * d)

    def class_vector(self, coords: Sequence[int]) -> np.ndarray:
        """The canonical t-vector of the class with the given H^2 coordinates."""
        v = np.zeros(self.m * self.d, dtype=np.int64)
        for c, row in zip(coords, self.RC):
            v = (v + c * row) % self.p
        return v

    def class_coords(self, t: np.ndarray) -> tuple[int, ...]:
        r = L.reduce_vector(t, self.RB, self.pivB, self.p)
        return tuple(int(r[c]) for c in self.pivC)

    def in_cocycles(self, t: np.ndarray) -> bool:
        if self.Z.shape[0] == 0:
            return not np.any(t % self.p)
        return L.rank(np.vstack([self.Z, t[None]]), self.p) == self.Z.shape[0]

    def module_automorphisms(self) -> list[np.ndarray]:
        gens = self.H.generating_sequence()
        basis = intertwiners(self.module.matrices, self.module.matrices, gens, self.p)
        out = []
        for v in L.span_elements(basis, self.p):
            X = v.reshape(self.d, self.d)
            if L.rank(X, self.p) == self.d:
                out.append(X)
        return out

    def act(self, X: np.ndarray, t: np.ndarray) -> np.ndarray:
        return ((t.reshape(self.m, self.d) @ X.T) % self.p).reshape(-1)

    def class_orbit_reps(self) -> list[tuple[int, ...]]:
        """One H^2 coordinate vector per Aut_H(V)-orbit, zero class first."""
        auts = self.module_automorphisms()
        all_coords = list(product(range(self.p), repeat=self.h2_dim))
        code = {c: i for i, c in enumerate(all_coords)}
        reps = []
        for c in all_coords:
            t = self.class_vector(c)
            best = min(code[self.class_coords(self.act(X, t))] for X in auts)
            if best == code[c]:
                reps.append(c)
        return reps

    def cocycle_table(self, t: np.ndarray) -> np.ndarray:
        """f(g, h) as vector codes, (|H|, |H|)."""
        p, d, n = self.p, self.d, self.H.order
        T = np.zeros((n, max(len(self.gens), 1), d), dtype=np.int64)
        tv = t.reshape(self.m, d) if self.m else np.zeros((0, d), dtype=np.int64)
        mask = self.sidx >= 0
        if mask.any():
            T[mask] = tv[self.sidx[mask]]
        F = np.zeros((n, n, d), dtype=np.int64)
        tab = self.H.table
        for h in self.bfs[1:]:
            par = int(self.parent[h])
            F[:, h] = (F[:, par] + T[tab[:, par], int(self.via[h])]) % p
        return L.vector_codes(F, p)

    def build(self, t: np.ndarray, label: str = "") -> HExtension:
        H, mod = self.H, self.module
        n, q = H.order, mod.order
        add = mod.underlying.table.astype(np.int64)
        act = mod.code_action
        Fc = self.cocycle_table(t)
        v = np.arange(q)[:, None, None, None]
        g = np.arange(n)[None, :, None, None]
        w = np.arange(q)[None, None, :, None]
        h = np.arange(n)[None, None, None, :]
        vv = add[add[v, act[g, w]], Fc[g, h]]
        table = (vv * n + H.table[g, h]).reshape(q * n, q * n)
        marked = [int(x) for x in self.gens] + [p_ * n for p_ in mod.underlying.marked]
        E = SmallGroup(table=table, marked=[x for x in marked if x != 0] or None,
                       label=label or None)
        pi = np.tile(np.arange(n), q)
        kernel = frozenset((np.arange(q) * n).tolist())
        return HExtension(E, H, pi, kernel, kernel_spec=mod, label=label)


@dataclass
class ExtensionEnumeration:
    classes: list  # HExtension
    complete: bool = True
    before_level_filter: int = 0
    cohomology_classes: int = 0
    unexplored: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.classes)

    def __len__(self) -> int:
        return len(self.classes)


def enumerate_abelian_extensions(H: SmallGroup, G: IrreducibleHGroup, S: Optional[Sequence[SmallGroup]] = None,
                                 dedup: str = "cohomology") -> ExtensionEnumeration:
    """Isomorphism classes of H-extensions with kernel G (as H-module), level S if S is given.

    dedup="cohomology" takes Aut_H(G)-orbits on H^2; dedup="search" builds one
    extension per cohomology class and merges by explicit isomorphism search.
    """
    if H.order * G.order > BOUNDS.table_order:
        raise BoundExceeded(f"extension order {H.order * G.order} exceeds bound {BOUNDS.table_order}")
    data = CohomologyData(H, G)
    if dedup == "cohomology":
        coords = data.class_orbit_reps()
        built = [data.build(data.class_vector(c), label=f"H2 class {c}") for c in coords]
    elif dedup == "search":
        built = []
        for c in product(range(data.p), repeat=data.h2_dim):
            ext = data.build(data.class_vector(c), label=f"H2 class {c}")
            if not any(h_extensions_isomorphic(ext, o) for o in built):
                built.append(ext)
    else:
        raise InputError(f"unknown dedup mode {dedup}")
    before = len(built)
    if S is not None:
        built = [e for e in built if e.is_level(S)]
    return ExtensionEnumeration(built, True, before, data.h2_order)


# ---------------------------------------------------------------------------
# nonabelian kernels
# ---------------------------------------------------------------------------


def _inner_in(pair: ChiefFactorPair) -> frozenset:
    index = {row.tobytes(): i for i, row in enumerate(pair.action)}
    M = pair.M
    inn = set()
    for m in range(M.order):
        key = np.asarray(M.conj_map(m), dtype=np.int64).tobytes()
        if key not in index:
            raise InputError("action group does not contain the inner automorphisms")
        inn.add(index[key])
    return frozenset(inn)


def fibre_product(H: SmallGroup, A: SmallGroup, Abar_ids: np.ndarray, phi: np.ndarray,
                  inn: frozenset, label: str = "") -> HExtension:
    """E = {(a, h) : a Inn = phi(h)} with pi the second projection."""
    ea, eh = [], []
    for h in range(H.order):
        members = np.flatnonzero(Abar_ids == phi[h])
        ea.extend(members.tolist())
        eh.extend([h] * members.size)
    ea, eh = np.array(ea), np.array(eh)
    idx = np.full((A.order, H.order), -1, dtype=np.int64)
    idx[ea, eh] = np.arange(ea.size)
    if ea.size > BOUNDS.table_order:
        raise BoundExceeded(f"fibre product of order {ea.size} exceeds bound {BOUNDS.table_order}")
    table = idx[A.table[ea[:, None], ea[None, :]], H.table[eh[:, None], eh[None, :]]]
    if (table < 0).any():
        raise ConsistencyError("fibre product is not closed")
    E = SmallGroup(table=table, label=label or None)
    kernel = frozenset(int(idx[a, 0]) for a in inn)
    return HExtension(E, H, eh.copy(), kernel, label=label)


def extensions_from_pair(H: SmallGroup, pair: ChiefFactorPair) -> list[HExtension]:
    """All H-extensions (up to H-isomorphism) with kernel M on which E induces exactly A."""
    A = pair.A
    inn = _inner_in(pair)
    Abar, ids = A.quotient(inn)
    kernel_spec = NonabelianKernel(pair.M)
    out: list[HExtension] = []
    gens = H.generating_sequence()
    if H.order == 1:
        homs = [np.zeros(1, dtype=np.int64)] if Abar.order == 1 else []
    else:
        homs = list(iter_homs(H, Abar, gens, surjective=True))
    for phi in homs:
        ext = fibre_product(H, A, ids, phi, inn, label=f"|A|={A.order}")
        ext.kernel_spec = kernel_spec
        if not any(h_extensions_isomorphic(ext, o) for o in out):
            out.append(ext)
    return out


def _automorphism_pair(gamma: SmallGroup, auts: list[np.ndarray], subset: Sequence[int]) -> ChiefFactorPair:
    perms = [tuple(auts[i].tolist()) for i in subset]
    A = SmallGroup.from_perms(perms)
    return ChiefFactorPair(gamma, A)


def enumerate_nonabelian_extensions(H: SmallGroup, gamma: SmallGroup, jmax: int,
                                    S: Optional[Sequence[SmallGroup]] = None) -> ExtensionEnumeration:
    """H-extensions with kernel gamma^j, j <= jmax, and E level S when S is given.

    For j = 1 every subgroup Inn <= A <= Aut(gamma) is tried.  For j >= 2 the
    candidate action groups are listed through Out(gamma) wr S_j (transitive on
    the factors); those whose chief factor pair is not in CF(S) are rejected
    without building E, and any others beyond the table bound are reported as
    unexplored.
    """
    if gamma.is_abelian or gamma.order == 1:
        raise InputError("gamma must be nonabelian simple")
    if len([N for N in _normal_nontrivial(gamma)]) != 1:
        raise InputError("gamma must be simple")
    jmax = min(jmax, max(H.order, 1))
    auts = automorphism_maps(gamma)
    aut_group = SmallGroup.from_perms([tuple(a.tolist()) for a in auts])
    full_pair = ChiefFactorPair(gamma, aut_group)
    inn = _inner_in(full_pair)
    Out, out_ids = aut_group.quotient(inn)
    result = ExtensionEnumeration([], True)
    cf = cf_of_set(S) if S is not None else None
    built: list[HExtension] = []
    for cls in conjugacy_classes_of_subgroups(Out):
        Qbar = cls[0]
        members = np.flatnonzero(np.isin(out_ids, list(Qbar)))
        A, emb = aut_group.subgroup_group(members.tolist())
        A.perms = aut_group.perms[emb]
        pair = ChiefFactorPair(gamma, A)
        if cf is not None and not pair_in(pair, cf):
            continue
        for ext in extensions_from_pair(H, pair):
            if not any(h_extensions_isomorphic(ext, o) for o in built):
                built.append(ext)
    for j in range(2, jmax + 1):
        for desc in _wreath_candidates(H, Out, j):
            size = gamma.order ** j * H.order
            if cf is not None and not any(q.M.order == gamma.order ** j and not q.abelian for q in cf):
                result.notes.append(f"j={j}: {desc} rejected, (gamma^{j}, A) not in CF(S)")
                continue
            result.complete = False
            result.unexplored.append(f"j={j}: {desc}, |E|={size}")
    result.before_level_filter = len(built)
    if S is not None:
        built = [e for e in built if e.is_level(S)]
    result.classes = built
    return result


def _normal_nontrivial(G: SmallGroup) -> list[frozenset]:
    from .smallgroup import normal_subgroup_sets
    return [N for N in normal_subgroup_sets(G) if len(N) > 1]


def _wreath_candidates(H: SmallGroup, Out: SmallGroup, j: int) -> list[str]:
    """Classes of homomorphisms H -> Out wr S_j whose image permutes the j factors transitively."""
    o = Out.order
    regular = [Out.regular_perm(g) for g in Out.marked] or []
    deg = o * j
    gens = []
    for r in regular:
        gens.append(tuple(list(r) + list(range(o, deg))))
    cyc = tuple(((i // o + 1) % j) * o + i % o for i in range(deg))
    gens.append(cyc)
    if j > 2:
        swap = tuple((o + i % o if i // o == 0 else (i % o if i // o == 1 else i)) for i in range(deg))
        gens.append(swap)
    W = SmallGroup.from_perms(gens, label=f"Out wr S{j}")
    descs = []
    seen: list[frozenset] = []
    hgens = H.generating_sequence()
    if not hgens:
        return descs
    for phi in iter_homs(H, W, hgens):
        img = W.generated([int(phi[g]) for g in hgens])
        blocks = _block_orbits(W, img, o, j)
        if blocks != 1:
            continue
        # conjugacy of images inside W, as a coarse class label
        arr = np.fromiter(img, dtype=np.int64)
        conj = frozenset(frozenset(W.conj_map(w)[arr].tolist()) for w in range(W.order))
        if conj in seen:
            continue
        seen.append(conj)
        descs.append(f"action image of order {len(img)} transitive on {j} factors")
    return descs


def _block_orbits(W: SmallGroup, img: frozenset, o: int, j: int) -> int:
    parent = list(range(j))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for w in img:
        perm = W.perms[w]
        for b in range(j):
            c = int(perm[b * o]) // o
            parent[find(b)] = find(c)
    return len({find(b) for b in range(j)})


# ---------------------------------------------------------------------------
# candidate kernels for a given H and S
# ---------------------------------------------------------------------------


@dataclass
class KernelCandidates:
    abelian: list  # IrreducibleHGroup
    nonabelian: list  # (NonabelianKernel, [ChiefFactorPair])


def candidate_kernels(H: SmallGroup, cf: Sequence[ChiefFactorPair]) -> KernelCandidates:
    """Irreducible kernels G with (G, image of H) in CF: the only ones that can occur."""
    ab: list[IrreducibleHGroup] = []
    for pair in cf:
        if pair.abelian:
            for mod in modules_from_pair(H, pair):
                if not any(mod.isomorphic(o) for o in ab):
                    ab.append(mod)
    nab: list = []
    for pair in cf:
        if pair.abelian:
            continue
        for kern, pairs in nab:
            if kern.order == pair.M.order and _groups_iso(kern.underlying, pair.M):
                pairs.append(pair)
                break
        else:
            nab.append((NonabelianKernel(pair.M), [pair]))
    ab.sort(key=lambda m: (m.order, m.p, m.dim, not m.is_trivial_action()))
    nab.sort(key=lambda x: x[0].order)
    return KernelCandidates(ab, nab)


def _groups_iso(A: SmallGroup, B: SmallGroup) -> bool:
    from .smallgroup import is_isomorphic
    return is_isomorphic(A, B) is not None


def extensions_for_kernel(H: SmallGroup, kernel, pairs: Sequence[ChiefFactorPair] = ()) -> list[HExtension]:
    """All H-extension classes with the given kernel (no level filter)."""
    if isinstance(kernel, IrreducibleHGroup):
        return list(enumerate_abelian_extensions(H, kernel))
    out: list[HExtension] = []
    for pair in pairs:
        out.extend(extensions_from_pair(H, pair))
    return out


def cf_pair_of_kernel(ext: HExtension) -> ChiefFactorPair:
    """(kernel, image of E in Aut(kernel)) for an extension."""
    E = ext.E
    M, emb = E.subgroup_group(ext.kernel)
    pos = np.full(E.order, -1, dtype=np.int64)
    pos[emb] = np.arange(emb.size)
    perms = [tuple(pos[E.conj_map(g)[emb]].tolist()) for g in E.marked] or [tuple(range(M.order))]
    return ChiefFactorPair(M, SmallGroup.from_perms(perms))


__all__ = [
    "IrreducibleHGroup", "NonabelianKernel", "HExtension", "SubExtensionPoset", "CohomologyData",
    "ExtensionEnumeration", "irreducible_H_modules", "modules_from_pair", "enumerate_abelian_extensions",
    "enumerate_nonabelian_extensions", "extensions_from_pair", "aut_H", "moebius_table",
    "h_extensions_isomorphic", "candidate_kernels", "extensions_for_kernel", "cf_pair_of_kernel",
    "vector_group", "general_linear_group", "trivial_extension", "set_key",
]
