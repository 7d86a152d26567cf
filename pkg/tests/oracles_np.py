"""Vectorized brute-force references for the larger acceptance checks.

Like ``oracles``, nothing here imports progroup; groups are numpy Cayley
tables with the identity at index 0.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product

import numpy as np


def completion_table(tables, n):
    """Cayley table of the subgroup of prod_{hom F_n -> G} G generated by the coordinate tuples."""
    coords = [(np.asarray(T), imgs) for T in tables for imgs in product(range(len(T)), repeat=n)]
    width = len(coords)
    gens = np.array([[imgs[i] for _, imgs in coords] for i in range(n)], dtype=np.int16)

    def mul_rows(X, g):
        out = np.empty_like(X)
        for c, (T, _) in enumerate(coords):
            out[:, c] = T[X[:, c], g[c]]
        return out

    elems = [np.zeros((1, width), dtype=np.int16)]
    index = {elems[0][0].tobytes(): 0}
    frontier = elems[0]
    while len(frontier):
        fresh = []
        for g in gens:
            for row in mul_rows(frontier, g):
                key = row.tobytes()
                if key not in index:
                    index[key] = len(index)
                    fresh.append(row)
        frontier = np.array(fresh, dtype=np.int16).reshape(-1, width)
        elems.append(frontier)
    X = np.concatenate(elems)
    N = len(X)
    table = np.empty((N, N), dtype=np.int32)
    for j in range(N):
        prod_rows = mul_rows(X, X[j])
        table[:, j] = [index[r.tobytes()] for r in prod_rows]
    gen_idx = [index[g.tobytes()] for g in gens]
    return table, gen_idx


def inverses(T):
    return np.argmin(T, axis=1)  # identity is 0, the unique minimum of each row


def generated_mask(T, seed_mask):
    S = seed_mask.copy()
    S[0] = True
    gens = np.flatnonzero(seed_mask)
    if gens.size == 0:
        return S
    while True:
        prods = T[np.ix_(np.flatnonzero(S), gens)].ravel()
        new = S.copy()
        new[prods] = True
        if (new == S).all():
            return S
        S = new


def conjugacy_classes(T):
    n = len(T)
    inv = inverses(T)
    seen = np.zeros(n, dtype=bool)
    classes = []
    for x in range(n):
        if not seen[x]:
            cls = np.unique(T[T[inv, x], np.arange(n)])
            seen[cls] = True
            classes.append(cls)
    return classes


def normal_subgroups(T):
    """All normal subgroups, as boolean masks, closed under joins of class-generated subgroups."""
    n = len(T)
    classes = conjugacy_classes(T)
    trivial = np.zeros(n, dtype=bool)
    trivial[0] = True
    found = {trivial.tobytes(): trivial}
    frontier = [trivial]
    while frontier:
        nxt = []
        for N in frontier:
            for cls in classes:
                if N[cls[0]]:
                    continue
                seed = N.copy()
                seed[cls] = True
                M = generated_mask(T, seed)
                k = M.tobytes()
                if k not in found:
                    found[k] = M
                    nxt.append(M)
        frontier = nxt
    return list(found.values())


def haar_quotient_law(T, k):
    """P(<<r_1..r_k>> = N) for every normal N, by inclusion-exclusion over the normal lattice:
    P(<<r>> <= N) = (|N|/|G|)^k."""
    n = len(T)
    normals = sorted(normal_subgroups(T), key=lambda m: m.sum())
    exact = []
    for i, N in enumerate(normals):
        p = Fraction(int(N.sum()), n) ** k
        for L, q in exact:
            if L.sum() < N.sum() and not (L & ~N).any():
                p -= q
        exact.append((N, p))
    return [(N, p) for N, p in exact if p]


def quotient_table(T, N):
    """Cayley table of G/N, cosets numbered by smallest representative."""
    n = len(T)
    members = np.flatnonzero(N)
    coset = np.full(n, -1, dtype=np.int64)
    reps = []
    for g in range(n):
        if coset[g] < 0:
            coset[T[g, members]] = len(reps)
            reps.append(g)
    reps = np.array(reps)
    return coset[T[np.ix_(reps, reps)]]


def bfs_tree(T, gens):
    """Spanning tree of the Cayley graph: list of (node, parent, generator slot) in BFS order."""
    seen = {0}
    order = []
    frontier = [0]
    while frontier:
        nxt = []
        for x in frontier:
            for i, g in enumerate(gens):
                y = int(T[x, g])
                if y not in seen:
                    seen.add(y)
                    order.append((y, x, i))
                    nxt.append(y)
        frontier = nxt
    return order


def hom_images(TC, gens, TE, images, tree=None):
    """For each row of ``images`` (candidate images of gens), the map C -> E it would define,
    and whether that map is a homomorphism."""
    images = np.atleast_2d(np.asarray(images))
    tree = bfs_tree(TC, gens) if tree is None else tree
    M = images.shape[0]
    f = np.zeros((M, len(TC)), dtype=np.int64)
    for y, x, i in tree:
        f[:, y] = TE[f[:, x], images[:, i]]
    ok = np.ones(M, dtype=bool)
    for i, g in enumerate(gens):
        ok &= (TE[f, images[:, i][:, None]] == f[:, TC[:, g]]).all(axis=1)
    return f, ok


def lift_surjection_count(TC, gens, TE, pi, h_images, block=2000):
    """|{surjections psi: C -> E with pi psi = rho}| where rho sends gens to h_images."""
    pi = np.asarray(pi)
    fibres = [np.flatnonzero(pi == h) for h in h_images]
    tree = bfs_tree(TC, gens)
    order_E = len(TE)
    total = 0
    grids = np.array(np.meshgrid(*fibres, indexing="ij")).reshape(len(fibres), -1).T
    for start in range(0, len(grids), block):
        lifts = grids[start:start + block]
        f, ok = hom_images(TC, gens, TE, lifts, tree)
        s = np.sort(f, axis=1)
        distinct = 1 + (np.diff(s, axis=1) != 0).sum(axis=1)
        total += int((ok & (distinct == order_E)).sum())
    return total
