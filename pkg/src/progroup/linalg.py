"""Dense linear algebra over F_p with numpy integer arrays."""

from __future__ import annotations

import numpy as np


def rref(A: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form (nonzero rows only) and pivot columns."""
    M = np.array(A, dtype=np.int64) % p
    rows, cols = M.shape if M.ndim == 2 else (0, 0)
    r = 0
    pivots: list[int] = []
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(M[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            M[[r, i]] = M[[i, r]]
        M[r] = (M[r] * pow(int(M[r, c]), -1, p)) % p
        col = M[:, c].copy()
        col[r] = 0
        nzr = np.flatnonzero(col)
        if nzr.size:
            M[nzr] = (M[nzr] - np.outer(col[nzr], M[r])) % p
        pivots.append(c)
        r += 1
    return M[:r], pivots


def rank(A: np.ndarray, p: int) -> int:
    return len(rref(A, p)[1])


def nullspace(A: np.ndarray, p: int, ncols: int | None = None) -> np.ndarray:
    """Basis (as rows) of {x : A x = 0}."""
    A = np.asarray(A, dtype=np.int64)
    n = A.shape[1] if A.size else (ncols or 0)
    if A.size == 0:
        return np.eye(n, dtype=np.int64)
    R, piv = rref(A, p)
    free = [c for c in range(n) if c not in set(piv)]
    basis = np.zeros((len(free), n), dtype=np.int64)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for i, c in enumerate(piv):
            basis[k, c] = (-R[i, f]) % p
    return basis


def inverse(A: np.ndarray, p: int) -> np.ndarray:
    n = A.shape[0]
    R, piv = rref(np.hstack([A % p, np.eye(n, dtype=np.int64)]), p)
    if piv[:n] != list(range(n)) or len(piv) < n:
        raise ValueError("matrix is singular mod p")
    return R[:, n:]


def reduce_vector(v: np.ndarray, R: np.ndarray, pivots: list[int], p: int) -> np.ndarray:
    """Canonical representative of v modulo the row space of the rref matrix R."""
    v = np.array(v, dtype=np.int64) % p
    for i, c in enumerate(pivots):
        if v[c]:
            v = (v - v[c] * R[i]) % p
    return v


def span_elements(basis: np.ndarray, p: int) -> np.ndarray:
    """All F_p-combinations of the rows of basis."""
    k = basis.shape[0]
    n = basis.shape[1] if basis.ndim == 2 else 0
    if k == 0:
        return np.zeros((1, n), dtype=np.int64)
    coeffs = np.array(np.meshgrid(*[np.arange(p)] * k, indexing="ij")).reshape(k, -1).T
    return (coeffs @ basis) % p


def vector_codes(vecs: np.ndarray, p: int) -> np.ndarray:
    """Integer code sum_i v_i p^i for each row."""
    d = vecs.shape[-1]
    return (vecs * (p ** np.arange(d))).sum(axis=-1)


def all_vectors(p: int, d: int) -> np.ndarray:
    """Rows are the vectors of F_p^d, row index equal to the code."""
    codes = np.arange(p ** d)
    return (codes[:, None] // (p ** np.arange(d))[None, :]) % p
