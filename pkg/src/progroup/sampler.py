"""Monte Carlo models of random pro-S presented groups.

Three models are provided:

* ``haar``: n+u relators drawn uniformly from the finite completion C_n;
* ``words``: relators are uniform words of length at most L in the free
  group, pushed into C_n (unreduced by default, reduced on request);
* ``cokernel``: cokernels of uniform (n+u) x n matrices over Z/p^j.

Samples are split across workers by ``numpy.random.SeedSequence.spawn``.  A
worker returns counts keyed by the normal subgroup it produced; the parent
merges these in a canonical order and names each subgroup's quotient once, so
a report depends only on (seed, workers).
"""

from __future__ import annotations

import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy import stats

from .bounds import BOUNDS
from .catalog import identify
from .completion import cached_completion
from .errors import BoundExceeded, InputError
from .smallgroup import SmallGroup, is_isomorphic


@dataclass
class SampleReport:
    model: str
    params: dict
    class_counts: dict = field(default_factory=dict)
    oversize: int = 0
    runtime: float = 0.0

    @property
    def count(self) -> int:
        return sum(self.class_counts.values()) + self.oversize

    def frequencies(self) -> dict:
        n = self.count
        return {k: v / n for k, v in self.class_counts.items()} if n else {}

    def to_json(self, with_runtime: bool = False) -> dict:
        out = {"model": self.model, "params": self.params,
               "class_counts": dict(sorted(self.class_counts.items())),
               "oversize": self.oversize, "count": self.count}
        if with_runtime:
            out["runtime"] = self.runtime
        return out


# ---------------------------------------------------------------------------
# class naming
# ---------------------------------------------------------------------------


class ClassDictionary:
    """Names isomorphism classes, with a cheap invariant checked before any iso search."""

    def __init__(self):
        self._by_key: dict = {}

    def name(self, Q: SmallGroup) -> str:
        key = Q.invariant_key
        bucket = self._by_key.setdefault(key, [])
        for R, label in bucket:
            if is_isomorphic(Q, R) is not None:
                return label
        label = identify(Q)
        bucket.append((Q, label))
        return label


# ---------------------------------------------------------------------------
# workers (module level so they pickle)
# ---------------------------------------------------------------------------


class _Closures:
    """Normal closures in C, memoized by the set of conjugacy classes involved."""

    def __init__(self, table: np.ndarray):
        self.G = SmallGroup.from_table(table, check=False)
        ids = self.G.class_ids
        self.ids = ids
        self.members = [np.flatnonzero(ids == c) for c in range(int(ids.max()) + 1)]
        self.memo: dict = {}

    def key(self, rels: np.ndarray) -> bytes:
        classes = tuple(sorted(set(self.ids[rels].tolist()) - {int(self.ids[0])}))
        hit = self.memo.get(classes)
        if hit is None:
            if classes:
                gens = np.concatenate([self.members[c] for c in classes])
                mask = self.G.closure_mask(gens.tolist())
            else:
                mask = np.zeros(self.G.order, dtype=bool)
                mask[0] = True
            hit = np.packbits(mask).tobytes()
            self.memo[classes] = hit
        return hit


def _word_images(table, inverse, marked, n_words, length, reduced, rng) -> np.ndarray:
    """Images in C of n_words uniform words of length <= length."""
    k = len(marked)
    letters = np.concatenate([np.asarray(marked), inverse[np.asarray(marked)]])
    sizes = np.arange(length + 1)
    if reduced:
        # reduced words of length L: 1 if L = 0 else 2k (2k-1)^(L-1)
        weights = np.array([1.0] + [2 * k * float(2 * k - 1) ** (L - 1) for L in sizes[1:]])
    else:
        weights = np.array([float(2 * k) ** L for L in sizes])
    weights /= weights.sum()
    lens = rng.choice(sizes, size=n_words, p=weights)
    state = np.zeros(n_words, dtype=np.int64)
    prev = np.full(n_words, -1, dtype=np.int64)
    for pos in range(length):
        live = lens > pos
        if not live.any():
            break
        if reduced:
            # uniform among the 2k-1 letters that do not cancel the previous one
            first = prev < 0
            pick = rng.integers(0, 2 * k - 1, size=n_words)
            forbidden = np.where(prev < k, prev + k, prev - k)
            pick = np.where(first, rng.integers(0, 2 * k, size=n_words),
                            pick + (pick >= forbidden))
        else:
            pick = rng.integers(0, 2 * k, size=n_words)
        step = letters[pick]
        state = np.where(live, table[state, step], state)
        prev = np.where(live, pick, prev)
    return state


def _group_chunk(args) -> Counter:
    table, marked, model, nrel, count, seed_seq, length, reduced = args
    rng = np.random.default_rng(seed_seq)
    closures = _Closures(table)
    inverse = closures.G.inverse.astype(np.int64)
    out: Counter = Counter()
    batch = 4096
    done = 0
    while done < count:
        b = min(batch, count - done)
        if model == "haar":
            rels = rng.integers(0, table.shape[0], size=(b, nrel))
        else:
            rels = _word_images(table, inverse, marked, b * nrel, length, reduced, rng).reshape(b, nrel)
        for row in rels:
            out[closures.key(row)] += 1
        done += b
    return out


def _cokernel_chunk(args) -> Counter:
    p, j, n, u, count, seed_seq = args
    rng = np.random.default_rng(seed_seq)
    out: Counter = Counter()
    batch = 8192
    done = 0
    while done < count:
        b = min(batch, count - done)
        M = rng.integers(0, p ** j, size=(b, n + u, n))
        for part in map(tuple, cokernel_partitions(M, p, j, n, u)):
            out[part] += 1
        done += b
    return out


def _split(count: int, workers: int) -> list[int]:
    return [count // workers + (1 if i < count % workers else 0) for i in range(workers)]


def _run_chunks(fn, jobs: list, workers: int) -> Counter:
    if workers <= 1 or len(jobs) <= 1:
        results = [fn(a) for a in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(fn, jobs))
    total: Counter = Counter()
    for r in results:  # fixed order: worker index
        total.update(r)
    return total


# ---------------------------------------------------------------------------
# group models
# ---------------------------------------------------------------------------


def _check_common(n: int, u: int, count: int, workers: int) -> None:
    if n < 1:
        raise InputError("n must be at least 1")
    if n + u < 1:
        raise InputError("n + u must be at least 1")
    if count < 0:
        raise InputError("count must be nonnegative")
    if workers < 1:
        raise InputError("workers must be at least 1")


def _completion_table(n: int, S: Sequence[SmallGroup]) -> SmallGroup:
    C = cached_completion(n, S)
    if C.order() > BOUNDS.table_order:
        raise BoundExceeded(f"completion of order {C.order()} exceeds the table bound {BOUNDS.table_order}")
    return C.small_group()


def _sample_group_model(model: str, S, n, u, count, seed, workers, length, reduced, index_bound,
                        params: dict) -> SampleReport:
    start = time.perf_counter()
    _check_common(n, u, count, workers)
    report = SampleReport(model, params)
    if count == 0:
        report.runtime = time.perf_counter() - start
        return report
    Cs = _completion_table(n, S)
    table = np.ascontiguousarray(Cs.table)
    marked = np.asarray(Cs.marked, dtype=np.int64)
    seeds = np.random.SeedSequence(seed).spawn(workers)
    jobs = [(table, marked, model, n + u, c, s, length, reduced)
            for c, s in zip(_split(count, workers), seeds)]
    merged = _run_chunks(_group_chunk, jobs, workers)
    bound = BOUNDS.quotient_index if index_bound is None else index_bound
    names = ClassDictionary()
    counts: Counter = Counter()
    for key in sorted(merged):
        mask = np.unpackbits(np.frombuffer(key, dtype=np.uint8))[: Cs.order].astype(bool)
        N = np.flatnonzero(mask)
        if Cs.order // N.size > bound:
            report.oversize += merged[key]
            continue
        Q = Cs.quotient(N.tolist())[0] if N.size > 1 else SmallGroup.from_table(Cs.table, check=False)
        Q.label = None
        counts[names.name(Q)] += merged[key]
    report.class_counts = dict(sorted(counts.items()))
    report.runtime = time.perf_counter() - start
    return report


def _set_names(S: Sequence[SmallGroup]) -> list[str]:
    return [G.label or identify(G) for G in S]


def sample_haar(S: Sequence[SmallGroup], n: int, u: int, count: int, seed: int = 0,
                workers: int = 1, index_bound: Optional[int] = None) -> SampleReport:
    """Quotients of C_n by the normal closure of n+u Haar-random elements."""
    params = {"S": _set_names(S), "n": n, "u": u, "count": count, "seed": seed, "workers": workers}
    return _sample_group_model("haar", S, n, u, count, seed, workers, 0, False, index_bound, params)


def sample_words(S: Sequence[SmallGroup], n: int, u: int, length: int, count: int, seed: int = 0,
                 workers: int = 1, reduced: bool = False,
                 index_bound: Optional[int] = None) -> SampleReport:
    """Same pipeline with relators drawn uniformly from words of length <= length."""
    if length < 0:
        raise InputError("word length must be nonnegative")
    params = {"S": _set_names(S), "n": n, "u": u, "length": length, "reduced": reduced,
              "count": count, "seed": seed, "workers": workers}
    return _sample_group_model(f"words({length})", S, n, u, count, seed, workers, length, reduced,
                               index_bound, params)


# ---------------------------------------------------------------------------
# cokernels
# ---------------------------------------------------------------------------


def _valuation(x: np.ndarray, p: int, j: int) -> np.ndarray:
    v = np.zeros(x.shape, dtype=np.int64)
    y = x.copy()
    for _ in range(j):
        step = (y % p == 0) & (v < j)
        if not step.any():
            break
        v += step
        y = np.where(step, y // p, y)
    return np.where(x == 0, j, v)


def _unit_inverse(a: np.ndarray, p: int, j: int) -> np.ndarray:
    """Inverse of units mod p^j via a^(phi(p^j) - 1)."""
    mod = p ** j
    e = p ** (j - 1) * (p - 1) - 1
    out = np.ones_like(a)
    base = a % mod
    while e:
        if e & 1:
            out = (out * base) % mod
        base = (base * base) % mod
        e >>= 1
    return out


def cokernel_partitions(M: np.ndarray, p: int, j: int, n: int, u: int) -> np.ndarray:
    """Cokernel partitions of a batch of (n+u) x n matrices over Z/p^j.

    Row-and-column elimination with a pivot of least valuation; the
    diagonal valuations give the invariant factors (Smith normal form).
    Returns an array (batch, n) of exponents sorted decreasingly, padded with 0.
    """
    mod = p ** j
    A = np.array(M, dtype=np.int64) % mod
    B, rows, cols = A.shape
    diag = np.zeros((B, cols), dtype=np.int64)
    bidx = np.arange(B)
    steps = min(rows, cols)
    for k in range(steps):
        sub = A[:, k:, k:]
        val = _valuation(sub, p, j).reshape(B, -1)
        flat = val.argmin(axis=1)
        r = k + flat // (cols - k)
        c = k + flat % (cols - k)
        v = val[bidx, flat]
        # swap row k <-> r and column k <-> c
        rk = A[bidx, k].copy()
        A[bidx, k] = A[bidx, r]
        A[bidx, r] = rk
        ck = A[bidx, :, k].copy()
        A[bidx, :, k] = A[bidx, :, c]
        A[bidx, :, c] = ck
        diag[:, k] = v
        live = v < j
        if not live.any():
            continue
        pv = p ** np.where(live, v, 0)
        unit = np.where(live, A[:, k, k] // pv, 1)
        inv = _unit_inverse(unit, p, j)
        # eliminate below the pivot: row_i -= (a_ik / p^v) inv(unit) row_k
        factor = ((A[:, k + 1:, k] // pv[:, None]) * inv[:, None]) % mod
        factor = np.where(live[:, None], factor, 0)
        A[:, k + 1:, :] = (A[:, k + 1:, :] - factor[:, :, None] * A[:, k:k + 1, :]) % mod
        # the column ops clearing row k do not touch later rows, so skip them
    # columns beyond the row count (u < 0) give free Z/p^j factors
    if rows < cols:
        diag[:, rows:] = j
    parts = np.where(diag >= 1, np.minimum(diag, j), 0)
    return -np.sort(-parts, axis=1)


def partition_key(part: Sequence[int]) -> str:
    nz = [int(x) for x in part if x]
    return "(" + ",".join(str(x) for x in nz) + ")"


def sample_cokernel(p: int, j: int, n: int, u: int, count: int, seed: int = 0,
                    workers: int = 1) -> SampleReport:
    """Cokernel partitions of uniform (n+u) x n matrices over Z/p^j."""
    from .special import is_prime

    start = time.perf_counter()
    if not is_prime(p):
        raise InputError(f"{p} is not prime")
    if j < 1:
        raise InputError("j must be at least 1")
    _check_common(n, u, count, workers)
    params = {"p": p, "j": j, "n": n, "u": u, "count": count, "seed": seed, "workers": workers}
    report = SampleReport(f"cokernel({p},{j})", params)
    if count:
        seeds = np.random.SeedSequence(seed).spawn(workers)
        jobs = [(p, j, n, u, c, s) for c, s in zip(_split(count, workers), seeds)]
        merged = _run_chunks(_cokernel_chunk, jobs, workers)
        report.class_counts = {partition_key(k): v for k, v in
                               sorted(merged.items(), key=lambda kv: (sum(kv[0]), kv[0]))}
    report.runtime = time.perf_counter() - start
    return report


def partition_group_name(p: int, part: str) -> str:
    """Group name (as used by the exact tables) for a cokernel partition key."""
    from .smallgroup import cyclic, direct_product

    exps = [int(x) for x in part.strip("()").split(",") if x]
    if not exps:
        return "trivial"
    G = cyclic(p ** exps[0])
    for e in exps[1:]:
        G = direct_product(G, cyclic(p ** e))
    return identify(G)


# ---------------------------------------------------------------------------
# comparison
# ---------------------------------------------------------------------------


@dataclass
class ComparisonReport:
    z_scores: dict
    chi_square: float
    dof: int
    p_value: float
    total_variation: float
    count: int

    @property
    def max_abs_z(self) -> float:
        return max((abs(z) for z in self.z_scores.values()), default=0.0)

    def to_json(self) -> dict:
        return {"z_scores": self.z_scores, "chi_square": self.chi_square, "dof": self.dof,
                "p_value": self.p_value, "total_variation": self.total_variation, "count": self.count}


OVERSIZE_KEY = "<oversize>"


def compare(report: SampleReport, exact: Mapping[str, Fraction], residual: Fraction = Fraction(0)
            ) -> ComparisonReport:
    """Per-class z-scores, Pearson chi-square and total variation against exact probabilities.

    Classes absent from ``exact`` have probability 0; oversize samples are
    compared with ``residual`` (the exact mass left unclassified).
    """
    N = report.count
    if N == 0:
        raise InputError("cannot compare an empty sample report")
    probs = {k: Fraction(v) for k, v in exact.items()}
    observed = dict(report.class_counts)
    if report.oversize or residual:
        probs[OVERSIZE_KEY] = Fraction(residual)
        observed[OVERSIZE_KEY] = report.oversize
    keys = sorted(set(probs) | set(observed))
    z, chi, tv, cells = {}, 0.0, 0.0, 0
    for k in keys:
        q = float(probs.get(k, 0))
        o = observed.get(k, 0)
        e = N * q
        tv += abs(o / N - q)
        if q <= 0:
            z[k] = 0.0 if o == 0 else float("inf")
            if o:
                chi = float("inf")
            continue
        cells += 1
        sd = (N * q * (1 - q)) ** 0.5
        z[k] = (o - e) / sd if sd > 0 else (0.0 if o == e else float("inf"))
        chi += (o - e) ** 2 / e
    dof = max(cells - 1, 1)
    pval = 0.0 if chi == float("inf") else float(stats.chi2.sf(chi, dof))
    return ComparisonReport(z, chi, dof, pval, tv / 2, N)

