"""Named permutation groups: built-ins plus JSON catalog files.

A catalog file is a JSON array of ``{"name", "degree", "generators"}``
records with 0-based image arrays; an optional ``"order"`` is checked.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from . import perm as P
from .errors import InputError
from .smallgroup import SmallGroup


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    degree: int
    generators: tuple
    aliases: tuple = field(default=(), compare=False)

    def finite_group(self) -> P.FiniteGroup:
        return P.build_group(self.generators, label=self.name)

    def small_group(self) -> SmallGroup:
        return _small(self)

    def to_json(self) -> dict:
        return {"name": self.name, "degree": self.degree,
                "generators": [list(g) for g in self.generators]}


@lru_cache(maxsize=None)
def _small(entry: CatalogEntry) -> SmallGroup:
    return SmallGroup.from_perms(entry.generators, label=entry.name)


def _cycle(points: Sequence[int], degree: int) -> P.Perm:
    return P.from_cycles([list(points)], degree)


def _elementary(p: int, k: int) -> tuple:
    deg = p * k
    return tuple(_cycle(range(i * p, (i + 1) * p), deg) for i in range(k))


def _quaternion() -> tuple:
    # elements (sign, unit) with unit in 1,i,j,k; index = 4*(sign<0) + unit
    mult = {(0, 0): (1, 0), (0, 1): (1, 1), (0, 2): (1, 2), (0, 3): (1, 3),
            (1, 0): (1, 1), (1, 1): (-1, 0), (1, 2): (1, 3), (1, 3): (-1, 2),
            (2, 0): (1, 2), (2, 1): (-1, 3), (2, 2): (-1, 0), (2, 3): (1, 1),
            (3, 0): (1, 3), (3, 1): (1, 2), (3, 2): (-1, 1), (3, 3): (-1, 0)}

    def right(unit: int) -> P.Perm:
        img = []
        for idx in range(8):
            s, a = (-1 if idx >= 4 else 1), idx % 4
            t, b = mult[(a, unit)]
            sign = s * t
            img.append((4 if sign < 0 else 0) + b)
        return tuple(img)

    return (right(1), right(2))


def _dihedral(m: int) -> tuple:
    rot = _cycle(range(m), m)
    ref = tuple((-i) % m for i in range(m))
    return (rot, ref)


def _builtin_entries() -> list[CatalogEntry]:
    out = [CatalogEntry("trivial", 1, ((0,),), ("1", "Z1"))]
    for m in range(2, 16):
        out.append(CatalogEntry(f"Z{m}", m, (_cycle(range(m), m),), (f"Z/{m}", f"C{m}")))
    for p in (2, 3, 5, 7):
        for k in (2, 3):
            aliases = (f"(Z/{p})^{k}",) + (("V4",) if (p, k) == (2, 2) else ())
            out.append(CatalogEntry(f"Z{p}^{k}", p * k, _elementary(p, k), aliases))
    out += [
        CatalogEntry("Z2xZ4", 6, (_cycle([0, 1], 6), _cycle([2, 3, 4, 5], 6)), ("Z/2xZ/4",)),
        CatalogEntry("Z2xZ6", 8, (_cycle([0, 1], 8), _cycle([2, 3, 4, 5, 6, 7], 8)), ("Z/2xZ/6",)),
        CatalogEntry("S3", 3, (_cycle([0, 1, 2], 3), _cycle([0, 1], 3)), ("D3",)),
        CatalogEntry("D4", 4, (_cycle([0, 1, 2, 3], 4), P.from_cycles([[0, 2]], 4)), ("D8",)),
        CatalogEntry("Q8", 8, _quaternion(), ()),
        CatalogEntry("A4", 4, (_cycle([0, 1, 2], 4), P.from_cycles([[0, 1], [2, 3]], 4)), ()),
        CatalogEntry("D5", 5, _dihedral(5), ("D10",)),
        CatalogEntry("D6", 6, _dihedral(6), ("D12",)),
        CatalogEntry("Dic3", 7, (_cycle([0, 1, 2], 7), P.from_cycles([[1, 2], [3, 4, 5, 6]], 7)), ("Q12",)),
        CatalogEntry("D7", 7, _dihedral(7), ("D14",)),
        CatalogEntry("S4", 4, (_cycle([0, 1, 2, 3], 4), _cycle([0, 1], 4)), ()),
        CatalogEntry("A5", 5, (_cycle([0, 1, 2, 3, 4], 5), _cycle([0, 1, 2], 5)), ()),
        CatalogEntry("S5", 5, (_cycle([0, 1, 2, 3, 4], 5), _cycle([0, 1], 5)), ()),
    ]
    return out


BUILTIN: dict[str, CatalogEntry] = {}
_ALIASES: dict[str, str] = {}
for _e in _builtin_entries():
    BUILTIN[_e.name] = _e
    _ALIASES[_e.name.lower()] = _e.name
    for _a in _e.aliases:
        _ALIASES[_a.lower()] = _e.name


def parse_catalog_data(data, source: str = "<catalog>") -> list[CatalogEntry]:
    if not isinstance(data, list):
        raise InputError(f"{source}: top level must be a JSON array of group records")
    out = []
    for i, rec in enumerate(data):
        where = f"{source}: record {i}"
        if not isinstance(rec, dict):
            raise InputError(f"{where}: expected an object")
        for key in ("name", "degree", "generators"):
            if key not in rec:
                raise InputError(f"{where}: missing field '{key}'")
        name, degree, gens = rec["name"], rec["degree"], rec["generators"]
        if not isinstance(name, str) or not name:
            raise InputError(f"{where}: field 'name' must be a nonempty string")
        if not isinstance(degree, int) or isinstance(degree, bool) or degree < 1:
            raise InputError(f"{where} ({name}): field 'degree' must be a positive integer")
        if not isinstance(gens, list) or not gens:
            raise InputError(f"{where} ({name}): field 'generators' must be a nonempty list")
        perms = []
        for j, g in enumerate(gens):
            if not isinstance(g, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in g):
                raise InputError(f"{where} ({name}): generator {j} must be a list of integers")
            try:
                perms.append(P.check_perm(g, degree))
            except InputError as exc:
                raise InputError(f"{where} ({name}): generator {j}: {exc}") from None
        entry = CatalogEntry(name, degree, tuple(perms))
        if "order" in rec:
            got = entry.finite_group().order()
            if got != rec["order"]:
                raise InputError(f"{where} ({name}): claimed order {rec['order']} but generators give {got}")
        out.append(entry)
    return out


def parse_catalog(path: str) -> list[CatalogEntry]:
    if not os.path.exists(path):
        raise InputError(f"catalog file {path} does not exist")
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return parse_catalog_data(data, path)


class Catalog:
    """Name lookup over built-ins and any loaded catalog files."""

    def __init__(self, extra: Sequence[CatalogEntry] = ()):
        self.entries = dict(BUILTIN)
        self.aliases = dict(_ALIASES)
        for e in extra:
            self.entries[e.name] = e
            self.aliases[e.name.lower()] = e.name

    @classmethod
    def default(cls, path: Optional[str] = None) -> "Catalog":
        path = path or os.environ.get("PROGROUP_CATALOG")
        return cls(parse_catalog(path) if path else ())

    def entry(self, name: str) -> CatalogEntry:
        key = self.aliases.get(name.strip().lower())
        if key is None:
            raise InputError(f"unknown group name '{name}'")
        return self.entries[key]

    def group(self, name: str) -> SmallGroup:
        return self.entry(name).small_group()

    def resolve_set(self, spec: str) -> list[SmallGroup]:
        """Comma-separated names, or 'order<=L' for every built-in of order at most L (L <= 15)."""
        spec = spec.strip()
        if spec.startswith("order<="):
            bound = int(spec[len("order<="):])
            if bound > 15:
                raise InputError("'order<=L' is only complete for L <= 15")
            return [e.small_group() for e in BUILTIN.values() if e.small_group().order <= bound]
        names = [s for s in spec.split(",") if s.strip()]
        if not names:
            raise InputError("empty group set")
        return [self.group(s) for s in names]


def builtin(name: str) -> SmallGroup:
    return Catalog().group(name)


def elementary_abelian(p: int, k: int) -> SmallGroup:
    if k == 0:
        return builtin("trivial")
    return SmallGroup.from_perms(_elementary(p, k), label=f"Z{p}^{k}" if k > 1 else f"Z{p}")


def abelian_invariants(G: SmallGroup) -> list[int]:
    """Invariant factors d1 | d2 | ... of an abelian group, from element orders."""
    orders = G.element_orders
    inv: list[int] = []
    n, p = G.order, 2
    primes = []
    while n > 1:
        if n % p == 0:
            primes.append(p)
            while n % p == 0:
                n //= p
        p += 1
    parts = {}
    for p in primes:
        # d_k = #{i : lambda_i >= k} = log_p |G[p^k]| - log_p |G[p^(k-1)]|
        logs = [0]
        k = 1
        while True:
            c = int(np.count_nonzero((p ** k) % orders == 0))
            logs.append(_log(c, p))
            if logs[-1] == logs[-2]:
                break
            k += 1
        d = [logs[i] - logs[i - 1] for i in range(1, len(logs) - 1)]
        parts[p] = [sum(1 for x in d if x >= i) for i in range(1, (d[0] if d else 0) + 1)]
    width = max((len(v) for v in parts.values()), default=0)
    for j in range(width):
        f = 1
        for p, part in parts.items():
            if j < len(part):
                f *= p ** part[j]
        inv.append(f)
    return sorted(inv)


def _log(n: int, p: int) -> int:
    k = 0
    while n > 1:
        n //= p
        k += 1
    return k


_SEEN_NAMES: dict = {}


def identify(G: SmallGroup) -> str:
    """A readable name: a built-in name when isomorphic to one, else a structural tag."""
    from .smallgroup import is_isomorphic

    for entry in BUILTIN.values():
        B = entry.small_group()
        if B.order == G.order and is_isomorphic(G, B) is not None:
            return entry.name
    if G.is_abelian:
        return "x".join(f"Z{d}" for d in abelian_invariants(G))
    digest = hashlib.sha1(repr(G.invariant_key).encode()).hexdigest()[:6]
    tag = f"G{G.order}_{digest}"
    reps = _SEEN_NAMES.setdefault(tag, [])
    for i, R in enumerate(reps):
        if is_isomorphic(G, R) is not None:
            return tag if i == 0 else f"{tag}.{i}"
    reps.append(G)
    return tag if len(reps) == 1 else f"{tag}.{len(reps) - 1}"
