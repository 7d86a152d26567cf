"""Regenerate src/progroup/data/simple_groups.csv.

Lists every non-abelian finite simple group of order <= LIMIT with the order
of its automorphism group, from the standard order formulas and outer
automorphism orders of the families that can occur below the limit.
"""

from __future__ import annotations

import csv
import math
import sys
from pathlib import Path

LIMIT = 10 ** 6


def prime_power(q: int):
    for p in range(2, q + 1):
        if q % p == 0:
            f = 0
            while q % p == 0:
                q //= p
                f += 1
            return (p, f) if q == 1 else None
    return None


def psl_order(n, q):
    out = q ** (n * (n - 1) // 2)
    for i in range(2, n + 1):
        out *= q ** i - 1
    return out // math.gcd(n, q - 1)


def psu_order(n, q):
    out = q ** (n * (n - 1) // 2)
    for i in range(2, n + 1):
        out *= q ** i - (-1) ** i
    return out // math.gcd(n, q + 1)


def psp4_order(q):
    return q ** 4 * (q ** 2 - 1) * (q ** 4 - 1) // math.gcd(2, q - 1)


def rows():
    out = {}

    def add(name, order, out_order, same_as=None):
        if order <= LIMIT:
            out[same_as or name] = (order, same_as or name, order * out_order)

    for n in range(5, 12):
        add(f"A{n}", math.factorial(n) // 2, 4 if n == 6 else 2)
    for q in range(4, 2000):
        pf = prime_power(q)
        if pf is None:
            continue
        p, f = pf
        alias = {4: "A5", 5: "A5", 9: "A6"}.get(q)
        add(f"PSL(2,{q})", psl_order(2, q), math.gcd(2, q - 1) * f, alias)
    for n in range(3, 6):
        for q in range(2, 50):
            pf = prime_power(q)
            if pf is None:
                continue
            p, f = pf
            alias = {(3, 2): "PSL(2,7)", (4, 2): "A8"}.get((n, q))
            add(f"PSL({n},{q})", psl_order(n, q), math.gcd(n, q - 1) * f * 2, alias)
            if (n, q) != (3, 2):  # PSU(3,2) is solvable
                alias = {(4, 2): "PSp(4,3)"}.get((n, q))
                add(f"PSU({n},{q})", psu_order(n, q), math.gcd(n, q + 1) * 2 * f, alias)
    for q in range(3, 50):
        pf = prime_power(q)
        if pf is None:
            continue
        _, f = pf
        add(f"PSp(4,{q})", psp4_order(q), 2 * f)  # diagonal (q odd) or graph (q even), times field
    for f in (3, 5, 7):
        q = 2 ** f
        add(f"Sz({q})", q * q * (q * q + 1) * (q - 1), f)
    for name, order, out_order in [("M11", 7920, 1), ("M12", 95040, 2), ("J1", 175560, 1),
                                   ("M22", 443520, 2), ("J2", 604800, 2), ("M23", 10200960, 1)]:
        add(name, order, out_order)
    # the same group reached twice: keep one name
    merged = {}
    for order, name, aut in out.values():
        merged[name] = (order, name, aut)
    return sorted(merged.values())


def main(path: str) -> None:
    table = rows()
    per_order = {}
    for order, name, _ in table:
        per_order.setdefault(order, []).append(name)
    assert all(len(v) <= 2 for v in per_order.values()), per_order
    assert len(table) == 56, len(table)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["order", "name", "aut_order"])
        for order, name, aut in table:
            w.writerow([order, name, aut])


if __name__ == "__main__":
    default = Path(__file__).resolve().parent.parent / "src" / "progroup" / "data" / "simple_groups.csv"
    main(sys.argv[1] if len(sys.argv) > 1 else str(default))
