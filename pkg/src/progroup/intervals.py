"""Certified enclosures on top of mpmath's interval context.

Values are mpmath ``iv.mpf`` intervals.  Decimal strings are rounded outward
so a printed [lo, hi] still contains the true value.
"""

from __future__ import annotations

from contextlib import contextmanager
from fractions import Fraction
from typing import Iterator

import mpmath
from mpmath import iv

PREC = 200  # bits


@contextmanager
def precision(bits: int = PREC) -> Iterator[None]:
    old = iv.prec
    iv.prec = bits
    try:
        yield
    finally:
        iv.prec = old


def from_fraction(q: Fraction):
    return iv.mpf(q.numerator) / q.denominator


def point(q) -> object:
    if isinstance(q, Fraction):
        return from_fraction(q)
    return iv.mpf(q)


def hull(lo, hi):
    return iv.mpf([endpoints(lo)[0], endpoints(hi)[1]])


def endpoints(x) -> tuple[Fraction, Fraction]:
    """Exact rational endpoints of an interval."""
    a, b = x._mpi_
    return _mpf_to_fraction(a), _mpf_to_fraction(b)


def _mpf_to_fraction(raw) -> Fraction:
    sign, man, exp, _ = raw
    if not man:
        return Fraction(0)
    val = Fraction(man) * (Fraction(2) ** exp)
    return -val if sign else val


def decimal_floor(q: Fraction, digits: int) -> str:
    scale = 10 ** digits
    n = (q.numerator * scale) // q.denominator
    return _fmt(n, digits)


def decimal_ceil(q: Fraction, digits: int) -> str:
    scale = 10 ** digits
    n = -((-q.numerator * scale) // q.denominator)
    return _fmt(n, digits)


def _fmt(n: int, digits: int) -> str:
    sign = "-" if n < 0 else ""
    n = abs(n)
    whole, frac = divmod(n, 10 ** digits)
    return f"{sign}{whole}.{frac:0{digits}d}"


def interval_strings(x, digits: int = 30) -> tuple[str, str]:
    lo, hi = endpoints(x)
    return decimal_floor(lo, digits), decimal_ceil(hi, digits)


def width(x) -> Fraction:
    lo, hi = endpoints(x)
    return hi - lo


def contains(x, q) -> bool:
    lo, hi = endpoints(x)
    return lo <= Fraction(q) <= hi


def q_product_tail(x: Fraction, h: int, start: int = 1, tol_bits: int = 160):
    """Enclosure of prod_{i >= start} (1 - x h^{-i}) for x >= 0.

    The first factors are multiplied exactly; once y_i = x h^{-i} <= 1/2 the
    rest lies in [exp(-2s), exp(-s)] with s = sum y_i, because
    -2y <= log(1 - y) <= -y on [0, 1/2].
    """
    if x < 0:
        raise ValueError("x must be nonnegative")
    if x == 0:
        return iv.mpf(1)
    exact = Fraction(1)
    i = start
    # stop when the remaining sum is tiny
    while True:
        y = x / Fraction(h) ** i
        s = y * Fraction(h, h - 1)  # sum_{j >= i} y_j
        if y <= Fraction(1, 2) and s < Fraction(1, 2 ** tol_bits):
            break
        exact *= 1 - y
        i += 1
        if exact == 0:
            return iv.mpf(0)
    s_iv = from_fraction(s)
    tail = iv.mpf([iv.exp(-2 * s_iv).a, iv.exp(-s_iv).b])
    return from_fraction(exact) * tail


def exp_neg(x: Fraction):
    return iv.exp(-from_fraction(x))


def to_mpf_string(x, digits: int = 12) -> str:
    lo, hi = endpoints(x)
    mid = (lo + hi) / 2
    return mpmath.nstr(mpmath.mpf(mid.numerator) / mid.denominator, digits)
