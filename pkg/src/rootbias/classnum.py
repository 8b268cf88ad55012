"""Class numbers of binary quadratic forms and Hurwitz class numbers.

Two independent routes are exposed on purpose. The direct route counts
reduced forms per discriminant; the relation route scales a fundamental
value by a multiplicative factor over the conductor. The test suite
holds them against each other, so neither may quietly change.

Conventions: discriminants are negative integers congruent to 0 or 1
mod 4. h'(-3) = 1/3 and h'(-4) = 1/2 (forms with extra automorphisms
are weighted), and the Hurwitz number H(0) = -1/12.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt

from rootbias.arith import divisors, factor, kronecker, mobius, sigma

__all__ = [
    "Discriminant",
    "h_prime",
    "h_prime_scaled",
    "hurwitz",
    "hurwitz_via_relation",
    "reduced_forms",
    "warm_cache",
]

# 12 * h'(d) and 12 * H(d), keyed by d, filled by warm_cache. Twelve
# clears every denominator that can occur, so the tables stay integer.
_HP12: dict[int, int] = {}
_H12: dict[int, int] = {}
_warm_limit = 0


def _check_disc(d: int) -> int:
    if d >= 0:
        raise ValueError(f"discriminant must be negative, got {d}")
    if d % 4 not in (0, 1):
        raise ValueError(f"not a discriminant (need 0 or 1 mod 4): {d}")
    return d


@dataclass(frozen=True)
class Discriminant:
    """A negative discriminant split as value = conductor**2 * fundamental_part.

    value 0 is admitted as a degenerate carrier solely because H(0) is
    a meaningful quantity; no other operation accepts it.
    """

    value: int
    fundamental_part: int
    conductor: int

    @property
    def is_fundamental(self) -> bool:
        return self.value != 0 and self.conductor == 1

    @classmethod
    def of(cls, d: int) -> "Discriminant":
        if d == 0:
            return cls(0, 0, 0)
        _check_disc(d)
        n = -d
        a = 1
        for p, e in factor(n).pairs:
            a *= p ** (e // 2)
        b = n // (a * a)
        if -b % 4 == 1:
            return cls(d, -b, a)
        # -b is 2 or 3 mod 4, so 4 | d and the conductor sheds a factor 2.
        return cls(d, -4 * b, a // 2)

    @classmethod
    def of_field(cls, n: int) -> "Discriminant":
        """Discriminant of Q(sqrt(-n)) for a positive integer n."""
        if n <= 0:
            raise ValueError(f"of_field expects a positive integer, got {n}")
        m = 1
        for p, e in factor(n).pairs:
            if e % 2:
                m *= p
        return cls.of(-m if -m % 4 == 1 else -4 * m)


def _as_value(d) -> int:
    return d.value if isinstance(d, Discriminant) else d


def reduced_forms(d, primitive_only: bool = False) -> list[tuple[int, int, int]]:
    """Reduced binary quadratic forms (a, b, c) of discriminant d.

    Reduced means |b| <= a <= c with b >= 0 whenever |b| = a or a = c.
    """
    d = _check_disc(_as_value(d))
    forms = []
    for a in range(1, isqrt(-d // 3) + 1):
        for b in range(-a, a + 1):
            if (b - d) % 2:
                continue
            num = b * b - d
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a:
                continue
            if b < 0 and (-b == a or a == c):
                continue
            if primitive_only and gcd(gcd(a, b), c) != 1:
                continue
            forms.append((a, b, c))
    return forms


def _weight12(a: int, b: int, c: int) -> int:
    if b == 0 and a == c:
        return 6
    if a == b == c:
        return 4
    return 12


@lru_cache(maxsize=None)
def _h_prime12(d: int) -> int:
    return sum(_weight12(*f) for f in reduced_forms(d, primitive_only=True))


def h_prime(d) -> Fraction:
    """Weighted class number h'(d) of primitive forms of discriminant d."""
    d = _check_disc(_as_value(d))
    if -d <= _warm_limit:
        return Fraction(_HP12[d], 12)
    return Fraction(_h_prime12(d), 12)


def hurwitz(d) -> Fraction:
    """Hurwitz class number H(d) = sum of h'(d / f**2) over square divisors."""
    d = _as_value(d)
    if d == 0:
        return Fraction(-1, 12)
    _check_disc(d)
    if -d <= _warm_limit:
        return Fraction(_H12[d], 12)
    disc = Discriminant.of(d)
    total = 0
    for t in divisors(disc.conductor):
        total += _h_prime12(disc.fundamental_part * t * t)
    return Fraction(total, 12)


def _check_fundamental(d_fund) -> Discriminant:
    disc = d_fund if isinstance(d_fund, Discriminant) else Discriminant.of(d_fund)
    if not disc.is_fundamental:
        raise ValueError(f"{disc.value} is not a fundamental discriminant")
    return disc


def h_prime_scaled(d_fund, conductor: int) -> Fraction:
    """h'(conductor**2 * d_fund) from the fundamental value, by the product
    lam * prod_{p | lam} (1 - (d_fund|p)/p) * h'(d_fund)."""
    disc = _check_fundamental(d_fund)
    if conductor <= 0:
        raise ValueError(f"conductor must be positive, got {conductor}")
    scale = 1
    for p, e in factor(conductor).pairs:
        scale *= p ** (e - 1) * (p - kronecker(disc.value, p))
    return scale * h_prime(disc.value)


def hurwitz_via_relation(d_fund, conductor: int) -> Fraction:
    """H(conductor**2 * d_fund) as sum_{t | conductor} mu(t) (d_fund|t)
    sigma(conductor/t) h'(d_fund)."""
    disc = _check_fundamental(d_fund)
    if conductor <= 0:
        raise ValueError(f"conductor must be positive, got {conductor}")
    total = 0
    for t in divisors(conductor):
        m = mobius(t)
        if m == 0:
            continue
        total += m * kronecker(disc.value, t) * sigma(conductor // t)
    return total * h_prime(disc.value)


def warm_cache(limit: int) -> None:
    """Fill the h' and H tables for all discriminants down to -limit.

    One pass over reduced forms: a form (a, b, c) with b >= 0 stands for
    itself and, when 0 < b < a < c, its mirror (a, -b, c). Weights are
    12 per form, 6 for (a, 0, a), 4 for (a, a, a); imprimitive forms
    count toward H but not h'.
    """
    global _warm_limit
    if limit <= _warm_limit:
        return
    hp12: dict[int, int] = {}
    h12: dict[int, int] = {}
    for a in range(1, isqrt(limit // 3) + 1):
        for b in range(a + 1):
            cmax = (limit + b * b) // (4 * a)
            g_ab = gcd(a, b)
            for c in range(a, cmax + 1):
                # c >= a >= b forces d < 0 here.
                d = b * b - 4 * a * c
                if b == 0:
                    w = 6 if a == c else 12
                elif b == a:
                    w = 4 if a == c else 12
                elif a == c:
                    w = 12
                else:
                    w = 24  # (a, b, c) and (a, -b, c) are both reduced
                h12[d] = h12.get(d, 0) + w
                if gcd(g_ab, c) == 1:
                    hp12[d] = hp12.get(d, 0) + w
    _HP12.clear()
    _HP12.update(hp12)
    _H12.clear()
    _H12.update(h12)
    _warm_limit = limit
