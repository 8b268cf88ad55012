"""Multiplicative arithmetic helpers.

Everything in this module is exact integer arithmetic. Factorization is
trial division with a 2/3/5 wheel, which is plenty for the level ranges
the rest of the package targets (N into the millions).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

__all__ = [
    "Factorization",
    "LevelDecomposition",
    "decompose_level",
    "divisors",
    "euler_phi",
    "factor",
    "is_squarefree",
    "kronecker",
    "mobius",
    "odd_part",
    "omega",
    "sigma",
    "vp",
]

# Gap sequence of the mod-30 wheel, starting from 7.
_WHEEL = (4, 2, 4, 2, 4, 6, 2, 6)


@dataclass(frozen=True)
class Factorization:
    """Prime factorization of a positive integer, primes ascending."""

    n: int
    pairs: tuple[tuple[int, int], ...]

    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.pairs)

    def exponent(self, p: int) -> int:
        for q, e in self.pairs:
            if q == p:
                return e
        return 0


@lru_cache(maxsize=None)
def factor(n: int) -> Factorization:
    """Factor a positive integer by wheel trial division."""
    if n <= 0:
        raise ValueError(f"factor expects a positive integer, got {n}")
    m = n
    pairs = []
    for p in (2, 3, 5):
        if m % p == 0:
            e = 1
            m //= p
            while m % p == 0:
                m //= p
                e += 1
            pairs.append((p, e))
    p, i = 7, 0
    while p * p <= m:
        if m % p == 0:
            e = 1
            m //= p
            while m % p == 0:
                m //= p
                e += 1
            pairs.append((p, e))
        p += _WHEEL[i]
        i = (i + 1) & 7
    if m > 1:
        pairs.append((m, 1))
    return Factorization(n, tuple(pairs))


def divisors(n: int) -> list[int]:
    """All positive divisors of n, ascending."""
    divs = [1]
    for p, e in factor(n).pairs:
        divs = [d * q for d in divs for q in _powers(p, e)]
    return sorted(divs)


def _powers(p, e):
    q = 1
    out = []
    for _ in range(e + 1):
        out.append(q)
        q *= p
    return out


def mobius(n: int) -> int:
    f = factor(n)
    if any(e > 1 for _, e in f.pairs):
        return 0
    return -1 if len(f.pairs) % 2 else 1


def euler_phi(n: int) -> int:
    out = 1
    for p, e in factor(n).pairs:
        out *= p ** (e - 1) * (p - 1)
    return out


def sigma(n: int) -> int:
    """Sum of the positive divisors of n."""
    out = 1
    for p, e in factor(n).pairs:
        out *= (p ** (e + 1) - 1) // (p - 1)
    return out


def omega(n: int) -> int:
    """Number of distinct prime divisors."""
    return len(factor(n).pairs)


def odd_part(n: int) -> int:
    if n <= 0:
        raise ValueError(f"odd_part expects a positive integer, got {n}")
    while n % 2 == 0:
        n //= 2
    return n


def vp(n: int, p: int) -> int:
    """p-adic valuation of n. p must be prime, n nonzero."""
    if n == 0:
        raise ValueError("vp(0, p) is not defined")
    if p < 2 or factor(p).pairs != ((p, 1),):
        raise ValueError(f"vp needs a prime p, got {p}")
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a|n), defined for all integers.

    Extends the Jacobi symbol by the standard conventions at 2, -1 and 0.
    """
    if n == 0:
        return 1 if a in (1, -1) else 0
    sign = 1
    if n < 0:
        n = -n
        if a < 0:
            sign = -1
    # (a|2) = 0, 1, -1 for a even, a = +-1 mod 8, a = +-3 mod 8.
    e = 0
    while n % 2 == 0:
        n //= 2
        e += 1
    if e:
        if a % 2 == 0:
            return 0
        if e % 2 and a % 8 in (3, 5):
            sign = -sign
    # Jacobi step: n is odd and positive from here on.
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                sign = -sign
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            sign = -sign
        a %= n
    return sign if n == 1 else 0


def is_squarefree(n: int) -> bool:
    return all(e == 1 for _, e in factor(n).pairs)


@dataclass(frozen=True)
class LevelDecomposition:
    """N = N1 * N2**2 with N1 squarefree; N2 is the largest square root."""

    N: int
    N1: int
    N2: int
    factorization: Factorization


@lru_cache(maxsize=None)
def decompose_level(N: int) -> LevelDecomposition:
    if N <= 0:
        raise ValueError(f"level must be a positive integer, got {N}")
    f = factor(N)
    n2 = 1
    for p, e in f.pairs:
        n2 *= p ** (e // 2)
    return LevelDecomposition(N, N // (n2 * n2), n2, f)
