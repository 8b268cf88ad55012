"""Dimensions of S_k(Gamma0(N)) and its new subspace, by the valence formula.

Independent of the trace module on purpose: the bias invariants
|delta| <= dim and delta = dim (mod 2) are only meaningful checks if the
dimensions come from a different computation than the traces.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd

from rootbias.arith import divisors, euler_phi, factor, kronecker

__all__ = [
    "DimensionBreakdown",
    "dim_sk",
    "dim_sk_new",
    "dimension_breakdown",
    "genus_x0",
]


def _check_weight(k: int) -> int:
    if k < 2 or k % 2:
        raise ValueError(f"weight must be an even integer >= 2, got {k}")
    return k


@lru_cache(maxsize=None)
def _invariants(N: int) -> tuple[int, int, int, int, int]:
    """(index, nu2, nu3, nu_inf, genus) of X_0(N)."""
    if N < 1:
        raise ValueError(f"level must be a positive integer, got {N}")
    pairs = factor(N).pairs
    index = 1
    for p, e in pairs:
        index *= p ** (e - 1) * (p + 1)
    if N % 4 == 0:
        nu2 = 0
    else:
        nu2 = 1
        for p, _ in pairs:
            if p > 2:  # an exact factor of 2 contributes 1
                nu2 *= 1 + kronecker(-1, p)
    if N % 9 == 0:
        nu3 = 0
    else:
        nu3 = 1
        for p, _ in pairs:
            nu3 *= 1 + kronecker(-3, p)
    nu_inf = sum(euler_phi(gcd(d, N // d)) for d in divisors(N))
    g = (
        1
        + Fraction(index, 12)
        - Fraction(nu2, 4)
        - Fraction(nu3, 3)
        - Fraction(nu_inf, 2)
    )
    if g.denominator != 1:
        raise ArithmeticError(f"non-integral genus at N={N}: {g}")
    return index, nu2, nu3, nu_inf, int(g)


def genus_x0(N: int) -> int:
    return _invariants(N)[4]


def dim_sk(N: int, k: int) -> int:
    """dim S_k(Gamma0(N)) for even k >= 2."""
    _check_weight(k)
    index, nu2, nu3, nu_inf, g = _invariants(N)
    if k == 2:
        return g
    return (
        (k - 1) * (g - 1)
        + (k // 2 - 1) * nu_inf
        + nu2 * (k // 4)
        + nu3 * (k // 3)
    )


@lru_cache(maxsize=None)
def _new_kernel(n: int) -> int:
    """Multiplicative kernel inverting d -> sigma_0(d) on divisor sums."""
    out = 1
    for _, e in factor(n).pairs:
        if e == 1:
            out *= -2
        elif e == 2:
            pass  # factor 1
        else:
            return 0
    return out


def dim_sk_new(N: int, k: int) -> int:
    """dim S_k^new(Gamma0(N)): every oldform of level M | N appears in
    S_k(N) with multiplicity sigma_0(N/M), so invert that."""
    total = sum(
        _new_kernel(N // d) * dim_sk(d, k) for d in divisors(N) if _new_kernel(N // d)
    )
    if total < 0:
        raise ArithmeticError(f"negative new dimension at N={N}, k={k}")
    return total


@dataclass(frozen=True)
class DimensionBreakdown:
    N: int
    k: int
    index_mu: int
    nu2: int
    nu3: int
    nu_inf: int
    genus: int
    dim_full: int
    dim_new: int


def dimension_breakdown(N: int, k: int) -> DimensionBreakdown:
    index, nu2, nu3, nu_inf, g = _invariants(N)
    return DimensionBreakdown(
        N=N,
        k=k,
        index_mu=index,
        nu2=nu2,
        nu3=nu3,
        nu_inf=nu_inf,
        genus=g,
        dim_full=dim_sk(N, k),
        dim_new=dim_sk_new(N, k),
    )
