"""Traces of the Fricke involution W_N on S_k(Gamma0(N)) and its new part.

Three routes to the same numbers live here:

* trace_full_direct: the raw class-number sum for tr W_N on the full
  space, kept deliberately close to its defining shape.
* trace_full_closed: the collapsed form of that sum (small levels get
  explicit tables, everything else reduces to a single class number).
* trace_new_closed: the new-subspace trace in closed form, routed
  through five level shapes plus the small levels; trace_new_mobius
  gives the same number by Moebius inversion over square divisors.

The closed forms are only trusted because the test suite grinds them
against the direct routes on large grids. Do not "simplify" one side.

Weights are even throughout; odd weights have no cusp forms on
Gamma0(N) with trivial character.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from math import isqrt

from rootbias.arith import (
    decompose_level,
    divisors,
    euler_phi,
    is_squarefree,
    kronecker,
    mobius,
)
from rootbias.classnum import Discriminant, h_prime, hurwitz

__all__ = [
    "CaseTag",
    "Corrections",
    "TraceReport",
    "beta",
    "c_coeff",
    "case_tag",
    "correction_xi",
    "p_k_even",
    "trace_full_closed",
    "trace_full_direct",
    "trace_new_closed",
    "trace_new_mobius",
    "trace_report",
]


def _check_weight(k: int) -> int:
    if k < 2 or k % 2:
        raise ValueError(f"weight must be an even integer >= 2, got {k}")
    return k


def _check_level(N: int) -> int:
    if N < 1:
        raise ValueError(f"level must be a positive integer, got {N}")
    return N


@lru_cache(maxsize=None)
def p_k_even(s_squared: int, k: int) -> int:
    """p_k(s) = (rho^(k-1) - rhobar^(k-1)) / (rho - rhobar) for rho a root
    of X^2 - sX + 1, as a function of s^2 (even k makes it one).

    Only s^2 <= 4 ever appears in the trace sum; the recurrence below is
    exact there, including the degenerate s^2 = 4 where p_k(2) = k - 1.
    """
    _check_weight(k)
    if s_squared not in (0, 1, 2, 3, 4):
        raise ValueError(f"s_squared must be one of 0..4, got {s_squared}")
    prev, cur = 1, s_squared - 1
    if k == 2:
        return prev
    for _ in range((k - 4) // 2):
        prev, cur = cur, (s_squared - 2) * cur - prev
    return cur


def beta(N: int) -> int:
    """Local factor at 2 of the generic new-trace main term."""
    dec = decompose_level(_check_level(N))
    if dec.N1 % 4 == 3:
        if dec.N2 % 2:
            return 3 - kronecker(-dec.N1, 2)
        if dec.N2 % 4 == 0:
            return 2
        return 1
    return 1


def c_coeff(d_fund: int, n: int) -> int:
    """Alternating divisor sum sum_{t | n} phi(n/t) mu(t) (d_fund | t).

    d_fund must be a negative fundamental discriminant. The sum is
    multiplicative in n and nonnegative; it vanishes exactly when 2
    divides n exactly once and (d_fund | 2) = 1.
    """
    disc = d_fund if isinstance(d_fund, Discriminant) else Discriminant.of(d_fund)
    if not disc.is_fundamental:
        raise ValueError(f"{disc.value} is not a fundamental discriminant")
    if n <= 0:
        raise ValueError(f"n must be a positive integer, got {n}")
    total = 0
    for t in divisors(n):
        m = mobius(t)
        if m == 0:
            continue
        total += euler_phi(n // t) * m * kronecker(disc.value, t)
    return total


def trace_full_direct(N: int, k: int) -> int:
    """tr W_N on S_k(Gamma0(N)) as the raw class-number sum.

    tr = -(1/2) sum_{M | N, N/M square} mu(sqrt(N/M)) sum_s m(s) I_s(k, M)
         - (1/2) [N in {1, 4}] + [k = 2]

    where I_s = p_k(s / sqrt(M)) H(s^2 - 4M), s runs over multiples of
    sqrt(MN) with 0 <= s <= 2 sqrt(M), and m(s) = 1 for s = 0, else 2
    (s and -s contribute equally for even k).
    """
    _check_level(N)
    _check_weight(k)
    total = Fraction(0)
    for M in divisors(N):
        q = isqrt(N // M)
        if q * q != N // M:
            continue
        mu = mobius(q)
        if mu == 0:
            continue
        # s = j * M * q, so (s / sqrt(M))^2 = j^2 N and s^2 - 4M = M (j^2 N - 4).
        inner = Fraction(0)
        j = 0
        while j * j * N <= 4:
            mult = 1 if j == 0 else 2
            inner += mult * p_k_even(j * j * N, k) * hurwitz(M * (j * j * N - 4))
            j += 1
        total += mu * inner
    tr = -total / 2 + (k == 2)
    if N in (1, 4):
        tr -= Fraction(1, 2)
    if tr.denominator != 1:
        raise ArithmeticError(f"non-integral trace at N={N}, k={k}: {tr}")
    return int(tr)


def trace_full_closed(N: int, k: int) -> int:
    """tr W_N on S_k(Gamma0(N)), collapsed closed form."""
    _check_level(N)
    _check_weight(k)
    if N == 1:
        return k // 12 - (k % 12 == 2) + (k == 2)
    if N == 2:
        r = k % 8
        if r == 0:
            return 1
        if r == 2:
            return -1 + (k == 2)
        return 0
    if N == 3:
        r = k % 12
        if r in (0, 8):
            return 1
        if r == 2:
            return -1 + (k == 2)
        if r == 6:
            return -1
        return 0
    if N == 4:
        return -1 + (k == 2) if k % 4 == 2 else 0
    dec = decompose_level(N)
    if dec.N1 % 4 in (1, 2):
        x = h_prime(-4 * N) / 2
    elif dec.N2 % 2:
        x = (3 - kronecker(-dec.N1, 2)) * h_prime(-N) / 2
    else:
        x = h_prime(-N)
    tr = (-1) ** (k // 2) * x + (k == 2)
    if tr.denominator != 1:
        raise ArithmeticError(f"non-integral trace at N={N}, k={k}: {tr}")
    return int(tr)


def trace_new_mobius(N: int, k: int) -> int:
    """tr W_N on the new subspace, by Moebius inversion over square divisors."""
    dec = decompose_level(_check_level(N))
    return sum(
        mobius(q) * trace_full_closed(N // (q * q), k)
        for q in divisors(dec.N2)
    )


class CaseTag(str, Enum):
    """Which closed-form branch a level routes through."""

    GENERIC = "Generic"
    SQUARE_ODD_ROOT = "Square_OddRoot"
    SQUARE_EVEN_ROOT = "Square_EvenRoot"
    SQUARE_TWICE_EVEN = "Square_TwiceEven"
    TWICE_SQUARE = "TwiceSquare"
    THRICE_SQUARE = "ThriceSquare"
    SMALL_LEVEL = "SmallLevel"


def case_tag(N: int) -> CaseTag:
    dec = decompose_level(_check_level(N))
    if N <= 4:
        return CaseTag.SMALL_LEVEL
    if dec.N1 == 1:
        if is_squarefree(dec.N2):
            return (
                CaseTag.SQUARE_ODD_ROOT if dec.N2 % 2 else CaseTag.SQUARE_EVEN_ROOT
            )
        if dec.N2 % 4 == 0 and (dec.N2 // 4) % 2 and is_squarefree(dec.N2 // 4):
            return CaseTag.SQUARE_TWICE_EVEN
    elif dec.N1 == 2 and is_squarefree(dec.N2):
        return CaseTag.TWICE_SQUARE
    elif dec.N1 == 3 and is_squarefree(dec.N2):
        return CaseTag.THRICE_SQUARE
    return CaseTag.GENERIC


def _field_disc_abs(N1: int) -> int:
    # |disc Q(sqrt(-N))| depends only on the squarefree part N1.
    return N1 if N1 % 4 == 3 else 4 * N1


def _xi_parts(N: int, k: int):
    """Correction data (xi0, xi0 branch, eps, eps branch, k=2 term)."""
    dec = decompose_level(N)
    n1, n2 = dec.N1, dec.N2
    sgn = (-1) ** (k // 2)
    xi0 = Fraction(0)
    xi0_branch = "zero"
    if n1 == 1 and is_squarefree(n2):
        if n2 % 2:
            xi0 = mobius(n2) * (trace_full_closed(1, k) - Fraction(sgn, 4))
            xi0_branch = "N1=1 odd"
        else:
            xi0 = mobius(n2) * (
                trace_full_closed(1, k) - trace_full_closed(4, k) + Fraction(sgn, 4)
            )
            xi0_branch = "N1=1 even"
    elif n1 == 1 and n2 % 4 == 0 and (n2 // 4) % 2 and is_squarefree(n2 // 4):
        xi0 = mobius(n2 // 2) * (trace_full_closed(4, k) - Fraction(sgn, 2))
        xi0_branch = "N1=1 twice-even"
    elif n1 == 2 and is_squarefree(n2):
        xi0 = mobius(n2) * (trace_full_closed(2, k) - Fraction(sgn, 2))
        xi0_branch = "N1=2"
    elif n1 == 3 and is_squarefree(n2):
        xi0 = mobius(n2) * (trace_full_closed(3, k) - Fraction(2 * sgn, 3))
        xi0_branch = "N1=3"

    eps = 0
    eps_branch = "zero"
    if n1 == 1 and n2 % 2 and is_squarefree(n2):
        eps = -mobius(n2)
        eps_branch = "N1=1 odd"
    elif n1 == 1 and n2 % 4 == 0 and (n2 // 4) % 2 and is_squarefree(n2 // 4):
        eps = -mobius(n2 // 2)
        eps_branch = "N1=1 twice-even"
    elif n1 in (2, 3) and is_squarefree(n2):
        eps = -mobius(n2)
        eps_branch = "N1=2,3"

    delta_k2_term = (k == 2) * ((n2 == 1) + eps)
    return xi0, xi0_branch, eps, eps_branch, delta_k2_term


def correction_xi(N: int, k: int) -> Fraction:
    """xi(N, k) with tr W_N^new = (1/2)(-1)^(k/2) beta c h' + xi, any N."""
    _check_level(N)
    _check_weight(k)
    xi0, _, _, _, delta_k2_term = _xi_parts(N, k)
    return xi0 + delta_k2_term


def trace_new_closed(N: int, k: int) -> int:
    """tr W_N on the new subspace of S_k(Gamma0(N)), closed form."""
    _check_level(N)
    _check_weight(k)
    if N <= 3:
        # No square divisor > 1, so the new trace is the full trace.
        return trace_full_closed(N, k)
    if N == 4:
        return -(k // 12) - (1 if k % 12 in (6, 10) else 0)
    dec = decompose_level(N)
    n2 = dec.N2
    sgn = (-1) ** (k // 2)
    tag = case_tag(N)
    if tag is CaseTag.GENERIC:
        d_abs = _field_disc_abs(dec.N1)
        tr = (
            Fraction(sgn * beta(N) * c_coeff(-d_abs, n2), 2) * h_prime(-d_abs)
            + (k == 2) * (n2 == 1)
        )
    elif tag is CaseTag.SQUARE_ODD_ROOT:
        kappa = 1 if k % 12 == 2 else 0
        tr = (
            Fraction(sgn * (c_coeff(-4, n2) - mobius(n2)), 4)
            + mobius(n2) * (k // 12 - kappa)
            + (k == 2) * (n2 == 1)
        )
    elif tag is CaseTag.SQUARE_EVEN_ROOT:
        kappa = 1 if k % 12 in (6, 10) else 0
        tr = Fraction(sgn * (c_coeff(-4, n2) + mobius(n2)), 4) + mobius(n2) * (
            k // 12 + kappa
        )
    elif tag is CaseTag.SQUARE_TWICE_EVEN:
        tr = Fraction(sgn * c_coeff(-4, n2), 4) - Fraction(mobius(n2 // 2), 2)
    elif tag is CaseTag.TWICE_SQUARE:
        kappa = 1 if k % 8 in (0, 2) else -1
        tr = Fraction(sgn * (c_coeff(-8, n2) + kappa * mobius(n2)), 2) + (k == 2) * (
            n2 == 1
        )
    else:  # THRICE_SQUARE
        kappa = -2 if k % 12 in (4, 10) else 1
        half_beta_c = Fraction(beta(N) * c_coeff(-3, n2), 2)
        tr = Fraction(sgn, 3) * (half_beta_c + kappa * mobius(n2)) + (k == 2) * (
            n2 == 1
        )
    tr = Fraction(tr)
    if tr.denominator != 1:
        raise ArithmeticError(f"non-integral new trace at N={N}, k={k}: {tr}")
    return int(tr)


@dataclass(frozen=True)
class Corrections:
    """Correction terms of the new-trace closed form, with branch labels."""

    xi0: Fraction
    eps: int
    delta_k2_term: int
    xi0_branch: str
    eps_branch: str


@dataclass(frozen=True)
class TraceReport:
    N: int
    k: int
    tr_full: int
    tr_new: int
    delta: int
    case_tag: CaseTag
    corrections: Corrections


def trace_report(N: int, k: int) -> TraceReport:
    """Closed-form traces at (N, k), cross-checked before returning.

    The full trace must equal the sum of new traces over square
    divisors; a mismatch means a closed form is wrong, so it raises.
    """
    tr_full = trace_full_closed(N, k)
    tr_new = trace_new_closed(N, k)
    dec = decompose_level(N)
    recovered = sum(trace_new_closed(N // (q * q), k) for q in divisors(dec.N2))
    if recovered != tr_full:
        raise ArithmeticError(
            f"trace inversion mismatch at N={N}, k={k}: "
            f"full {tr_full} vs recombined {recovered}"
        )
    xi0, xi0_branch, eps, eps_branch, delta_k2_term = _xi_parts(N, k)
    return TraceReport(
        N=N,
        k=k,
        tr_full=tr_full,
        tr_new=tr_new,
        delta=(-1) ** (k // 2) * tr_new,
        case_tag=case_tag(N),
        corrections=Corrections(
            xi0=xi0,
            eps=eps,
            delta_k2_term=delta_k2_term,
            xi0_branch=xi0_branch,
            eps_branch=eps_branch,
        ),
    )
