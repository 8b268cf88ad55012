"""Root-number bias delta(N, k) and the classification of its zeros.

delta(N, k) = dim+ - dim- counts newforms in S_k^new(Gamma0(N)) by the
sign of their functional equation: (-1)^(k/2) times the new-subspace
Fricke trace. The headline facts encoded here: the bias is nonnegative
away from the cubefree-square levels, and its zeros fall into a short
list of families.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from rootbias.arith import decompose_level, factor, is_squarefree, kronecker, mobius
from rootbias.dims import dim_sk, dim_sk_new
from rootbias.trace import trace_new_closed

__all__ = [
    "BiasRecord",
    "SignPrediction",
    "ZeroClass",
    "bias_record",
    "classify_zero",
    "delta",
    "delta_prime",
    "minimal_balance",
    "refined_dims",
    "scan_negative",
    "sign_prediction_large_k",
]


def delta(N: int, k: int) -> int:
    """dim+ minus dim- on the new subspace at level N, weight k."""
    return (-1) ** (k // 2) * trace_new_closed(N, k)


def refined_dims(N: int, k: int) -> tuple[int, int]:
    """(dim+, dim-) of the refined new subspaces, exact and nonnegative."""
    dim_new = dim_sk_new(N, k)
    d = delta(N, k)
    if (dim_new + d) % 2:
        raise ArithmeticError(
            f"parity violation at N={N}, k={k}: dim {dim_new}, delta {d}"
        )
    plus, minus = (dim_new + d) // 2, (dim_new - d) // 2
    if plus < 0 or minus < 0:
        raise ArithmeticError(
            f"|delta| exceeds dimension at N={N}, k={k}: dim {dim_new}, delta {d}"
        )
    return plus, minus


class ZeroClass(str, Enum):
    """Families of (N, k) with delta = 0, checked in declaration order."""

    DIM_ZERO = "DimZero"
    K2_37_58 = "K2_37_58"
    SEVEN_MOD8_TWO_EXACTLY = "SevenMod8_TwoExactly"
    LEVEL16_K2MOD4 = "Level16_K2mod4"
    LEVEL2_FAMILY = "Level2Family"
    LEVEL3_FAMILY = "Level3Family"
    SQUARE_SPORADIC = "SquareSporadic"


def classify_zero(N: int, k: int):
    """Predict from the classification tables whether delta(N, k) = 0,
    returning the first matching family or None.

    Never computes delta itself; the acceptance suite checks that the
    returned families and the actual zero set coincide on its grid.
    For cubefree-square levels the table is complete only for weights
    k <= 14; higher weights have further sporadic zeros there (the
    first is N = 9, k = 12).
    """
    if dim_sk_new(N, k) == 0:
        return ZeroClass.DIM_ZERO
    if k == 2 and N in (37, 58):
        return ZeroClass.K2_37_58
    dec = decompose_level(N)
    if dec.N1 % 8 == 7 and dec.N2 % 2 == 0 and dec.N2 % 4:
        return ZeroClass.SEVEN_MOD8_TWO_EXACTLY
    if N == 16 and k % 4 == 2:
        return ZeroClass.LEVEL16_K2MOD4
    if (
        (N in (8, 18) and k % 8 in (0, 2))
        or (N in (2, 72) and k % 8 in (4, 6))
        or (N, k) == (2, 2)
    ):
        return ZeroClass.LEVEL2_FAMILY
    if (
        (N in (3, 108) and k % 12 in (4, 10))
        or (N == 12 and k % 12 not in (4, 10))
        or (N, k) == (3, 2)
    ):
        return ZeroClass.LEVEL3_FAMILY
    if N in (36, 100) and k in (6, 10, 14):
        return ZeroClass.SQUARE_SPORADIC
    return None


@dataclass(frozen=True)
class SignPrediction:
    """For a cubefree square N = M**2: sign delta(N, k) = (-1)^(k/2) mu(M)
    for every even k >= threshold_k (verified by scan up to scan_limit)."""

    N: int
    mu: int
    threshold_k: int
    scan_limit: int

    def predicted_sign(self, k: int) -> int:
        return (-1) ** (k // 2) * self.mu


_SCAN_LIMIT = 240


def sign_prediction_large_k(N: int, scan_limit: int = _SCAN_LIMIT):
    """Large-weight sign law at a cubefree square level, else None.

    The threshold is found empirically: the smallest even k0 such that
    delta is nonzero with the predicted sign for every even k in
    [k0, scan_limit]. Returns None if even scan_limit itself fails.
    """
    dec = decompose_level(N)
    if dec.N1 != 1 or not is_squarefree(dec.N2):
        return None
    mu = mobius(dec.N2)
    last_bad = 0
    for k in range(2, scan_limit + 1, 2):
        d = delta(N, k)
        if d == 0 or (d > 0) != ((-1) ** (k // 2) * mu > 0):
            last_bad = k
    if last_bad == scan_limit:
        return None
    return SignPrediction(N=N, mu=mu, threshold_k=last_bad + 2, scan_limit=scan_limit)


@dataclass(frozen=True)
class BiasRecord:
    N: int
    k: int
    delta: int
    dim_plus: int
    dim_minus: int
    zero_class: ZeroClass | None = None
    predicted_sign_large_k: SignPrediction | None = None


def bias_record(N: int, k: int, predict: bool = False) -> BiasRecord:
    plus, minus = refined_dims(N, k)
    d = plus - minus
    return BiasRecord(
        N=N,
        k=k,
        delta=d,
        dim_plus=plus,
        dim_minus=minus,
        zero_class=classify_zero(N, k) if d == 0 else None,
        predicted_sign_large_k=sign_prediction_large_k(N) if predict else None,
    )


def delta_prime(N: int, k: int) -> int:
    """Bias with quadratic twists of level-1 forms removed.

    Defined for N = M**2 with M > 1 squarefree. For even M nothing can
    be a twist from level 1, so delta' = delta; for odd M the twisted
    forms contribute prod_{p | M} (-1 | p) * dim S_k(1).
    """
    dec = decompose_level(N)
    if dec.N1 != 1 or dec.N2 == 1 or not is_squarefree(dec.N2):
        raise ValueError(f"delta_prime needs N = M**2 with M > 1 squarefree, got {N}")
    m = dec.N2
    d = delta(N, k)
    if m % 2 == 0:
        return d
    chi = 1
    for p, _ in factor(m).pairs:
        chi *= kronecker(-1, p)
    return d - chi * dim_sk(1, k)


def minimal_balance(N: int) -> bool:
    """True when some twist forces the minimal-newform root numbers at
    level N to balance: an odd prime p with p**2 exactly dividing N and
    (-N/p**2 | p) = 1."""
    if N < 1:
        raise ValueError(f"level must be a positive integer, got {N}")
    for p, e in factor(N).pairs:
        if p > 2 and e == 2 and kronecker(-(N // (p * p)), p) == 1:
            return True
    return False


def scan_negative(n_max: int, k_max: int) -> list[tuple[int, int, int]]:
    """All (N, k, delta) with delta < 0, N <= n_max, even k <= k_max,
    in lexicographic (N, k) order."""
    out = []
    for N in range(1, n_max + 1):
        for k in range(2, k_max + 1, 2):
            d = delta(N, k)
            if d < 0:
                out.append((N, k, d))
    return out
