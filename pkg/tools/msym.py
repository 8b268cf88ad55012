"""Modular symbols for Gamma0(N), trivial character, even weight.

Just enough machinery to decompose the new cuspidal subspace of a small
space into Hecke orbits and read off Fricke signs and Hecke eigenvalue
data. All linear algebra runs modulo several word-sized primes; integer
results are recovered by CRT against explicit coefficient bounds, and
every convention is pinned by dimension and eigenvalue anchors asserted
at build time, so a wrong sign or transpose cannot limp through.

Not a general-purpose package: no odd weights, no characters, dense
matrices everywhere, and levels beyond a few hundred are out of scope.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, gcd

import numpy as np

sys.path.insert(0, "src")

from rootbias.dims import dim_sk, dim_sk_new, dimension_breakdown


# ---------------------------------------------------------------------------
# P^1(Z/N) and SL2 lifts

def p1_reps(N: int):
    """Canonical representatives of P^1(Z/N) and a full lookup table."""
    if N == 1:
        return [(0, 1)], {(0, 0): 0}
    units = [u for u in range(1, N) if gcd(u, N) == 1]
    index: dict[tuple[int, int], int] = {}
    reps: list[tuple[int, int]] = []
    for c in range(N):
        for d in range(N):
            if (c, d) in index or gcd(gcd(c, d), N) != 1:
                continue
            orbit = {((u * c) % N, (u * d) % N) for u in units}
            pos = len(reps)
            reps.append(min(orbit))
            for pair in orbit:
                index[pair] = pos
    return reps, index


def sl2_lift(N: int, c: int, d: int):
    """An integer matrix [[a, b], [c0, d0]] in SL2(Z) with bottom row
    congruent to (c, d) mod N."""
    if N == 1:
        return [[1, 0], [0, 1]]
    c0 = c % N
    d0 = d % N
    if c0 == 0 and gcd(d0, N) == 1 and d0 != 0:
        c0 = N
    if c0 == 0 and d0 == 0:
        raise ValueError("not a projective point")
    for t in range(4 * N + 4):
        if gcd(c0, d0 + t * N) == 1:
            d0 += t * N
            break
    else:
        raise ArithmeticError(f"no lift for ({c}, {d}) mod {N}")
    # a*d0 - b*c0 = 1 by extended euclid
    a, b = _bezout(d0, c0)
    assert a * d0 - b * c0 == 1
    return [[a, b], [c0, d0]]


def _bezout(x: int, y: int):
    """(a, b) with a*x + b*(-y)... returns (a, b) such that a*x - b*y == 1."""
    old_r, r = x, y
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r == 1:
        return old_s, -old_t
    if old_r == -1:
        return -old_s, old_t
    raise ArithmeticError(f"gcd({x}, {y}) != 1")


def mat_mul(A, B):
    return [
        [A[0][0] * B[0][0] + A[0][1] * B[1][0], A[0][0] * B[0][1] + A[0][1] * B[1][1]],
        [A[1][0] * B[0][0] + A[1][1] * B[1][0], A[1][0] * B[0][1] + A[1][1] * B[1][1]],
    ]


# ---------------------------------------------------------------------------
# Degree-m polynomial transforms, exact integer coefficients

def poly_transform(coeffs, m: int, a: int, b: int, c: int, d: int):
    """Coefficients of P(aX + bY, cX + dY) where P has coefficient
    coeffs[i] on X^i Y^(m-i)."""
    out = [0] * (m + 1)
    for i, coeff in enumerate(coeffs):
        if not coeff:
            continue
        f1 = [comb(i, t) * a**t * b ** (i - t) for t in range(i + 1)]
        f2 = [comb(m - i, s) * c**s * d ** (m - i - s) for s in range(m - i + 1)]
        for t, v1 in enumerate(f1):
            if not v1:
                continue
            for s, v2 in enumerate(f2):
                out[t + s] += coeff * v1 * v2
    return out


# ---------------------------------------------------------------------------
# Cusps

def cusp_normalize(num: int, den: int):
    if den == 0:
        return (1, 0)
    g = gcd(num, den)
    num //= g
    den //= g
    if den < 0:
        num, den = -num, -den
    return (num, den)


def cusps_equivalent(N: int, u, v) -> bool:
    """Gamma0(N)-equivalence of cusps given in lowest terms."""
    (p1, q1), (p2, q2) = u, v
    if q1 == 0 or q2 == 0:
        if q1 == 0 and q2 == 0:
            return True
        q = q2 if q1 == 0 else q1
        return q % N == 0
    s1 = pow(p1, -1, q1) if q1 > 1 else 0
    s2 = pow(p2, -1, q2) if q2 > 1 else 0
    g = gcd(q1 * q2, N)
    return (s1 * q2 - s2 * q1) % g == 0


# ---------------------------------------------------------------------------
# The Manin symbol space

S_MAT = [[0, -1], [1, 0]]
T_MAT = [[0, -1], [1, -1]]
ETA_MAT = [[-1, 0], [0, 1]]


def _prime_divisors(n: int):
    out = []
    q = 2
    while q * q <= n:
        if n % q == 0:
            out.append(q)
            while n % q == 0:
                n //= q
        q += 1
    if n > 1:
        out.append(n)
    return out


def _p1_mul(pair, M, N):
    c, d = pair
    return ((c * M[0][0] + d * M[1][0]) % N, (c * M[0][1] + d * M[1][1]) % N)


@dataclass
class Space:
    N: int
    k: int
    reps: list = field(repr=False)
    index: dict = field(repr=False)
    lifts: list = field(repr=False)
    relations: np.ndarray = field(repr=False)
    boundary: np.ndarray = field(repr=False)
    cusp_reps: list = field(repr=False)

    @property
    def m(self) -> int:
        return self.k - 2

    @property
    def n_p1(self) -> int:
        return len(self.reps)

    @property
    def ngens(self) -> int:
        return (self.m + 1) * self.n_p1

    def gen_id(self, i: int, x: int) -> int:
        return i * self.n_p1 + x

    def p1_index(self, c: int, d: int) -> int:
        if self.N == 1:
            return 0
        return self.index[(c % self.N, d % self.N)]


def build_space(N: int, k: int) -> Space:
    if k < 2 or k % 2:
        raise ValueError("even weight >= 2 only")
    reps, index = p1_reps(N)
    lifts = [sl2_lift(N, c, d) for (c, d) in reps]
    m = k - 2
    n_p1 = len(reps)
    ngens = (m + 1) * n_p1

    sp = Space(N, k, reps, index, lifts, None, None, None)

    # relations: x + xS = 0 and x + xT + xT^2 = 0, with the polynomial
    # part carried along by substitution
    rows = []
    t2 = mat_mul(T_MAT, T_MAT)
    for x, pair in enumerate(reps):
        xs = sp.p1_index(*_p1_mul(pair, S_MAT, N)) if N > 1 else 0
        xt = sp.p1_index(*_p1_mul(pair, T_MAT, N)) if N > 1 else 0
        xt2 = sp.p1_index(*_p1_mul(pair, t2, N)) if N > 1 else 0
        for i in range(m + 1):
            mono = [0] * (m + 1)
            mono[i] = 1
            row = np.zeros(ngens, dtype=np.int64)
            row[sp.gen_id(i, x)] += 1
            # P(Y, -X) attached to xS
            for j, cf in enumerate(poly_transform(mono, m, 0, 1, -1, 0)):
                row[sp.gen_id(j, xs)] += cf
            rows.append(row)
            row = np.zeros(ngens, dtype=np.int64)
            row[sp.gen_id(i, x)] += 1
            # P(-Y, X - Y) at xT, P(Y - X, -X) at xT^2
            for j, cf in enumerate(poly_transform(mono, m, 0, -1, 1, -1)):
                row[sp.gen_id(j, xt)] += cf
            for j, cf in enumerate(poly_transform(mono, m, -1, 1, -1, 0)):
                row[sp.gen_id(j, xt2)] += cf
            rows.append(row)
    sp.relations = np.array(rows, dtype=np.int64)

    # boundary: gen (P, g) sends X^m to the class of g(inf), Y^m to g(0)
    cusp_reps: list[tuple[int, int]] = []

    def cusp_class(num, den):
        cu = cusp_normalize(num, den)
        for idx, known in enumerate(cusp_reps):
            if cusps_equivalent(N, known, cu):
                return idx
        cusp_reps.append(cu)
        return len(cusp_reps) - 1

    binf = np.zeros(n_p1, dtype=np.int64)
    bzero = np.zeros(n_p1, dtype=np.int64)
    for x, g in enumerate(lifts):
        binf[x] = cusp_class(g[0][0], g[1][0])
        bzero[x] = cusp_class(g[0][1], g[1][1])
    boundary = np.zeros((ngens, len(cusp_reps)), dtype=np.int64)
    for x in range(n_p1):
        boundary[sp.gen_id(m, x), binf[x]] += 1
        boundary[sp.gen_id(0, x), bzero[x]] -= 1
        if m == 0:
            # weight 2: X^m and Y^m are the same generator
            pass
    sp.boundary = boundary
    sp.cusp_reps = cusp_reps

    expected_p1 = N
    for q in _prime_divisors(N):
        expected_p1 += expected_p1 // q
    assert n_p1 == expected_p1, (N, n_p1, expected_p1)
    nu_inf = dimension_breakdown(N, 2).nu_inf
    assert len(cusp_reps) == nu_inf, (N, len(cusp_reps), nu_inf)
    # relations must die on the boundary
    assert not (sp.relations @ boundary).any(), (N, k)
    return sp


# ---------------------------------------------------------------------------
# Unimodular path decomposition

def _unimodular_terms(x):
    """SL2(Z) matrices g_j with {inf, x} = sum of g_j {0, inf}; x is a
    Fraction, or None for infinity (empty path)."""
    if x is None:
        return []
    num, den = x.numerator, x.denominator
    cf = []
    a, b = num, den
    while b:
        q, r = divmod(a, b)
        cf.append(q)
        a, b = b, r
    terms = []
    p_prev, q_prev = 1, 0
    p_cur, q_cur = cf[0], 1
    sign = -1
    terms.append([[p_cur, sign * p_prev], [q_cur, sign * q_prev]])
    for j in range(1, len(cf)):
        p_nxt = cf[j] * p_cur + p_prev
        q_nxt = cf[j] * q_cur + q_prev
        sign = -sign
        terms.append([[p_nxt, sign * p_cur], [q_nxt, sign * q_cur]])
        p_prev, q_prev, p_cur, q_cur = p_cur, q_cur, p_nxt, q_nxt
    assert (p_cur, q_cur) == (num, den), x
    for g in terms:
        assert g[0][0] * g[1][1] - g[0][1] * g[1][0] == 1
    return terms


def symbol_to_vector(sp: Space, coeffs, alpha, beta):
    """Express the symbol P{alpha, beta} as a dict over generators.

    coeffs are the coefficients of P, endpoints are Fractions or None
    for infinity.
    """
    out: dict[int, int] = {}

    def add_path(x, factor):
        for g in _unimodular_terms(x):
            (a, b), (c, d) = g
            pcs = poly_transform(coeffs, sp.m, a, b, c, d)
            xi = sp.p1_index(c, d)
            for i, cf in enumerate(pcs):
                if cf:
                    gid = sp.gen_id(i, xi)
                    out[gid] = out.get(gid, 0) + factor * cf
    add_path(beta, 1)
    add_path(alpha, -1)
    return {g: v for g, v in out.items() if v}


def _mat_image(M, col):
    """Image of 0 (col=1) or inf (col=0) under an integer matrix."""
    num, den = M[0][col], M[1][col]
    if den == 0:
        return None
    return Fraction(num, den)


def apply_matrix(src: Space, dst: Space, mats) -> list[dict[int, int]]:
    """The operator sum over A in mats of (symbol -> A . symbol), encoded
    as columns over src generators with values: dict over dst generators.

    dst may be a space of lower level (degeneracy) or src itself.
    """
    cols = []
    for x in range(src.n_p1):
        g = src.lifts[x]
        for i in range(src.m + 1):
            mono = [0] * (src.m + 1)
            mono[i] = 1
            acc: dict[int, int] = {}
            for A in mats:
                B = mat_mul(A, g)
                det = B[0][0] * B[1][1] - B[0][1] * B[1][0]
                assert det != 0
                # (B . P)(X, Y) = P(adj(B)(X, Y))
                q = poly_transform(
                    mono, src.m, B[1][1], -B[0][1], -B[1][0], B[0][0]
                )
                vec = symbol_to_vector(dst, q, _mat_image(B, 1), _mat_image(B, 0))
                for gid, v in vec.items():
                    acc[gid] = acc.get(gid, 0) + v
            cols.append((src.gen_id(i, x), {g2: v for g2, v in acc.items() if v}))
    ordered = [None] * src.ngens
    for gid, col in cols:
        ordered[gid] = col
    return ordered


def hecke_mats(p: int, N: int):
    if N % p == 0:
        return [[[1, r], [0, p]] for r in range(p)]
    return [[[p, 0], [0, 1]]] + [[[1, r], [0, p]] for r in range(p)]


def fricke_mat(N: int):
    return [[0, -1], [N, 0]]


def degeneracy_mats(d: int):
    return [[[d, 0], [0, 1]]]


# ---------------------------------------------------------------------------
# Linear algebra mod p (dense int64; p must stay below 2^25.5)

def rref_mod(M: np.ndarray, p: int):
    M = np.array(M % p, dtype=np.int64)
    rows, cols = M.shape
    r = 0
    pivots = []
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(M[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            M[[r, piv]] = M[[piv, r]]
        inv = pow(int(M[r, c]), p - 2, p)
        M[r] = (M[r] * inv) % p
        col = M[:, c].copy()
        col[r] = 0
        nzr = np.nonzero(col)[0]
        if nzr.size:
            M[nzr] = (M[nzr] - np.outer(col[nzr], M[r])) % p
        pivots.append(c)
        r += 1
    return M[: len(pivots)], pivots


def kernel_mod(M: np.ndarray, p: int) -> np.ndarray:
    """Columns spanning the right kernel of M mod p."""
    R, pivots = rref_mod(M, p)
    cols = M.shape[1]
    free = [c for c in range(cols) if c not in set(pivots)]
    basis = np.zeros((cols, len(free)), dtype=np.int64)
    for j, f in enumerate(free):
        basis[f, j] = 1
        for r, c in enumerate(pivots):
            basis[c, j] = (-int(R[r, f])) % p
    return basis


def solve_in_span(B: np.ndarray, Y: np.ndarray, p: int) -> np.ndarray:
    """X with B @ X = Y mod p; B must have full column rank and Y must
    lie in its span (asserted)."""
    n, d = B.shape
    aug = np.concatenate([B, Y], axis=1) % p
    R, pivots = rref_mod(aug, p)
    assert len(pivots) == d and pivots == list(range(d)), "span violation"
    return R[:d, d:]


def charpoly_mod(A: np.ndarray, p: int) -> list[int]:
    """Characteristic polynomial coefficients [1, c1, ..., cn] mod p by
    Faddeev-LeVerrier (p far exceeds the matrix size)."""
    n = A.shape[0]
    coeffs = [1]
    B = np.eye(n, dtype=np.int64)
    for m in range(1, n + 1):
        M = (A @ B) % p
        c = (-sum(int(M[i, i]) for i in range(n)) * pow(m, p - 2, p)) % p
        coeffs.append(c)
        B = M + c * np.eye(n, dtype=np.int64)
        B %= p
    return coeffs


def poly_eval_matrix(coeffs, A: np.ndarray, p: int) -> np.ndarray:
    """Evaluate a monic integer polynomial at the matrix A, mod p."""
    n = A.shape[0]
    out = np.zeros((n, n), dtype=np.int64)
    for c in coeffs:
        out = (out @ A) % p
        out += (int(c) % p) * np.eye(n, dtype=np.int64)
        out %= p
    return out


# ---------------------------------------------------------------------------
# CRT recovery

def crt_int(residues, primes) -> int:
    """Symmetric-range CRT lift."""
    x, mod = 0, 1
    for r, p in zip(residues, primes):
        t = ((r - x) * pow(mod, -1, p)) % p
        x += mod * t
        mod *= p
    if x > mod // 2:
        x -= mod
    return x


def crt_poly(per_prime_coeffs, primes, bound: int):
    prod = 1
    for p in primes:
        prod *= p
    assert prod > 2 * bound + 2, "not enough primes for the coefficient bound"
    deg = len(per_prime_coeffs[0])
    out = []
    for j in range(deg):
        out.append(crt_int([cs[j] for cs in per_prime_coeffs], primes))
    return out

# ---------------------------------------------------------------------------
# Per-prime quotient pipeline

def reduce_operator(op, ngens_dst: int, p: int) -> np.ndarray:
    """Dense (ngens_dst x ngens_src) int64 matrix of a sparse operator."""
    M = np.zeros((ngens_dst, len(op)), dtype=np.int64)
    for src, col in enumerate(op):
        for dst, v in col.items():
            M[dst, src] = v % p
    return M


@dataclass
class SpaceModP:
    space: Space
    p: int
    proj: np.ndarray = field(repr=False)       # nfree x ngens
    sect: np.ndarray = field(repr=False)       # ngens x nfree
    free_dim: int = 0

    def quotient_op(self, op_sparse, src: "SpaceModP" = None) -> np.ndarray:
        src = src or self
        M = reduce_operator(op_sparse, self.space.ngens, self.p)
        return (self.proj @ ((M @ src.sect) % self.p)) % self.p

    def class_of(self, vec_sparse: dict) -> np.ndarray:
        v = np.zeros(self.space.ngens, dtype=np.int64)
        for g, cf in vec_sparse.items():
            v[g] = cf % self.p
        return (self.proj @ v) % self.p


def space_mod_p(sp: Space, p: int) -> SpaceModP:
    R, pivots = rref_mod(sp.relations, p)
    free = [c for c in range(sp.ngens) if c not in set(pivots)]
    nfree = len(free)
    proj = np.zeros((nfree, sp.ngens), dtype=np.int64)
    for j, f in enumerate(free):
        proj[j, f] = 1
    for r, c in enumerate(pivots):
        proj[:, c] = (-R[r, free]) % p
    sect = np.zeros((sp.ngens, nfree), dtype=np.int64)
    for j, f in enumerate(free):
        sect[f, j] = 1
    expected = 2 * dim_sk(sp.N, sp.k) + dimension_breakdown(sp.N, 2).nu_inf
    if sp.k == 2:
        expected -= 1
    assert nfree == expected, (sp.N, sp.k, p, nfree, expected)
    return SpaceModP(sp, p, proj, sect, nfree)


def cuspidal_basis(smp: SpaceModP) -> np.ndarray:
    sp, p = smp.space, smp.p
    K = (sp.boundary.T @ smp.sect) % p
    basis = kernel_mod(K, p)
    assert basis.shape[1] == 2 * dim_sk(sp.N, sp.k), (sp.N, sp.k, basis.shape)
    return basis


def restrict(op_q: np.ndarray, basis: np.ndarray, p: int) -> np.ndarray:
    return solve_in_span(basis, (op_q @ basis) % p, p)


# ---------------------------------------------------------------------------
# Full decomposition of the new cuspidal subspace

PRIME_BITS_CAP = 1 << 25


def working_primes(count: int):
    from sympy import prevprime

    out = []
    q = PRIME_BITS_CAP
    for _ in range(count):
        q = prevprime(q)
        out.append(int(q))
    return out


@dataclass
class Orbit:
    dim: int
    fricke: int
    charpolys: dict  # p -> monic integer coefficient list [1, ...]

    def ap_trace(self, p: int) -> int:
        return -self.charpolys[p][1] if p in self.charpolys else None


def hecke_bound_poly(dim: int, p: int, k: int) -> int:
    """Coefficient bound for the characteristic polynomial of T_p on a
    rational orbit of the given dimension."""
    root = 2 * isqrt_ceil(p ** (k - 1))
    return max(comb(dim, j) * root**j for j in range(dim + 1))


def isqrt_ceil(n: int) -> int:
    from math import isqrt

    r = isqrt(n)
    return r if r * r == n else r + 1


class Decomposition:
    """Hecke orbits of the new cuspidal subspace, with Fricke signs."""

    def __init__(self, N: int, k: int, hecke_ps, lower_levels=(), nprimes=6,
                 verbose=True):
        self.N, self.k = N, k
        self.verbose = verbose
        self.space = build_space(N, k)
        self.hecke_ps = [p for p in hecke_ps if N % p]
        self.lower = {}
        for M in lower_levels:
            self.lower[M] = build_space(M, k)
        self._log(f"[{N},{k}] gens={self.space.ngens} "
                  f"cusps={len(self.space.cusp_reps)}")

        # p-independent integer operators
        self.ops = {}
        sp = self.space
        for p in self.hecke_ps:
            self.ops[f"T{p}"] = apply_matrix(sp, sp, hecke_mats(p, N))
        self.ops["W"] = apply_matrix(sp, sp, [fricke_mat(N)])
        self.ops["eta"] = apply_matrix(sp, sp, [ETA_MAT])
        self.deg_ops = {}
        for M, lsp in self.lower.items():
            d = N // M
            self.deg_ops[(M, 1)] = apply_matrix(sp, lsp, degeneracy_mats(1))
            self.deg_ops[(M, d)] = apply_matrix(sp, lsp, degeneracy_mats(d))

        dim_new = dim_sk_new(N, k)
        self.dim_new = dim_new
        self.primes = working_primes(nprimes + 2)
        per_prime = {}
        for p in self.primes:
            per_prime[p] = self._decompose_mod(p)
        self.per_prime = per_prime

        # separate orbits by a Hecke combination whose charpoly on the
        # star-fixed new subspace is squarefree
        self.combo, self.orbit_factors = self._find_separator()
        self.orbits = self._assemble_orbits()
        total = sum(o.dim for o in self.orbits)
        assert total == dim_new, (total, dim_new)

    def _log(self, msg):
        if self.verbose:
            print(msg, flush=True)

    def _primes_for_bound(self, bound: int):
        prod, use = 1, []
        for p in self.primes:
            use.append(p)
            prod *= p
            if prod > 2 * bound + 2:
                return use
        raise AssertionError("prime list exhausted; raise nprimes")

    def _decompose_mod(self, p: int):
        sp = self.space
        smp = space_mod_p(sp, p)
        cusp = cuspidal_basis(smp)

        # well-definedness of the quotient action, checked once per prime
        for name in ("W", f"T{self.hecke_ps[0]}"):
            M = reduce_operator(self.ops[name], sp.ngens, p)
            lhs = (smp.proj @ M) % p
            rhs = (((smp.proj @ M) % p @ smp.sect) % p @ smp.proj) % p
            assert (lhs == rhs).all(), (name, p)

        # identity roundtrip: converting each generator's own symbol back
        # through the path decomposition must be a no-op on the quotient
        if p == self.primes[0]:
            ident = apply_matrix(sp, sp, [[[1, 0], [0, 1]]])
            for g, col in enumerate(ident):
                got = smp.class_of(col)
                want = smp.proj[:, g] % p
                assert (got == want).all(), ("roundtrip", g)

        # new subspace: intersection of degeneracy kernels inside cuspidal
        if self.deg_ops:
            lsmps = {M: space_mod_p(lsp, p) for M, lsp in self.lower.items()}
            stacks = []
            for (M, d), op in self.deg_ops.items():
                Dq = lsmps[M].quotient_op(op, src=smp)
                stacks.append((Dq @ cusp) % p)
            stacked = np.concatenate(stacks, axis=0)
            z = kernel_mod(stacked, p)
            new_basis = (cusp @ z) % p
        else:
            new_basis = cusp
        assert new_basis.shape[1] == 2 * self.dim_new, (p, new_basis.shape)

        # star involution: keep the +1 eigenspace
        eta_q = smp.quotient_op(self.ops["eta"])
        eta_res = restrict(eta_q, new_basis, p)
        n2 = eta_res.shape[0]
        assert (((eta_res @ eta_res) % p) == np.eye(n2, dtype=np.int64)).all()
        plus = kernel_mod((eta_res - np.eye(n2, dtype=np.int64)) % p, p)
        v_basis = (new_basis @ plus) % p
        assert v_basis.shape[1] == self.dim_new, (p, v_basis.shape)

        w_q = smp.quotient_op(self.ops["W"])
        w_v = restrict(w_q, v_basis, p)
        d = self.dim_new
        scale = pow(self.N, self.k - 2, p)
        assert (((w_v @ w_v) % p) == scale * np.eye(d, dtype=np.int64) % p).all()

        t_v = {}
        for q in self.hecke_ps:
            tq = smp.quotient_op(self.ops[f"T{q}"])
            t_v[q] = restrict(tq, v_basis, p)
        # Hecke operators commute with each other and with W
        q0 = self.hecke_ps[0]
        for q in self.hecke_ps[1:2]:
            a, b = t_v[q0], t_v[q]
            assert (((a @ b) % p) == ((b @ a) % p)).all(), (q0, q, p)
        assert (((t_v[q0] @ w_v) % p) == ((w_v @ t_v[q0]) % p)).all()

        return {"smp": smp, "v": v_basis, "w": w_v, "t": t_v}

    def _combo_mod(self, combo, p: int) -> np.ndarray:
        data = self.per_prime[p]
        A = np.zeros((self.dim_new, self.dim_new), dtype=np.int64)
        for q, c in combo.items():
            A += c * data["t"][q]
        return A % p

    def _find_separator(self):
        """A small integer combination of Hecke operators with squarefree
        characteristic polynomial on the star-fixed new subspace. Kernels
        of its irreducible factors are then stable under everything that
        commutes with it, and an irreducible charpoly of full degree on a
        kernel leaves no room for a proper invariant subspace, so the
        factors cut out exactly the rational orbits."""
        import sympy

        q0 = self.hecke_ps[0]
        candidates = [{q0: 1}]
        if len(self.hecke_ps) > 1:
            q1 = self.hecke_ps[1]
            for c in (1, 2, 3, 4, 5):
                candidates.append({q0: 1, q1: c})
                candidates.append({q0: c + 1, q1: 1})
        x = sympy.Symbol("x")
        for combo in candidates:
            root = 2 * sum(c * isqrt_ceil(q ** (self.k - 1))
                           for q, c in combo.items())
            bound = max(comb(self.dim_new, j) * root**j
                        for j in range(self.dim_new + 1))
            try:
                use = self._primes_for_bound(bound)
            except AssertionError:
                continue
            per = [charpoly_mod(self._combo_mod(combo, p), p) for p in use]
            exact = crt_poly(per, use, bound)
            for p in self.primes:
                got = charpoly_mod(self._combo_mod(combo, p), p)
                assert [c % p for c in exact] == got, (combo, p)
            poly = sympy.Poly(exact, x)
            if sympy.gcd(poly, poly.diff(x)).degree() > 0:
                self._log(f"  separator {combo} not squarefree, trying next")
                continue
            _, factors = poly.factor_list()
            out = []
            for f, mult in factors:
                assert mult == 1
                cs = [int(c) for c in f.all_coeffs()]
                assert cs[0] == 1
                out.append(cs)
            out.sort(key=lambda cs: (len(cs), cs))
            self._log(f"  separator {combo}: orbit dims "
                      f"{[len(cs) - 1 for cs in out]}")
            return combo, out
        raise AssertionError(f"no separating Hecke combination at {self.N}")

    def _assemble_orbits(self):
        orbits = []
        sqrt_scale = self.N ** ((self.k - 2) // 2)
        for f_coeffs in self.orbit_factors:
            deg = len(f_coeffs) - 1
            per_prime_chars = {q: [] for q in self.hecke_ps}
            fricke = None
            for p in self.primes:
                data = self.per_prime[p]
                E = kernel_mod(poly_eval_matrix(f_coeffs, self._combo_mod(self.combo, p), p), p)
                assert E.shape[1] == deg, (p, f_coeffs, E.shape)
                w_e = restrict(data["w"], E, p)
                diag = int(w_e[0, 0])
                assert ((w_e - diag * np.eye(deg, dtype=np.int64)) % p == 0).all(), \
                    "Fricke not scalar on an orbit"
                plus, minus = sqrt_scale % p, (-sqrt_scale) % p
                assert diag in (plus, minus), (p, diag)
                w_sign = 1 if diag == plus else -1
                if fricke is None:
                    fricke = w_sign
                assert fricke == w_sign, "Fricke sign drifted across primes"
                for q in self.hecke_ps:
                    per_prime_chars[q].append(charpoly_mod(restrict(data["t"][q], E, p), p))
            charpolys = {}
            for q in self.hecke_ps:
                bound = hecke_bound_poly(deg, q, self.k)
                use = self._primes_for_bound(bound)
                idxs = [self.primes.index(p) for p in use]
                exact = crt_poly([per_prime_chars[q][i] for i in idxs], use, bound)
                for i, p in enumerate(self.primes):
                    assert [c % p for c in exact] == per_prime_chars[q][i], (q, p)
                charpolys[q] = exact
            orbits.append(Orbit(deg, fricke, charpolys))
        # deterministic order: dimension, then T2 coefficient data
        q0 = self.hecke_ps[0]
        orbits.sort(key=lambda o: (o.dim, o.charpolys[q0]))
        return orbits

    def fricke_trace(self) -> int:
        return sum(o.dim * o.fricke for o in self.orbits)
