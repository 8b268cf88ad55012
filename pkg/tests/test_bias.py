"""Bias values, refined dimensions, zero classification, square levels.

The zero classification is predicate-only by design; the grid tests
here close the loop both ways: every predicted zero is a zero, every
zero is predicted.
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rootbias.arith import decompose_level, factor, is_squarefree, kronecker, mobius
from rootbias.bias import (
    BiasRecord,
    ZeroClass,
    bias_record,
    classify_zero,
    delta,
    delta_prime,
    minimal_balance,
    refined_dims,
    scan_negative,
    sign_prediction_large_k,
)
from rootbias.classnum import h_prime, warm_cache
from rootbias.dims import dim_sk, dim_sk_new
from rootbias.trace import _field_disc_abs, beta, c_coeff, case_tag, CaseTag

GRID_N = 400


@pytest.fixture(scope="module", autouse=True)
def _warm():
    warm_cache(4 * GRID_N)


def test_delta_point_values():
    assert delta(37, 2) == 0
    assert delta(58, 2) == 0
    assert delta(49, 14) == 2
    assert delta(9, 10) == 1
    assert delta(45, 2) == 1
    assert delta(11, 2) == 1
    for k in range(12, 50, 4):
        assert delta(4, k) == -(k // 12) < 0


def test_delta_level_one_alternates_with_dimension():
    for k in range(2, 80, 2):
        assert delta(1, k) == (-1) ** (k // 2) * dim_sk(1, k)


def test_refined_dims_invariants():
    for N in range(1, GRID_N + 1):
        for k in (2, 4, 6, 10, 14, 18):
            plus, minus = refined_dims(N, k)
            d = delta(N, k)
            n = dim_sk_new(N, k)
            assert plus + minus == n, (N, k)
            assert plus - minus == d, (N, k)
            assert plus >= 0 and minus >= 0, (N, k)
            # parity: the bias and the new dimension agree mod 2
            assert (d - n) % 2 == 0, (N, k)
            assert abs(d) <= n, (N, k)


def test_refined_dims_point_values():
    assert refined_dims(49, 14) == (22, 20)
    assert refined_dims(37, 2) == (1, 1)
    assert refined_dims(9, 10) == (2, 1)
    assert refined_dims(1, 18) == (0, 1)


def test_zero_classification_point_values():
    assert classify_zero(1, 4) is ZeroClass.DIM_ZERO
    assert classify_zero(37, 2) is ZeroClass.K2_37_58
    assert classify_zero(58, 2) is ZeroClass.K2_37_58
    assert classify_zero(28, 4) is ZeroClass.SEVEN_MOD8_TWO_EXACTLY
    assert classify_zero(16, 6) is ZeroClass.LEVEL16_K2MOD4
    assert classify_zero(8, 8) is ZeroClass.LEVEL2_FAMILY
    assert classify_zero(2, 20) is ZeroClass.LEVEL2_FAMILY
    assert classify_zero(12, 8) is ZeroClass.LEVEL3_FAMILY
    assert classify_zero(3, 16) is ZeroClass.LEVEL3_FAMILY
    assert classify_zero(3, 4) is ZeroClass.DIM_ZERO  # empty space wins
    assert classify_zero(36, 6) is ZeroClass.SQUARE_SPORADIC
    assert classify_zero(100, 10) is ZeroClass.SQUARE_SPORADIC
    assert classify_zero(11, 2) is None
    assert classify_zero(49, 14) is None


def test_zero_classification_knows_its_grid():
    # (9, 12) is a genuine zero that the classification deliberately
    # leaves unlabelled: it sits outside the covered weight set
    assert delta(9, 12) == 0
    assert classify_zero(9, 12) is None


def test_zero_set_equality_low_weights():
    # two-sided check on the full low-weight grid
    for N in range(1, GRID_N + 1):
        for k in (2, 4, 6, 8, 10, 14):
            is_zero = delta(N, k) == 0
            predicted = classify_zero(N, k) is not None
            assert is_zero == predicted, (N, k)


def test_zero_classification_sound_at_higher_weights():
    # above the covered weight set the classification stays sound
    # (never labels a nonzero) even where it is not complete
    for N in range(1, GRID_N + 1):
        for k in range(16, 41, 2):
            if classify_zero(N, k) is not None:
                assert delta(N, k) == 0, (N, k)


def test_nonnegativity_away_from_squares():
    for N in range(1, GRID_N + 1):
        dec = decompose_level(N)
        if dec.N1 == 1 and is_squarefree(dec.N2):
            continue
        for k in range(2, 31, 2):
            assert delta(N, k) >= 0, (N, k)


def test_step_twelve_in_weight_on_squares():
    # on cubefree squares the bias advances by the sign pattern of mu
    for M in (2, 3, 5, 6, 7, 10, 11, 13):
        N = M * M
        for k in range(2, 62, 2):
            lhs = delta(N, k + 12) - delta(N, k)
            assert lhs == (-1) ** (k // 2) * mobius(M), (N, k)
    for k in range(4, 62, 2):  # level one needs the weight-2 cell skipped
        assert delta(1, k + 12) - delta(1, k) == (-1) ** (k // 2)


def test_generic_level_two_route_bias():
    # for generic-shape levels the bias is weight-independent up to the
    # weight-2 bump; both the Moebius-sum and local-factor coefficient
    # routes must give it
    for N in range(5, 2 * GRID_N + 1):
        if case_tag(N) is not CaseTag.GENERIC:
            continue
        dec = decompose_level(N)
        D = _field_disc_abs(dec.N1)
        base = Fraction(beta(N), 2) * c_coeff(-D, dec.N2) * h_prime(-D)
        prod = 1
        for p, v in factor(dec.N2).pairs:
            chi = kronecker(-D, p)
            if v == 1:
                prod *= p - 1 - chi
            else:
                prod *= p ** (v - 2) * (p - 1) * (p - chi)
        base_prod = Fraction(beta(N), 2) * prod * h_prime(-D)
        assert base == base_prod, N
        for k in (2, 4, 6, 12, 26):
            bump = (-1) ** (k // 2) if (k == 2 and dec.N2 == 1) else 0
            assert delta(N, k) == base + bump, (N, k)


def test_delta_prime_even_root_is_delta():
    for M in (2, 6, 10, 14):
        for k in range(2, 40, 2):
            assert delta_prime(M * M, k) == delta(M * M, k), (M, k)


def test_delta_prime_odd_root_subtracts_twisted_level_one():
    for M in (3, 5, 7, 11, 13, 15):
        sign = 1
        for p, _ in factor(M).pairs:
            sign *= kronecker(-1, p)
        for k in range(2, 40, 2):
            assert delta_prime(M * M, k) == delta(M * M, k) - sign * dim_sk(1, k), (M, k)


def test_delta_prime_dichotomy():
    # nonnegative for every weight exactly when the twisted sign is -1
    for M in (3, 5, 7, 11, 13, 15):
        sign = 1
        for p, _ in factor(M).pairs:
            sign *= kronecker(-1, p)
        values = [delta_prime(M * M, k) for k in range(2, 62, 2)]
        if sign == -1:
            assert all(v >= 0 for v in values), M
        else:
            assert any(v < 0 for v in values), M


def test_delta_prime_rejects_wrong_shapes():
    with pytest.raises(ValueError):
        delta_prime(12, 4)
    with pytest.raises(ValueError):
        delta_prime(1, 4)
    with pytest.raises(ValueError):
        delta_prime(16, 4)  # 16 = 4^2 but 4 is not squarefree


def test_minimal_balance():
    assert minimal_balance(45) is True
    assert minimal_balance(25) is True
    assert minimal_balance(9) is False
    assert minimal_balance(49) is False
    assert minimal_balance(37) is False
    # an odd prime square factor with the right residue forces balance
    assert minimal_balance(9 * 5) == (kronecker(-5, 3) == 1)


def test_sign_prediction_thresholds():
    pred1 = sign_prediction_large_k(1)
    assert pred1 is not None and pred1.threshold_k == 16
    # delta(4, 6) = 1 already fits the sign law; only the zero at k = 8
    # interrupts, so the stable range starts at 10
    pred4 = sign_prediction_large_k(4)
    assert pred4 is not None and pred4.threshold_k == 10
    for N, pred in ((1, pred1), (4, pred4)):
        for k in range(pred.threshold_k, 121, 2):
            d = delta(N, k)
            assert d != 0 and (d > 0) == (pred.predicted_sign(k) > 0), (N, k)
    assert sign_prediction_large_k(5) is None
    assert sign_prediction_large_k(64) is None


def test_scan_negative_hits_only_cubefree_squares():
    hits = scan_negative(200, 30)
    assert (4, 12, -1) in hits
    assert (1, 18, -1) in hits
    for N, k, d in hits:
        assert d < 0
        assert delta(N, k) == d
        dec = decompose_level(N)
        assert dec.N1 == 1 and is_squarefree(dec.N2), (N, k)


def test_bias_record_fields():
    rec = bias_record(49, 14)
    assert isinstance(rec, BiasRecord)
    assert rec.delta == 2 and (rec.dim_plus, rec.dim_minus) == (22, 20)
    assert rec.zero_class is None
    rec0 = bias_record(37, 2)
    assert rec0.zero_class is ZeroClass.K2_37_58
    recp = bias_record(9, 10, predict=True)
    assert recp.predicted_sign_large_k is not None


@given(st.integers(1, 600), st.sampled_from((2, 4, 6, 8, 10, 12, 14, 16)))
@settings(deadline=None, max_examples=100)
def test_refined_dims_randomized(N, k):
    plus, minus = refined_dims(N, k)
    assert plus + minus == dim_sk_new(N, k)
    assert plus - minus == delta(N, k)
    assert plus >= 0 and minus >= 0
