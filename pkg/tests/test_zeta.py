import random

import flint
import pytest
from hypothesis import given, settings, strategies as st

from deformzeta.errors import ChecksFailed, PrecisionTooLow
from deformzeta.padic import make_context, ZqMatrix, ScaledMatrix
from deformzeta.zeta import (assemble_zeta, counts_from_chi, power_sums_from_chi, berkowitz, char_poly_lift,
                             coefficient_bounds, weil_checks, reciprocal_roots, frobenius_q, traces_lift,
                             counts_from_traces, ZetaFunction)


def test_assemble_parity():
    Z = assemble_zeta([1, 2, 5], 5, 2)
    assert Z.numerator == [1, 2, 5] and Z.denominator == [1, -6, 5]
    Z = assemble_zeta([1, 0, 0], 7, 3)
    # surface: 1 / (chi (1 - T)(1 - qT)(1 - q^2 T))
    assert Z.numerator == [1]
    assert Z.denominator[:2] == [1, -(1 + 7 + 49)]


def test_counts_of_trivial_chi():
    # chi = 1: the counts of P^(n-1)
    assert counts_from_chi([1], 4, 3, 3) == [1 + 4 + 16, 1 + 16 + 256, 1 + 64 + 4096]


def test_power_sums():
    # chi = (1 - 2T)(1 - 3T)
    assert power_sums_from_chi([1, -5, 6], 3) == [5, 13, 35]


@settings(max_examples=30, deadline=None)
@given(data=st.data(), m=st.integers(1, 6))
def test_berkowitz_matches_flint(data, m):
    A = [[data.draw(st.integers(-50, 50)) for _ in range(m)] for _ in range(m)]
    cp = berkowitz(A, 1, 0)
    ref = flint.fmpz_mat(A).charpoly().coeffs()[::-1]
    assert cp == [int(c) for c in ref]


def test_coefficient_bounds():
    assert coefficient_bounds(2, 5, 2) == [1, 2 * 3, 5]
    assert coefficient_bounds(2, 25, 2) == [1, 10, 25]


def _scaled_int_matrix(rows, p, N):
    ctx = make_context(p, 1, N)
    return ScaledMatrix(ZqMatrix.from_int_rows(ctx, rows), 0, N)


def test_char_poly_lift_exact_matrix():
    # p^-1 Frob on an elliptic curve with a_p = 2 at p = 5: companion matrix of T^2 - 2T + 5
    X = _scaled_int_matrix([[0, -5], [1, 2]], 5, 6)
    assert char_poly_lift(X, 5, 5, 2, 2) == [1, -2, 5]
    with pytest.raises(PrecisionTooLow):
        char_poly_lift(_scaled_int_matrix([[0, -5], [1, 2]], 5, 1), 5, 5, 2, 2)


def test_traces():
    X = _scaled_int_matrix([[0, -5], [1, 2]], 5, 8)
    tr = traces_lift(X, 5, 5, 2, 2, 2)
    assert tr == [2, 2 * 2 - 2 * 5]
    assert counts_from_traces(tr, 5, 2) == counts_from_chi([1, -2, 5], 5, 2, 2)


def test_frobenius_q_trivial_for_prime_field():
    X = _scaled_int_matrix([[1, 2], [3, 4]], 7, 5)
    assert frobenius_q(X).mat == X.mat


def test_weil_checks_pass_and_fail():
    Z = assemble_zeta([1, -2, 5], 5, 2)
    report = weil_checks(Z, 2, counts=[4])
    assert report["ok"] and report["oracle_counts"]
    with pytest.raises(ChecksFailed):
        weil_checks(assemble_zeta([1, -7, 5], 5, 2), 2)
    with pytest.raises(ChecksFailed):
        weil_checks(Z, 2, counts=[5])
    bad = weil_checks(assemble_zeta([1, 0, 0, 5], 5, 2), 2, strict=False)
    assert not bad["ok"] and not bad["degree"]


def test_reciprocal_roots_repeated():
    # (1 + 5T^2)^2: roots +-i sqrt 5, each twice
    roots = reciprocal_roots([1, 0, 10, 0, 25])
    assert sorted(e for _, e in roots) == [2, 2]
    assert all(abs(abs(z) - 5 ** 0.5) < 1e-12 for z, _ in roots)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_weil_polynomials_have_valid_counts(seed):
    # products of (1 - a T + q T^2) with |a| <= 2 sqrt q
    rng = random.Random(seed)
    q = rng.choice([5, 7, 11, 25])
    chi = [1]
    for _ in range(rng.randint(1, 3)):
        a = rng.randint(-int(2 * q ** 0.5), int(2 * q ** 0.5))
        new = [0] * (len(chi) + 2)
        for i, c in enumerate(chi):
            new[i] += c
            new[i + 1] -= a * c
            new[i + 2] += q * c
        chi = new
    Z = assemble_zeta(chi, q, 2)
    report = weil_checks(Z, len(chi) - 1, strict=False)
    assert report["pairing"] and report["absolute_values"]
