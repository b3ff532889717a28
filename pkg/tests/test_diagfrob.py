from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given, settings, strategies as st

from deformzeta.diagfrob import (factorial_table, rising_factorial, phi0, exponent_shift, frobenius_target,
                                 series_factors)
from deformzeta.oracle import oracle_zeta
from deformzeta.polyhyp import diagonal, monomial_basis
from deformzeta.zeta import char_poly_lift, frobenius_q


def test_factorial_table_example():
    assert factorial_table(5, 1, 11, 11).values == [1, 720, 39916800]
    T = factorial_table(7, 3, 40, 5)
    assert T[10] == factorial(10) % 7 ** 5 and T.top == 38
    with pytest.raises(KeyError):
        T[11]


@settings(max_examples=20, deadline=None)
@given(p=st.sampled_from([5, 7, 13, 101]), c=st.integers(0, 100), R=st.integers(0, 12), N=st.integers(1, 8))
def test_factorial_table_methods_agree(p, c, R, N):
    c = c % p
    top = c + R * p
    ref = factorial_table(p, c, top, N, "math").values
    assert factorial_table(p, c, top, N, "naive").values == ref
    assert factorial_table(p, c, top, N, "giant-step").values == ref


def test_rising_factorial():
    assert rising_factorial(1, 4, 7 ** 5) == 24
    assert rising_factorial(Fraction(2, 3), 2, 7 ** 5) == 10 * pow(9, -1, 7 ** 5) % 7 ** 5


def test_frobenius_permutes_basis():
    for p, d in [(7, 3), (5, 4), (3, 4), (13, 4), (11, 5)]:
        B = monomial_basis(2, d)
        targets = [frobenius_target(u, p, d) for u in B.entries]
        assert sorted(targets) == sorted(B.entries)
        for u in B.entries:
            for ui in u:
                v, e = exponent_shift(ui, p, d)
                assert d * e == p * (ui + 1) - (v + 1)


def test_doc_example():
    P = phi0(2, 3, [1, 1, 1], 5, 6)
    assert [[int(x) != 0 for x in row] for row in P.matrix.mat.entries()] == [[False, True], [True, False]]


def _chi_of_diagonal(n, d, a_vec, p, N):
    P = phi0(n, d, a_vec, p, N)
    from deformzeta.polyhyp import betti
    return char_poly_lift(frobenius_q(P.matrix), p, p, n, betti(n, d))


@pytest.mark.parametrize("n,d,a_vec,p,N", [
    (2, 3, [1, 1, 1], 7, 6),
    (2, 3, [1, 2, 3], 7, 6),
    (2, 3, [2, 3, 4], 13, 5),
    (2, 4, [1, 1, 1], 5, 8),
    (2, 4, [1, 2, 4], 3, 10),   # p < d - 1
    (2, 5, [1, 1, 2], 3, 12),
    (3, 3, [1, 2, 3, 4], 7, 8),
])
def test_phi0_matches_oracle(n, d, a_vec, p, N):
    P = diagonal(n, d, a_vec, lambda x: (x,))
    Z, _ = oracle_zeta(P, p)
    assert _chi_of_diagonal(n, d, a_vec, p, N) == Z.chi


@pytest.mark.parametrize("n,d,a_vec,p,N", [(2, 3, [1, 2, 3], 7, 9), (2, 4, [3, 1, 2], 5, 12),
                                           (3, 4, [1, 1, 1, 1], 7, 20), (2, 4, [1, 1, 1], 97, 6)])
def test_phi0_table_equals_naive_factorials(n, d, a_vec, p, N):
    A = phi0(n, d, a_vec, p, N, factorials="table")
    B = phi0(n, d, a_vec, p, N, factorials="naive")
    assert A.matrix.mat == B.matrix.mat
    assert A.row_of == B.row_of


def test_series_factors_are_units():
    S, eng = series_factors(2, 4, [1, 2], 5, 8)
    assert all(sf.value % 5 for sf in S.values())
    assert all(sf.terms >= 1 for sf in S.values())


def test_phi0_rejects_bad_input():
    with pytest.raises(ValueError):
        phi0(2, 3, [1, 7, 1], 7, 5)
    with pytest.raises(ValueError):
        phi0(3, 4, [1, 1, 1, 1], 3, 5)
    with pytest.raises(ValueError):
        phi0(2, 3, [1, 1], 7, 5)
