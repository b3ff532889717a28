import random
from math import factorial, prod

import pytest
from hypothesis import given, settings, strategies as st

from deformzeta.bench import random_matrix_poly
from deformzeta.bgsprod import (LinearMatrixPoly, interval_product, naive_product, scalar_rising_block, legendre,
                                giant_step_condition, lagrange_shift, OpCounter)
from deformzeta.errors import InvertibilityViolation


def test_doc_example():
    A = LinearMatrixPoly.from_rows([[0, 1], [0, 0]], [[1, 0], [0, 1]], 101 ** 3)
    assert interval_product(A, 0, 3, 101).value.tolist() == [[6, 11], [0, 6]]
    assert interval_product(A, 0, 3, 101, "giant-step").value.tolist() == [[6, 11], [0, 6]]


def test_scalar_rising_block():
    assert scalar_rising_block(5, 5, 5 ** 8) == (30240, 1)
    v, o = scalar_rising_block(20, 7, 7 ** 6, "giant-step")
    assert v == prod(range(21, 28)) % 7 ** 6 and o == 1


def test_legendre():
    assert legendre(100, 5) == 24
    assert all(legendre(k, 7) == len([1 for j in range(1, k + 1) for _ in range(_v(j, 7))]) for k in range(60))


def _v(x, p):
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def test_empty_and_errors():
    A = random_matrix_poly(2, 101 ** 2, 0)
    assert interval_product(A, 5, 0, 101).value.tolist() == [[1, 0], [0, 1]]
    with pytest.raises(ValueError):
        interval_product(A, 0, -1, 101)
    # L = 4^5 needs p > 2^5 + 1
    assert not giant_step_condition(31, 1024) and giant_step_condition(37, 1024)
    with pytest.raises(InvertibilityViolation):
        interval_product(A, 0, 1024, 31, "giant-step")


@settings(max_examples=40, deadline=None)
@given(m=st.integers(1, 4), L=st.integers(1, 700), s=st.integers(0, 10 ** 6),
       p=st.sampled_from([101, 10007]), N=st.integers(1, 6), seed=st.integers(0, 10 ** 6))
def test_giant_step_matches_naive(m, L, s, p, N, seed):
    A = random_matrix_poly(m, p ** N, seed)
    if not giant_step_condition(p, L):
        return
    G = interval_product(A, s, L, p, "giant-step").value
    assert G == naive_product(A, s, L)


@settings(max_examples=30, deadline=None)
@given(m=st.integers(1, 3), L1=st.integers(0, 300), L2=st.integers(0, 300), s=st.integers(0, 1000),
       seed=st.integers(0, 10 ** 6))
def test_multiplicativity(m, L1, L2, s, seed):
    p = 10007
    A = random_matrix_poly(m, p ** 3, seed)
    whole = interval_product(A, s, L1 + L2, p, "auto").value
    parts = interval_product(A, s, L1, p, "auto").value * interval_product(A, s + L1, L2, p, "auto").value
    assert whole == parts


@settings(max_examples=30, deadline=None)
@given(coeffs=st.lists(st.integers(0, 10 ** 6), min_size=1, max_size=6), a=st.integers(7, 50))
def test_lagrange_shift(coeffs, a):
    # polynomial of degree D sampled at 0..D, shifted to a..a+D
    M = 101 ** 3
    D = len(coeffs) - 1

    def f(x):
        return sum(c * x ** i for i, c in enumerate(coeffs)) % M
    F = [[f(i), 2 * f(i) % M] for i in range(D + 1)]
    out = lagrange_shift(F, D, a, M)
    assert out == [[f(a + k), 2 * f(a + k) % M] for k in range(D + 1)]


def test_op_counter_scaling():
    A = random_matrix_poly(2, 10007 ** 2, 1)
    ops = []
    for L in (4 ** 6, 4 ** 7):
        c = OpCounter()
        interval_product(A, 0, L, 10007, "giant-step", c)
        ops.append(c.ops)
    assert 1.5 < ops[1] / ops[0] < 3.0


def test_factorials_via_blocks():
    p, M = 13, 13 ** 10
    acc = 1
    for j in range(6):
        v, o = scalar_rising_block(j * p, p, M, "giant-step")
        acc = acc * v % M
        assert o == legendre((j + 1) * p, p) - legendre(j * p, p)
    assert acc == factorial(6 * p) % M
