import random

import pytest
from hypothesis import given, settings, strategies as st

from deformzeta.oracle import count_points
from deformzeta.pipeline import parse_polynomial, random_unipotent
from deformzeta.polyhyp import (HomogPoly, FqField, monomials, monomial_basis, betti, check_smooth,
                                check_generic_pencil, substitute_linear, diagonal, partial, count_monomials)


def poly(text, n=2, f=(0, 1)):
    terms = parse_polynomial(text, f, n)
    e = next(iter(terms))
    return HomogPoly(n, sum(e), terms)


@pytest.mark.parametrize("n,d,b", [(1, 3, 2), (2, 3, 2), (2, 4, 6), (3, 3, 6), (3, 4, 21), (2, 5, 12)])
def test_betti(n, d, b):
    assert betti(n, d) == b
    assert monomial_basis(n, d).b == b


@settings(max_examples=20, deadline=None)
@given(n=st.integers(1, 3), d=st.integers(2, 5))
def test_basis_shape(n, d):
    B = monomial_basis(n, d)
    assert len(set(B.entries)) == B.b == betti(n, d)
    for u, k in zip(B.entries, B.k):
        assert sum(u) == k * d - n - 1 and max(u) <= d - 2 and 1 <= k <= n


@settings(max_examples=20, deadline=None)
@given(nv=st.integers(1, 4), deg=st.integers(0, 6))
def test_monomials(nv, deg):
    M = list(monomials(nv, deg))
    assert len(M) == len(set(M)) == count_monomials(nv, deg)
    assert all(sum(m) == deg for m in M)


def test_smoothness():
    assert check_smooth(poly("x^3+y^3+z^3"), 7)
    # Hesse pencil member with lambda^3 = 1 mod 7 is singular
    assert not check_smooth(poly("x^3+y^3+z^3+x*y*z"), 7)
    assert check_smooth(poly("x^3+y^3+z^3+x*y*z"), 5)
    assert not check_smooth(poly("x^2*y+y^2*z"), 5)
    assert check_smooth(poly("x^3*y+y^3*z+z^3*x"), 13)
    assert check_smooth(poly("x^4+y^4+z^4+w^4+x*y*z*w", 3), 7)


def test_smoothness_extension_field():
    f = (2, 0, 1)  # F_25
    assert check_smooth(poly("x^3+y^3+z^3+g*x*y*z", f=f), 5, f)


def test_generic_pencil():
    assert check_generic_pencil([1, 2], 5)
    assert not check_generic_pencil([1, 4], 5)
    assert not check_generic_pencil([5, 1], 5)
    assert check_generic_pencil([(1, 1), (0, 1)], 5, (2, 0, 1))


def test_fq_field():
    F = FqField(5, (2, 0, 1))  # g^2 = -2
    g = (0, 1)
    assert F.mul(g, g) == (3, 0)
    assert F((0, 0, 1)) == (3, 0)
    assert F.mult_block(g) == [[0, 3], [1, 0]]


def test_partial_and_diagonal():
    P = diagonal(2, 3, [1, 2, 3])
    assert partial(P, 1).terms == {(0, 2, 0): 6}


def test_substitute_linear_example():
    P = poly("x^3+y^3+z^3")
    Q = substitute_linear(P, [[1, 1, 0], [0, 1, 0], [0, 0, 1]], 7)
    assert Q.terms == {(3, 0, 0): (1,), (2, 1, 0): (3,), (1, 2, 0): (3,), (0, 3, 0): (2,), (0, 0, 3): (1,)}


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10 ** 6), p=st.sampled_from([5, 7]))
def test_substitute_linear_preserves_counts(seed, p):
    rng = random.Random(seed)
    terms = {e: (rng.randrange(p),) for e in monomials(3, 3)}
    terms = {e: c for e, c in terms.items() if c[0]}
    if not terms:
        return
    P = HomogPoly(2, 3, terms)
    A = random_unipotent(3, p, rng)
    Q = substitute_linear(P, A, p)
    assert count_points(Q, p) == count_points(P, p)
    assert check_smooth(Q, p) == check_smooth(P, p)
