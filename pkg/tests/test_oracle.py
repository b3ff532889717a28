import pytest
from hypothesis import given, settings, strategies as st

from deformzeta.errors import TooLarge, Inconsistent
from deformzeta.oracle import count_points, count_points_naive, zeta_from_counts, oracle_zeta, required_counts
from deformzeta.pipeline import parse_polynomial
from deformzeta.polyhyp import HomogPoly, monomials
from deformzeta.zeta import assemble_zeta


def poly(text, n=2, f=(0, 1)):
    terms = parse_polynomial(text, f, n)
    return HomogPoly(n, sum(next(iter(terms))), terms)


def test_fermat_cubic_over_f2():
    # x^3 + y^3 + z^3 over F_2: cubing is the identity, so x + y + z = 0, a line
    assert count_points(poly("x^3+y^3+z^3"), 2) == 3


def test_line_and_conic():
    # x = 0 in P^2 has q + 1 points; a smooth conic also has q + 1
    assert count_points(HomogPoly(2, 1, {(1, 0, 0): 1}), 7) == 8
    assert count_points(poly("x^2+y^2+z^2"), 7) == 8
    assert count_points(poly("x^2+y^2+z^2"), 7, i=2) == 50


def test_fermat_cubic_p2_mod3():
    # p = 2 mod 3: the Fermat cubic is supersingular and has p + 1 points
    assert count_points(poly("x^3+y^3+z^3"), 5) == 6
    assert count_points(poly("x^3+y^3+z^3"), 11) == 12


@settings(max_examples=12, deadline=None)
@given(data=st.data(), p=st.sampled_from([3, 5]), a=st.sampled_from([1, 2]))
def test_vectorized_matches_scalar(data, p, a):
    f = {1: (0, 1), 2: {3: (1, 0, 1), 5: (2, 0, 1)}[p]}[a]
    terms = {}
    for e in monomials(3, 3):
        c = tuple(data.draw(st.integers(0, p - 1)) for _ in range(a))
        if any(c):
            terms[e] = c
    if not terms:
        return
    P = HomogPoly(2, 3, terms)
    assert count_points(P, p, f) == count_points_naive(P, p, f)


def test_extension_counts_consistent():
    # counting over F_25 with a = 1, i = 2 equals counting with a = 2, i = 1
    P = poly("x^3+y^3+z^3+x*y*z")
    assert count_points(P, 5, (0, 1), 2) == count_points(P, 5, (2, 0, 1), 1)


def test_too_large():
    with pytest.raises(TooLarge):
        count_points(poly("x^3+y^3+z^3"), 101, i=3, max_size=10 ** 6)


def test_zeta_from_counts_roundtrip():
    chi = [1, 2, 5]  # 1 + 2T + 5T^2, q = 5, n = 2
    Z = assemble_zeta(chi, 5, 2)
    assert zeta_from_counts(Z.counts(1), 2, 5, 2) == Z
    with pytest.raises(Inconsistent):
        zeta_from_counts([], 2, 5, 2)


def test_oracle_zeta_hesse():
    Z, counts = oracle_zeta(poly("x^3+y^3+z^3+x*y*z"), 5)
    # |X(F_5)| = 1 + 5 - a, chi = 1 - a T + 5 T^2
    assert counts == [count_points(poly("x^3+y^3+z^3+x*y*z"), 5)]
    assert Z.chi == [1, 6 - counts[0], 5]
    assert required_counts(21, 3) == 11


def test_zeta_from_counts_odd_n_middle_coefficient():
    # cubic surface with all 27 lines rational over F_7: chi = (1 - 7T)^6
    chi = [1, -42, 735, -6860, 36015, -100842, 117649]
    Z = assemble_zeta(chi, 7, 3)
    assert Z.counts(1) == [1 + 7 * 7 + 49]
    assert zeta_from_counts(Z.counts(3), 6, 7, 3).chi == chi
    # sign decided by the middle coefficient when it is nonzero
    chi2 = [1, 0, 0, -686, 0, 0, 117649]
    assert zeta_from_counts(assemble_zeta(chi2, 7, 3).counts(3), 6, 7, 3).chi == chi2
