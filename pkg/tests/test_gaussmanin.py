from fractions import Fraction

import pytest

from deformzeta.errors import GenericityFailure, UnitDenominatorFailure
from deformzeta.gaussmanin import (Pencil, NumberField, ConnectionData, gauss_manin, connection_at,
                                   griffiths_dwork_reduce, check_p_integral)
from deformzeta.pipeline import parse_polynomial
from deformzeta.polyhyp import HomogPoly, diagonal


def pencil(text, n=2, f=(0, 1), a_vec=None, p=None):
    terms = parse_polynomial(text, f, n)
    P1 = HomogPoly(n, sum(next(iter(terms))), terms)
    return Pencil(n, P1.d, P1, a_vec or [1] * (n + 1), f=tuple(f), p=p)


def test_scalar_multiple_pencil():
    # P_1 = g P_0 over Q(g), g^2 = -2: P(t) = (1 - t + t g) P_0, so
    # M = -k (g - 1) / (1 - t + t g) on a form of pole order k
    f = (2, 0, 1)
    K = NumberField(f)
    P1 = HomogPoly(2, 3, {(3, 0, 0): (0, 1), (0, 3, 0): (0, 1), (0, 0, 3): (0, 1)})
    pen = Pencil(2, 3, P1, [1, 1, 1], f=f)
    conn = gauss_manin(pen)
    for tau in (Fraction(1, 3), Fraction(-2, 7), Fraction(5)):
        s = K.inv(K((1 - tau, tau)))
        expect = [K.mul(K((-k * -1, -k)), s) for k in pen.basis.k]
        M = conn.evaluate(tau)
        assert M == connection_at(pen, tau)
        for i in range(2):
            for j in range(2):
                assert M[i][j] == (expect[i] if i == j else K.zero())


def test_constant_pencil_has_zero_connection():
    pen = pencil("x^3+y^3+z^3")
    conn = gauss_manin(pen)
    assert conn.deg_r == 0
    assert all(not any(c for c in g) for row in conn.G for g in row)


@pytest.mark.parametrize("text,n,f,p", [
    ("x^3+y^3+z^3+x*y*z", 2, (0, 1), 5),
    ("x^3*y+y^3*z+z^3*x", 2, (0, 1), 13),
    ("x^3+2*y^3+z^3+g*x*y*z+x^2*y", 2, (3, 6, 1), 7),
])
def test_connection_matches_fibrewise_reduction(text, n, f, p):
    pen = pencil(text, n, f, p=p)
    conn = gauss_manin(pen)
    for tau in (Fraction(2, 5), Fraction(-1, 4), Fraction(7, 11)):
        assert conn.evaluate(tau) == connection_at(pen, tau)


def test_connection_is_p_integral_and_serializes():
    pen = pencil("x^3*y+y^3*z+z^3*x", p=11)
    conn = gauss_manin(pen)
    D = conn.as_dict()
    assert D["G_den"] % 11
    assert all(Fraction(c[0]).denominator == 1 for c in conn.r)
    assert conn.deg_r >= 1


def test_griffiths_dwork_reduction_at_a_fibre():
    pen = pencil("x^3+y^3+z^3+x*y*z")
    one = (Fraction(1),)
    # at t = 2 the fibre is P = -P_0 + 2 P_1 = x^3 + y^3 + z^3 + 2xyz,
    # dP/dx_0 = 3x^2 + 2yz
    dP0 = {(2, 0, 0): 3, (0, 1, 1): 2}
    x0dP0 = HomogPoly(2, 3, {(e[0] + 1, e[1], e[2]): c for e, c in dP0.items()})
    x1dP0 = HomogPoly(2, 3, {(e[0], e[1] + 1, e[2]): c for e, c in dP0.items()})
    # x_j dP/dx_0 Omega / P^2 == (d x_j / d x_0) Omega / P
    assert griffiths_dwork_reduce(x0dP0, 2, pen, tau=2) == [one, (Fraction(0),)]
    assert griffiths_dwork_reduce(x1dP0, 2, pen, tau=2) == [(Fraction(0),), (Fraction(0),)]
    xyz = HomogPoly(2, 3, {(1, 1, 1): 1})
    assert griffiths_dwork_reduce(xyz, 2, pen, tau=2) == [(Fraction(0),), one]


def test_genericity_checks():
    G = [[[(Fraction(1),)], []], [[], []]]
    with pytest.raises(GenericityFailure) as ex:
        check_p_integral(ConnectionData([(1,), (4,)], G, (0, 1), 2), 5)
    assert getattr(ex.value, "at_one", False)
    with pytest.raises(UnitDenominatorFailure):
        check_p_integral(ConnectionData([(5,), (1,)], G, (0, 1), 2), 5)
    with pytest.raises(UnitDenominatorFailure):
        check_p_integral(ConnectionData([(1,), (1,)], [[[(Fraction(1, 5),)], []], [[], []]], (0, 1), 2), 5)
