"""
Homogeneous polynomials, the monomial basis of the primitive middle
cohomology of a smooth hypersurface, and the smoothness / genericity tests.

Coefficients are kept in whatever ring the caller uses.  Over F_q, and for
integral lifts to Z_q, a coefficient is a tuple of ``a`` integers giving its
coordinates in the power basis of the field modulus f.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb

import flint


def monomials(nvars, deg):
    """All exponent tuples of length nvars summing to deg, in lex order."""
    if deg < 0:
        return []
    out = []
    for c in combinations_with_replacement(range(nvars), deg):
        e = [0] * nvars
        for i in c:
            e[i] += 1
        out.append(tuple(e))
    out.sort()
    return out


@lru_cache(maxsize=None)
def monomial_index(nvars, deg):
    mons = monomials(nvars, deg)
    return mons, {m: i for i, m in enumerate(mons)}


@dataclass
class HomogPoly:
    """Homogeneous polynomial in x_0..x_n of degree d, stored sparsely."""
    n: int
    d: int
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for e, c in self.terms.items():
            e = tuple(int(x) for x in e)
            if len(e) != self.n + 1 or sum(e) != self.d or min(e) < 0:
                raise ValueError("exponent %s does not fit degree %s in %s variables" % (e, self.d, self.n + 1))
            if not _is_zero(c):
                clean[e] = c
        self.terms = clean

    def map_coefficients(self, fn):
        return HomogPoly(self.n, self.d, {e: fn(c) for e, c in self.terms.items()})

    def coefficient(self, e, zero=0):
        return self.terms.get(tuple(e), zero)

    def __repr__(self):
        parts = []
        for e, c in sorted(self.terms.items(), reverse=True):
            mon = "*".join("x%d^%d" % (i, k) if k > 1 else "x%d" % i for i, k in enumerate(e) if k)
            parts.append("(%s)*%s" % (c, mon or "1"))
        return " + ".join(parts) or "0"


def substitute_linear(P, A, p):
    """
    P(A x) with A an invertible (n+1) x (n+1) integer matrix read mod p,
    i.e. x_i -> sum_j A[i][j] x_j.  Coefficients of P are F_q coordinate
    tuples; the result has coordinates reduced mod p.  The hypersurfaces
    P = 0 and P(Ax) = 0 are isomorphic, so they have the same zeta function.
    """
    n = P.n
    out = {}
    for e, c in P.terms.items():
        c = (c,) if isinstance(c, int) else tuple(c)
        acc = {(0,) * (n + 1): 1}
        for i, k in enumerate(e):
            for _ in range(k):
                new = {}
                for m, v in acc.items():
                    for j in range(n + 1):
                        if A[i][j] % p:
                            w = list(m)
                            w[j] += 1
                            w = tuple(w)
                            new[w] = (new.get(w, 0) + v * A[i][j]) % p
                acc = new
        for m, v in acc.items():
            old = out.get(m, (0,) * len(c))
            out[m] = tuple((x + v * y) % p for x, y in zip(old, c))
    return HomogPoly(n, P.d, {m: c for m, c in out.items() if any(c)})


def _is_zero(c):
    if isinstance(c, tuple):
        return not any(c)
    try:
        return c == 0
    except TypeError:
        return False


def diagonal(n, d, a_vec, coeff=lambda x: x):
    """a_0 x_0^d + ... + a_n x_n^d."""
    terms = {}
    for i, ai in enumerate(a_vec):
        e = [0] * (n + 1)
        e[i] = d
        terms[tuple(e)] = coeff(ai)
    return HomogPoly(n, d, terms)


@dataclass(frozen=True)
class MonomialBasis:
    """Exponent vectors u with |u| = k d - (n + 1) and u_i <= d - 2, sorted by
    (k, u).  ``k[j]`` is the pole order of ``entries[j]``."""
    n: int
    d: int
    entries: tuple
    k: tuple

    @property
    def b(self):
        return len(self.entries)

    def index(self, u):
        return self.entries.index(tuple(u))

    def level(self, k):
        """Indices of basis vectors of pole order k."""
        return [j for j, kk in enumerate(self.k) if kk == k]


def betti(n, d):
    """Degree of the characteristic polynomial of Frobenius on the primitive
    middle cohomology of a smooth degree d hypersurface in P^n."""
    return ((d - 1) ** (n + 1) + (-1) ** (n + 1) * (d - 1)) // d


@lru_cache(maxsize=None)
def monomial_basis(n, d):
    """
    EXAMPLES::

        >>> B = monomial_basis(2, 3)
        >>> B.entries, B.k
        (((0, 0, 0), (1, 1, 1)), (1, 2))
        >>> monomial_basis(2, 4).b
        6
    """
    if d < 2 or n < 1:
        raise ValueError("need d >= 2 and n >= 1")
    entries, ks = [], []
    for k in range(1, n + 1):
        deg = k * d - (n + 1)
        for u in monomials(n + 1, deg):
            if max(u, default=0) <= d - 2:
                entries.append(u)
                ks.append(k)
    assert len(entries) == betti(n, d)
    return MonomialBasis(n, d, tuple(entries), tuple(ks))


# -- arithmetic in F_q = F_p[y]/(f) on coordinate tuples --------------------

class FqField:
    """Minimal F_q arithmetic on coordinate tuples; enough for linear algebra
    by realification over F_p."""

    def __init__(self, p, f):
        self.p = p
        self.f = tuple(int(c) % p for c in f)
        self.a = len(f) - 1
        self.poly_ctx = flint.fmpz_mod_poly_ctx(p)
        self._f = self.poly_ctx(list(self.f))

    def __call__(self, c):
        if isinstance(c, int):
            c = (c,)
        c = [int(x) % self.p for x in c] + [0] * self.a
        if any(c[self.a:]):
            g = self.poly_ctx(c) % self._f
            c = [int(x) for x in g.coeffs()] + [0] * self.a
        return tuple(c[:self.a])

    def mul(self, x, y):
        g = (self.poly_ctx(list(x)) * self.poly_ctx(list(y))) % self._f
        return self(tuple(int(v) for v in g.coeffs()))

    def add(self, x, y):
        return tuple((u + v) % self.p for u, v in zip(x, y))

    def scale(self, x, k):
        return tuple((u * k) % self.p for u in x)

    def is_zero(self, x):
        return not any(v % self.p for v in x)

    def mult_block(self, x):
        """a x a matrix over F_p of multiplication by x."""
        a = self.a
        cols = []
        for j in range(a):
            e = [0] * a
            e[j] = 1
            cols.append(self.mul(x, tuple(e)))
        return [[cols[t][s] for t in range(a)] for s in range(a)]


def realified_rank(F, rows):
    """Rank over F_q of a matrix with F_q entries (coordinate tuples) computed
    as rank over F_p of its realification divided by a."""
    a = F.a
    nr = len(rows)
    nc = len(rows[0]) if nr else 0
    if nr == 0 or nc == 0:
        return 0
    flat = [0] * (nr * a * nc * a)
    width = nc * a
    for i, row in enumerate(rows):
        for j, x in enumerate(row):
            if F.is_zero(x):
                continue
            blk = F.mult_block(x)
            for s in range(a):
                base = (i * a + s) * width + j * a
                for t in range(a):
                    flat[base + t] = blk[s][t]
    M = flint.nmod_mat(nr * a, nc * a, flat, F.p)
    rk = M.rank()
    assert rk % a == 0
    return rk // a


def partial(P, i, scale=lambda c, k: c * k):
    """Partial derivative in x_i; coefficients multiplied via ``scale``."""
    terms = {}
    for e, c in P.terms.items():
        if e[i]:
            f = list(e)
            f[i] -= 1
            terms[tuple(f)] = scale(c, e[i])
    return HomogPoly(P.n, P.d - 1, terms)


def check_smooth(P, p, f=(0, 1)):
    """
    Smoothness over the algebraic closure of F_q for P with coefficients in F_q
    (coordinate tuples, or ints when a = 1).  True iff the partials of P span
    all monomials of degree (n+1)(d-1) - n, which is where the Jacobian ring
    of a smooth hypersurface vanishes.
    """
    n, d = P.n, P.d
    if d % p == 0:
        raise ValueError("p divides d")
    F = FqField(p, f)
    P = P.map_coefficients(F)
    D = (n + 1) * (d - 1) - n
    rows_mons, row_idx = monomial_index(n + 1, D)
    cols = []
    shift_mons = monomials(n + 1, D - (d - 1))
    for i in range(n + 1):
        dP = partial(P, i, scale=F.scale)
        if not dP.terms:
            continue
        for m in shift_mons:
            col = {}
            for e, c in dP.terms.items():
                w = tuple(x + y for x, y in zip(e, m))
                col[row_idx[w]] = c
            cols.append(col)
    zero = (0,) * F.a
    # rows = monomials, columns = generators of J_D
    mat = [[zero] * len(cols) for _ in rows_mons]
    for j, col in enumerate(cols):
        for i, c in col.items():
            mat[i][j] = c
    if len(cols) < len(rows_mons):
        return False
    return realified_rank(F, mat) == len(rows_mons)


def check_generic_pencil(r, p, f=(0, 1)):
    """
    True iff r mod p does not vanish at t = 0 and t = 1.  ``r`` is a list of
    coefficients (low to high), each an int or a coordinate tuple over Z_q.
    """
    F = FqField(p, f)
    coeffs = [F(c) for c in r]
    if not coeffs:
        return False
    at0 = coeffs[0]
    at1 = (0,) * F.a
    for c in coeffs:
        at1 = F.add(at1, c)
    return not F.is_zero(at0) and not F.is_zero(at1)


def num_basis_check(n, d):
    """Closed form against enumeration (used by tests)."""
    return monomial_basis(n, d).b == betti(n, d)


def count_monomials(nvars, deg):
    return comb(nvars + deg - 1, deg)
