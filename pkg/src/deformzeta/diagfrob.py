"""
Frobenius on the fibre over t = 0 of the pencil, the diagonal hypersurface
a_0 x_0^d + ... + a_n x_n^d.

On the monomial basis x^u Omega / P^k(u) the matrix is monomial: column u has
one nonzero entry, in row v with v_i + 1 = p (u_i + 1) mod d, equal to

    (-1)^k(v) (k(v) - 1)! / (k(u) - 1)! * p^(n - k(u)) / alpha_{u,v},

    alpha_{u,v} = prod_i a_i^(e_i) S_i,    e_i = (p (u_i + 1) - (v_i + 1)) / d,

    S_i = sum_{r >= 0} ((u_i + 1)/d)_r
              sum_{j <= r, m - p j >= 0} (p a_i^(p-1))^(r-j) / ((m - p j)! j!),
    m = e_i + p r.

The factorials (m - p j)! all lie in the residue class of e_i mod p, so they
are read from a table of c!, (c+p)!, (c+2p)!, ... whose consecutive ratios are
the products (k+1)...(k+p) computed with interval_product.

The r-sum is truncated adaptively: the whole r-th term T_r (the inner sum
included, whose individual pieces can have much smaller valuation than T_r)
is evaluated, and the sum stops once 2w consecutive terms vanish mod p^N',
w = max(3, ceil(N' / (p - 1))).
"""
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from .bgsprod import scalar_rising_block, legendre
from .errors import TruncationInsufficient, PrecisionExhausted
from .padic import ZqMatrix, ScaledMatrix, make_context, valuation
from .polyhyp import monomial_basis


@dataclass
class FactorialTable:
    """values[j] = (c + j p)! mod p^prec for j = 0..len(values)-1."""
    p: int
    c: int
    prec: int
    values: list

    def __getitem__(self, k):
        j, rem = divmod(k - self.c, self.p)
        if rem or j < 0:
            raise KeyError(k)
        return self.values[j]

    @property
    def top(self):
        return self.c + (len(self.values) - 1) * self.p


def factorial_table(p, c, top, prec, method="auto", counter=None):
    """
    c!, (c+p)!, ..., up to the largest c + j p <= top, modulo p^prec.

    method "math" reduces math.factorial (independent of interval products);
    "naive", "giant-step" and "auto" multiply blocks (k+1)...(k+p) obtained
    from interval_product with that method.

    EXAMPLES::

        >>> factorial_table(5, 1, 11, 11).values
        [1, 720, 39916800]
    """
    if not 0 <= c < p:
        raise ValueError("residue c must satisfy 0 <= c < p")
    modulus = p ** prec
    if method == "math":
        vals = [factorial(k) % modulus for k in range(c, top + 1, p)]
        return FactorialTable(p, c, prec, vals)
    acc = factorial(c) % modulus
    vals = [acc]
    k = c
    while k + p <= top:
        block, _ = scalar_rising_block(k, p, modulus, method, counter)
        acc = acc * block % modulus
        vals.append(acc)
        k += p
    return FactorialTable(p, c, prec, vals)


def rising_factorial(l, r, modulus):
    """
    (l)_r = l (l+1) ... (l+r-1) mod ``modulus`` for l an integer or a Fraction
    whose denominator is a unit.

    EXAMPLES::

        >>> rising_factorial(1, 4, 7 ** 5)
        24
        >>> rising_factorial(Fraction(2, 3), 2, 7 ** 5) == 10 * pow(9, -1, 7 ** 5) % 7 ** 5
        True
    """
    l = Fraction(l)
    x = l.numerator * pow(l.denominator, -1, modulus) % modulus
    out = 1
    for k in range(r):
        out = out * (x + k) % modulus
    return out


@dataclass
class SeriesFactor:
    """S_i for one (u_i, a_i), scaled: value = unit * p^(-shift) mod p^prec."""
    e: int
    value: int
    prec: int
    terms: int
    valuations: list


@dataclass
class Phi0:
    """Frobenius matrix of the diagonal fibre and the data used to build it."""
    matrix: ScaledMatrix
    R: int
    top: int
    table_prec: int
    factorials: str
    row_of: dict = field(default_factory=dict)

    def as_dict(self):
        from .padic import scaled_matrix_to_dict
        return {"matrix": scaled_matrix_to_dict(self.matrix), "R": self.R, "M": self.top,
                "table_precision": self.table_prec, "factorials": self.factorials}


def exponent_shift(u_i, p, d):
    """(v_i, e_i) for one coordinate of u."""
    v_i = (p * (u_i + 1) - 1) % d
    num = p * (u_i + 1) - (v_i + 1)
    assert num % d == 0
    return v_i, num // d


def frobenius_target(u, p, d):
    return tuple(exponent_shift(x, p, d)[0] for x in u)


def _band_width(p, Nprime):
    return max(3, -(-Nprime // (p - 1)))


class _SeriesEngine:
    """Evaluates the S_i at a fixed truncation bound R, in fixed point."""

    def __init__(self, p, d, Nprime, R, es, factorials, method, counter):
        self.p, self.d, self.Nprime, self.R = p, d, Nprime, R
        self.top = max(es) + p * R
        self.V = legendre(self.top, p) + legendre(R, p)
        self.Nw = Nprime + self.V
        self.table_prec = self.Nw + legendre(self.top, p)
        self.mod = p ** self.Nw
        self.tables = {}
        for c in sorted({e % p for e in es}):
            self.tables[c] = factorial_table(p, c, self.top, self.table_prec,
                                             "math" if factorials == "naive" else method, counter)
        # unit parts of j! for j <= R
        self.small = [self._unit_inverse(factorial(j) % p ** self.table_prec, legendre(j, p))
                      for j in range(R + 1)]

    def _unit_inverse(self, x, v):
        p = self.p
        u = x // p ** v
        return pow(u, -1, self.mod), v

    def fact_inv(self, k):
        """(unit part of k!)^-1 mod p^Nw and ord_p(k!)."""
        table = self.tables[k % self.p]
        return self._unit_inverse(table[k], legendre(k, self.p))

    def series(self, u_i, a_i):
        p, mod, V = self.p, self.mod, self.V
        _, e = exponent_shift(u_i, p, self.d)
        l = (u_i + 1) * pow(self.d, -1, mod) % mod
        apm = pow(a_i, p - 1, mod)
        terms = []
        rising = 1
        for r in range(self.R + 1):
            m = e + p * r
            t = 0
            if m >= 0:
                for j in range(r + 1):
                    k = m - p * j
                    if k < 0:
                        break
                    inv_k, vk = self.fact_inv(k)
                    inv_j, vj = self.small[j]
                    ex = V + (r - j) - vk - vj
                    assert ex >= 0
                    if ex >= self.Nw:
                        continue
                    t += pow(apm, r - j, mod) * pow(p, ex, mod) * inv_k * inv_j
                t = t * rising % mod
            terms.append(t)
            rising = rising * (l + r) % mod
        return e, terms


def _truncate(terms, p, Nprime, V):
    """Index of the first of 2w consecutive terms that vanish mod p^N', or None."""
    w = _band_width(p, Nprime)
    Nw = Nprime + V
    zero = [valuation(t, p) >= Nw for t in terms]
    for r0 in range(len(terms) - 2 * w + 1):
        if all(zero[r0:r0 + 2 * w]):
            # every later term must vanish too (within the evaluated range)
            if all(zero[r0:]):
                return r0
    return None


def series_factors(n, d, a_vec, p, Nprime, factorials="table", method="auto", counter=None, R0=None):
    """
    Compute S_i(u_i, a_i) mod p^N' for every coordinate value u_i = 0..d-2
    and every a_i.  Returns (dict (u_i, a_i) -> SeriesFactor, engine).
    """
    keys = sorted({(ui, ai) for ui in range(d - 1) for ai in a_vec})
    es = [exponent_shift(ui, p, d)[1] for ui, _ in keys]
    R = R0 if R0 is not None else Nprime + 2 * _band_width(p, Nprime) + 4
    for _ in range(12):
        eng = _SeriesEngine(p, d, Nprime, R, es, factorials, method, counter)
        out = {}
        ok = True
        for ui, ai in keys:
            e, terms = eng.series(ui, ai)
            r0 = _truncate(terms, p, Nprime, eng.V)
            if r0 is None:
                ok = False
                break
            total = sum(terms[:r0]) % eng.mod
            v = valuation(total, p)
            if v != eng.V:
                raise PrecisionExhausted("series factor for u_i = %d is not a unit (ord %s)" % (ui, v - eng.V))
            value = (total // p ** v) % p ** Nprime
            vals = [valuation(t, p) - eng.V for t in terms]
            out[(ui, ai)] = SeriesFactor(e, value, Nprime, r0, vals)
        if ok:
            return out, eng
        R *= 2
    raise TruncationInsufficient("series did not settle for R up to %d" % R)


def phi0(n, d, a_vec, p, Nprime, ctx=None, factorials="table", method="auto", counter=None):
    """
    Frobenius matrix (p^-1 Frob_p) of the diagonal fibre on the monomial
    basis, modulo p^N', as a Phi0 record.  ``factorials`` is "table"
    (interval products) or "naive" (math.factorial).  Entries are p-adic
    integers.  If ``ctx`` (Z_q context) is given the matrix lives there.

    EXAMPLES::

        >>> P = phi0(2, 3, [1, 1, 1], 5, 6)
        >>> [[int(x) != 0 for x in row] for row in P.matrix.mat.entries()]
        [[False, True], [True, False]]
    """
    a_vec = [int(x) for x in a_vec]
    if len(a_vec) != n + 1:
        raise ValueError("need n + 1 diagonal coefficients")
    if any(x % p == 0 for x in a_vec):
        raise ValueError("diagonal coefficients must be prime to p")
    if p <= n:
        raise ValueError("need p > n")
    B = monomial_basis(n, d)
    S, eng = series_factors(n, d, a_vec, p, Nprime, factorials, method, counter)
    mod = p ** Nprime
    b = B.b
    rows = [[0] * b for _ in range(b)]
    row_of = {}
    for col, u in enumerate(B.entries):
        v = frobenius_target(u, p, d)
        row = B.index(v)
        row_of[col] = row
        ku, kv = B.k[col], B.k[row]
        alpha = 1
        for i in range(n + 1):
            sf = S[(u[i], a_vec[i])]
            ai_e = pow(a_vec[i], sf.e, mod) if sf.e >= 0 else pow(pow(a_vec[i], -1, mod), -sf.e, mod)
            alpha = alpha * ai_e % mod * sf.value % mod
        val = (-1) ** kv * factorial(kv - 1) * pow(factorial(ku - 1), -1, mod) * p ** (n - ku)
        rows[row][col] = val * pow(alpha, -1, mod) % mod
    if ctx is None:
        ctx = make_context(p, 1, Nprime)
    elif ctx.N != Nprime:
        ctx = ctx.change_precision(Nprime)
    mat = ZqMatrix.from_int_rows(ctx, rows)
    return Phi0(ScaledMatrix(mat, 0, Nprime), eng.R, eng.top, eng.table_prec, factorials, row_of)
