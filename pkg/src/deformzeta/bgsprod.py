"""
Interval products A(s+1) A(s+2) ... A(s+L) of a matrix polynomial
A(x) = A0 + x A1 over Z/M, M = p^N, by baby steps and giant steps.

Giant step method.  Let beta = 2^k with k = floor(log_4 L) and
B_D(x) = A(x+1) ... A(x+D).  Starting from the values of B_1 at s, s + beta,
the values of B_D at the D + 1 points s + i beta are doubled into values of
B_2D at 2D + 1 points: the polynomial F(y) = B_D(s + y beta) of degree <= D
is shifted by Lagrange interpolation to F(D+1+i) and to G(i) = F(i + D/beta),
G(D+1+i), and B_2D(s + i beta) = F(i) G(i).  Each shift is one convolution,
done for all matrix entries at once by packing them into a single polynomial.
It needs the integers 1, ..., 2^k + 1 to be invertible mod p, i.e.
p > 2^k + 1.  The beta + 1 values B_beta(s + i beta) are then multiplied
together, and the leftover factors are multiplied naively.

Matrices are flint fmpz_mod_mat; Z_q-matrices enter through their regular
representation, which is a ring homomorphism, so no separate code is needed.
"""
from dataclasses import dataclass, field

import flint

from .errors import InvertibilityViolation

NAIVE_THRESHOLD = 256


@dataclass
class OpCounter:
    """Tally of ring operations under the model: a product of polynomials
    with result length n costs n * ceil(log2 n); an m x m matrix product costs
    m^3; scalar operations cost 1."""
    ops: int = 0
    detail: dict = field(default_factory=dict)

    def add(self, kind, n):
        self.ops += n
        self.detail[kind] = self.detail.get(kind, 0) + n


def _polymul_cost(n):
    return n * max(1, (n - 1).bit_length())


@dataclass
class LinearMatrixPoly:
    """A(x) = A0 + x A1 with A0, A1 square fmpz_mod_mat over the same modulus."""
    A0: object
    A1: object

    @classmethod
    def from_rows(cls, A0, A1, modulus):
        m = len(A0)
        ctx = flint.fmpz_mod_ctx(modulus)
        return cls(flint.fmpz_mod_mat(m, m, [x for r in A0 for x in r], ctx),
                   flint.fmpz_mod_mat(m, m, [x for r in A1 for x in r], ctx))

    @property
    def m(self):
        return self.A0.nrows()

    @property
    def modulus(self):
        return int(self.A0.modulus())

    def at(self, x):
        return self.A0 + self.A1 * (int(x) % self.modulus)

    def transpose(self):
        return LinearMatrixPoly(self.A0.transpose(), self.A1.transpose())


@dataclass
class IntervalProduct:
    value: object
    s: int
    L: int
    method: str


def _identity(m, ctx):
    return flint.fmpz_mod_mat(m, m, [1 if i == j else 0 for i in range(m) for j in range(m)], ctx)


def naive_product(A, s, L, counter=None):
    """A(s+1) A(s+2) ... A(s+L) by L - 1 matrix products."""
    m = A.m
    ctx = flint.fmpz_mod_ctx(A.modulus)
    if m == 1:
        M = A.modulus
        a0, a1 = int(A.A0[0, 0]), int(A.A1[0, 0])
        acc = 1
        for i in range(s + 1, s + L + 1):
            acc = acc * (a0 + a1 * i) % M
        if counter:
            counter.add("scalar", 2 * L)
        return flint.fmpz_mod_mat(1, 1, [acc], ctx)
    out = _identity(m, ctx)
    for i in range(s + 1, s + L + 1):
        out = out * A.at(i)
    if counter:
        counter.add("matmul", L * m ** 3)
    return out


def giant_step_condition(p, L):
    """True iff the integers 1..2^floor(log_4 L)+1 are units mod p."""
    k = _log4_floor(L)
    return p > (1 << k) + 1


def _log4_floor(L):
    k = 0
    while 4 ** (k + 1) <= L:
        k += 1
    return k


def interval_product(A, s, L, p=None, method="auto", counter=None):
    """
    prod_{i=1}^{L} A(s + i), factors multiplied left to right in increasing
    order of i.  ``p`` is the residue characteristic of the coefficient ring
    (needed to decide whether the giant step method applies).

    method: "naive", "giant-step", or "auto" (giant steps when L >= 256 and
    the invertibility condition holds, naive otherwise).

    EXAMPLES::

        >>> A = LinearMatrixPoly.from_rows([[0, 1], [0, 0]], [[1, 0], [0, 1]], 101 ** 3)
        >>> [[int(x) for x in row] for row in interval_product(A, 0, 3, 101).value.tolist()]
        [[6, 11], [0, 6]]
    """
    if L < 0:
        raise ValueError("negative length")
    ctx = flint.fmpz_mod_ctx(A.modulus)
    if L == 0:
        return IntervalProduct(_identity(A.m, ctx), s, 0, "naive")
    if p is None:
        p = _guess_prime(A.modulus)
    ok = giant_step_condition(p, L)
    if method == "auto":
        method = "giant-step" if (L >= NAIVE_THRESHOLD and ok) else "naive"
    if method == "naive":
        return IntervalProduct(naive_product(A, s, L, counter), s, L, "naive")
    if method != "giant-step":
        raise ValueError("unknown method %r" % method)
    if not ok:
        raise InvertibilityViolation("giant steps for L = %d need p > 2^%d + 1" % (L, _log4_floor(L)))
    return IntervalProduct(_giant_product(A, s, L, counter), s, L, "giant-step")


def _guess_prime(M):
    for q, _ in flint.fmpz(M).factor():
        return int(q)


def _giant_product(A, s, L, counter):
    m = A.m
    M = A.modulus
    ctx = flint.fmpz_mod_ctx(M)
    beta = 1 << _log4_floor(L)
    g = L // beta
    out = _identity(m, ctx)
    pos = s
    while g > 0:
        vals = giant_values(A, pos, beta, counter)
        take = min(g, beta + 1)
        for V in vals[:take]:
            out = out * V
        if counter:
            counter.add("matmul", take * m ** 3)
        pos += take * beta
        g -= take
    rest = s + L - pos
    if rest:
        out = out * naive_product(A, pos, rest, counter)
    return out


def giant_values(A, s, beta, counter=None):
    """[B_beta(s + i beta) for i = 0..beta], B_beta(x) = A(x+1)...A(x+beta),
    beta a power of two."""
    M = A.modulus
    m = A.m
    vals = [A.at(s + i * beta + 1) for i in range(2)]
    D = 1
    while D < beta:
        F = [_flat(V) for V in vals]
        X1 = lagrange_shift(F, D, D + 1, M, counter)
        a = D * pow(beta, -1, M) % M
        invs = [pow(D + j * beta, -1, M) * beta % M for j in range(-D, D + 1)]
        X2 = lagrange_shift(F, D, a, M, counter, invs)
        X3 = lagrange_shift(X2, D, D + 1, M, counter)
        left = F + X1
        right = X2 + X3
        ctx = flint.fmpz_mod_ctx(M)
        vals = [flint.fmpz_mod_mat(m, m, left[i], ctx) * flint.fmpz_mod_mat(m, m, right[i], ctx)
                for i in range(2 * D + 1)]
        if counter:
            counter.add("matmul", (2 * D + 1) * m ** 3)
        D *= 2
    return vals


def _flat(V):
    return [int(x) for x in V.entries()]


def lagrange_shift(F, D, a, M, counter=None, invs=None):
    """
    Given F[i] = f(i) for i = 0..D (each a list of E ring elements, the
    entries of a matrix) for a polynomial f of degree <= D, return
    f(a + k) for k = 0..D.  Needs a + j invertible for j in [-D, D] and
    1..D invertible.  ``invs`` may supply 1/(a + j), j = -D..D.
    """
    E = len(F[0])
    if invs is None:
        invs = [pow((a + j) % M, -1, M) for j in range(-D, D + 1)]
    # weights (-1)^(D-i) / (i! (D-i)!)
    fact = [1] * (D + 1)
    for i in range(1, D + 1):
        fact[i] = fact[i - 1] * i % M
    inv_fact = [1] * (D + 1)
    inv_fact[D] = pow(fact[D], -1, M)
    for i in range(D, 0, -1):
        inv_fact[i - 1] = inv_fact[i] * i % M
    w = [(-1) ** (D - i) * inv_fact[i] * inv_fact[D - i] % M for i in range(D + 1)]
    # prefactors P_k = prod_{j=0}^{D} (a + k - j)
    P = [1] * (D + 1)
    acc = 1
    for j in range(D + 1):
        acc = acc * (a - j) % M
    P[0] = acc
    for k in range(1, D + 1):
        # multiply by (a + k) and divide by (a + k - 1 - D)
        acc = acc * ((a + k) % M) % M * invs[k - 1] % M
        P[k] = acc
    # one convolution for all entries: block e holds sum_i w_i F[i][e] x^i
    S = 3 * D + 2
    ctx = flint.fmpz_mod_poly_ctx(M)
    packed = [0] * (E * S)
    for i in range(D + 1):
        wi = w[i]
        Fi = F[i]
        for e in range(E):
            packed[e * S + i] = Fi[e] * wi % M
    g = ctx(invs)
    h = ctx(packed) * g
    coeffs = h.coeffs()
    nco = len(coeffs)
    out = []
    for k in range(D + 1):
        row = []
        Pk = P[k]
        for e in range(E):
            idx = e * S + k + D
            row.append(int(coeffs[idx]) * Pk % M if idx < nco else 0)
        out.append(row)
    if counter:
        counter.add("polymul", _polymul_cost(E * S + 2 * D + 1))
        counter.add("scalar", 6 * (D + 1) + 2 * E * (D + 1))
    return out


def scalar_rising_block(i, p, modulus, method="auto", counter=None):
    """
    (i+1)(i+2)...(i+p) mod ``modulus`` through interval_product with m = 1,
    together with its p-adic valuation (Legendre).

    EXAMPLES::

        >>> scalar_rising_block(5, 5, 5 ** 8)
        (30240, 1)
    """
    A = LinearMatrixPoly.from_rows([[0]], [[1]], modulus)
    val = int(interval_product(A, i, p, p, method, counter).value[0, 0])
    return val, legendre(i + p, p) - legendre(i, p)


def legendre(k, p):
    """ord_p(k!)."""
    v = 0
    while k:
        k //= p
        v += k
    return v
