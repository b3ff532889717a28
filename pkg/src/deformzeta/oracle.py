"""
Brute force point counting on projective hypersurfaces over F_{q^i} and
reconstruction of the zeta function from enough counts.

This is the independent check of the p-adic pipeline: it shares nothing with
it except the input polynomial.  Field arithmetic uses flint's fq_default
for setting up log / antilog tables, after which evaluation over all points
is vectorized with numpy.
"""
from fractions import Fraction

import flint
import numpy as np

from .errors import TooLarge, Inconsistent
from .polyhyp import betti

DEFAULT_MAX_SIZE = 10 ** 9


class _TableField:
    """F_Q with elements encoded as integers sum c_j p^j (c_j the coordinates in
    flint's default polynomial basis), with log tables for multiplication."""

    def __init__(self, p, k):
        self.p, self.k = p, k
        self.Q = Q = p ** k
        self.F = flint.fq_default_ctx(p, k)
        g = self._primitive_element()
        exp = np.zeros(Q - 1, dtype=np.int64)
        log = np.full(Q, -1, dtype=np.int64)
        x = self.F.one()
        for e in range(Q - 1):
            idx = self.index(x)
            exp[e] = idx
            log[idx] = e
            x = x * g
        assert self.index(x) == 1 and (log[1:] >= 0).all()
        self.exp, self.log = exp, log
        self.pows = [p ** j for j in range(k)]

    def index(self, x):
        out = 0
        for j, c in enumerate(x.to_list()):
            out += int(c) * self.p ** j
        return out

    def _primitive_element(self):
        order = self.Q - 1
        primes = [int(q) for q, _ in flint.fmpz(order).factor()] if order > 1 else []
        one = self.F.one()
        # deterministic search through elements by index
        for idx in range(1, self.Q):
            coeffs = []
            t = idx
            for _ in range(self.k):
                coeffs.append(t % self.p)
                t //= self.p
            g = self.F(coeffs)
            if all(g ** (order // q) != one for q in primes):
                return g
        raise AssertionError("no primitive element")

    def add(self, A, B):
        p = self.p
        out = np.zeros_like(A)
        for pw in self.pows:
            out += ((A // pw + B // pw) % p) * pw
        return out


def _embed_coefficients(P, p, f, T):
    """Map the F_q coefficients of P (coordinate tuples w.r.t. f) into T = F_Q."""
    a = len(f) - 1
    F = T.F
    if a == 1:
        root = F(-int(f[0]) % p)
    else:
        R = flint.fq_default_poly_ctx(F)
        roots = [r for r, _ in R([int(c) for c in f]).roots()]
        if not roots:
            raise ValueError("F_q does not embed in this field")
        root = min(roots, key=T.index)
    out = []
    for e, c in sorted(P.terms.items()):
        c = (c,) if isinstance(c, int) else tuple(c)
        val = F.zero()
        pw = F.one()
        for cj in c:
            val = val + F(int(cj) % p) * pw
            pw = pw * root
        if not val.is_zero():
            out.append((e, T.index(val)))
    return out


def count_points(P, p, f=(0, 1), i=1, max_size=DEFAULT_MAX_SIZE, chunk=1 << 20):
    """
    Number of points of the hypersurface P = 0 in P^n over F_{q^i}, where
    q = p^a and P has coefficients in F_q given as coordinate tuples relative
    to f (or ints when a = 1).

    EXAMPLES::

        >>> from deformzeta.polyhyp import HomogPoly
        >>> count_points(HomogPoly(2, 3, {(3,0,0): 1, (0,3,0): 1, (0,0,3): 1}), 2)
        3
    """
    a = len(f) - 1
    n = P.n
    Q = p ** (a * i)
    if Q ** n > max_size:
        raise TooLarge("(q^i)^n = %s exceeds the enumeration guard %s" % (Q ** n, max_size))
    T = _TableField(p, a * i)
    terms = _embed_coefficients(P, p, f, T)
    log, exp, M = T.log, T.exp, Q - 1
    total = 0
    # chart k: x_0 = ... = x_{k-1} = 0, x_k = 1, the rest free
    for k in range(n + 1):
        m = n - k
        size = Q ** m
        for start in range(0, size, chunk):
            idx = np.arange(start, min(size, start + chunk), dtype=np.int64)
            coords = {}
            for j in range(m):
                coords[k + 1 + j] = idx % Q
                idx = idx // Q
            acc = np.zeros(len(coords[k + 1]) if m else 1, dtype=np.int64)
            for e, c in terms:
                if any(e[j] for j in range(k)):
                    continue
                L = np.full_like(acc, log[c])
                alive = np.ones_like(acc, dtype=bool)
                for j in range(k + 1, n + 1):
                    if e[j]:
                        X = coords[j]
                        alive &= X != 0
                        L = L + e[j] * log[X]
                val = np.where(alive, exp[np.where(alive, L, 0) % M], 0)
                acc = T.add(acc, val)
            total += int(np.count_nonzero(acc == 0))
    return total


def count_points_naive(P, p, f=(0, 1), i=1):
    """Scalar enumeration with flint field elements; used to test count_points."""
    from itertools import product
    a = len(f) - 1
    T = _TableField(p, a * i)
    F = T.F
    terms = _embed_coefficients(P, p, f, T)
    elems = []
    for idx in range(T.Q):
        coeffs, t = [], idx
        for _ in range(T.k):
            coeffs.append(t % p)
            t //= p
        elems.append(F(coeffs))
    coeff_vals = {c: elems[c] for _, c in terms}
    n = P.n
    total = 0
    for k in range(n + 1):
        for rest in product(range(T.Q), repeat=n - k):
            pt = [F.zero()] * k + [F.one()] + [elems[r] for r in rest]
            s = F.zero()
            for e, c in terms:
                v = coeff_vals[c]
                for j in range(n + 1):
                    v = v * pt[j] ** e[j]
                s = s + v
            total += s.is_zero()
    return total


def required_counts(b, n):
    """Number of counts from which the functional equation pins down chi
    (for odd n up to the sign, which needs one more)."""
    return b // 2 if n % 2 == 0 else (b + 1) // 2


def zeta_from_counts(counts, b, q, n):
    """
    Rebuild chi(T) from |X(F_{q^i})|, i = 1..len(counts), using Newton's
    identities and the functional equation c_{b-i} = eps q^{(n-1)(b-2i)/2} c_i.
    Returns a ZetaFunction.  When n is odd the sign eps is taken from the
    counts if they reach far enough, otherwise both signs are tried and an
    Inconsistent error is raised if the counts cannot decide.
    """
    from .zeta import assemble_zeta
    counts = list(counts)
    K = len(counts)
    power_sums = []
    for i, N in enumerate(counts, start=1):
        power_sums.append((-1) ** (n + 1) * (N - sum(q ** (i * j) for j in range(n))))
    c = [Fraction(1)]
    for k in range(1, min(K, b) + 1):
        s = sum(c[k - j] * power_sums[j - 1] for j in range(1, k + 1))
        c.append(-s / k)
    if any(x.denominator != 1 for x in c):
        raise Inconsistent("non-integral coefficients from counts")
    c = [int(x) for x in c]
    half = b // 2
    if len(c) - 1 < half:
        raise Inconsistent("need at least %s counts" % half)
    candidates = []
    for eps in ([1] if n % 2 == 0 else [1, -1]):
        full = [None] * (b + 1)
        for i in range(min(len(c), b + 1)):
            full[i] = c[i]
        ok = True
        for i in range(half + 1):
            e2 = (n - 1) * (b - 2 * i)
            if e2 % 2:
                ok = False
                break
            val = eps * q ** (e2 // 2) * c[i]
            j = b - i
            if full[j] is not None and full[j] != val:
                ok = False
                break
            full[j] = val
        if ok and None not in full:
            candidates.append(full)
    if not candidates:
        raise Inconsistent("no chi of degree %s fits the counts" % b)
    if len(candidates) > 1:
        raise Inconsistent("counts do not determine the sign of the functional equation")
    return assemble_zeta(candidates[0], q, n)


def oracle_zeta(P, p, f=(0, 1), max_size=DEFAULT_MAX_SIZE):
    """Zeta function of the smooth hypersurface P = 0 over F_q from counts.
    Returns (ZetaFunction, counts used)."""
    a = len(f) - 1
    q = p ** a
    n, d = P.n, P.d
    b = betti(n, d)
    need = required_counts(b, n)
    counts = [count_points(P, p, f, i, max_size) for i in range(1, need + 1)]
    while True:
        try:
            return zeta_from_counts(counts, b, q, n), counts
        except Inconsistent as ex:
            # odd n: the sign can need one more count when c_i = 0 in the middle
            if "sign" not in str(ex) or len(counts) >= b:
                raise
            counts.append(count_points(P, p, f, len(counts) + 1, max_size))
