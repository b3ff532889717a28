"""
Fixed precision arithmetic in Z_q / p^N, where Z_q = Z_p[y]/(f) is the ring of
integers of the unramified extension of Q_p of degree a.

Elements are stored as tuples of ``a`` integers in [0, p^N), the coordinates in
the power basis 1, y, ..., y^(a-1).  Matrices over Z_q are stored in the
regular representation: a b x c matrix becomes an (a*b) x (a*c) matrix over
Z/p^N whose (i, j) block is the multiplication-by-entry matrix.  With this
layout products of Z_q-matrices are plain flint products, and for a = 1
nothing is lost.

Division by p is never performed on raw coordinates; values with bounded
denominator are carried as ``ScaledZq`` or ``ScaledMatrix`` with an explicit
shift.
"""
from dataclasses import dataclass

import flint

from .errors import NotIrreducible, NotPrime, NotAUnit, PrecisionExhausted

INFINITY = float("inf")


def is_prime(p):
    """Primality test (BPSW through flint; no known counterexample)."""
    return p >= 2 and flint.fmpz(p).is_prime()


def valuation(x, p):
    """p-adic valuation of a nonzero integer, +inf for 0."""
    x = int(x)
    if x == 0:
        return INFINITY
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def default_modulus(p, a):
    """The lexicographically smallest monic irreducible polynomial of degree a
    over F_p, as a coefficient list low to high.  For a = 1 this is y."""
    if a == 1:
        return [0, 1]
    ctx = flint.fmpz_mod_poly_ctx(p)
    for idx in range(p ** a):
        coeffs = []
        t = idx
        for _ in range(a):
            coeffs.append(t % p)
            t //= p
        if coeffs[0] == 0:
            continue
        if ctx(coeffs + [1]).is_irreducible():
            return coeffs + [1]
    raise NotIrreducible("no irreducible polynomial found")


class PadicContext:
    """
    Working ring Z_q / p^N together with the Frobenius lift.

    ``sigma_image`` is the coordinate tuple of sigma(y), the root of f
    congruent to y^p mod p, found by Newton iteration.
    """

    def __init__(self, p, a, N, f):
        if not is_prime(p) or p < 3:
            raise NotPrime("p = %s is not an odd prime" % p)
        if N < 1:
            raise ValueError("precision must be positive")
        f = [int(c) for c in f]
        while len(f) > 1 and f[-1] == 0:
            f.pop()
        if len(f) != a + 1 or f[-1] != 1:
            raise ValueError("f must be monic of degree %s" % a)
        if a > 1 and not flint.fmpz_mod_poly_ctx(p)(f).is_irreducible():
            raise NotIrreducible("f is reducible mod %s" % p)
        self.p = p
        self.a = a
        self.N = N
        self.pN = p ** N
        self.f = tuple(c % self.pN for c in f)
        self.mod_ctx = flint.fmpz_mod_ctx(self.pN)
        # y^k reduced mod f for k < 2a - 1, used by multiplication
        self._powers = self._reduced_powers(2 * a - 1)
        if a == 1:
            self.sigma_image = (self.pN - self.f[0]) % self.pN,
            self._sigma_matrix = None
        else:
            self.sigma_image = self._lift_sigma()
            cols = [self.one().c]
            s = ZqElem(self, self.sigma_image)
            cur = self.one()
            for _ in range(1, a):
                cur = cur * s
                cols.append(cur.c)
            self._sigma_matrix = cols

    def _reduced_powers(self, count):
        a, pN = self.a, self.pN
        out = []
        cur = [0] * a
        cur[0] = 1
        for k in range(count):
            out.append(tuple(cur))
            top = cur[-1]
            cur = [0] + cur[:-1]
            if top:
                cur = [(cur[i] - top * self.f[i]) % pN for i in range(a)]
        return out

    def _lift_sigma(self):
        a, p = self.a, self.p
        # y^p mod (f, p)
        ctx_p = flint.fmpz_mod_poly_ctx(p)
        fp = ctx_p(list(self.f))
        g = ctx_p([0, 1]).pow_mod(p, fp)
        coeffs = [int(c) for c in g.coeffs()] + [0] * a
        s = ZqElem(self, coeffs[:a])
        fprime = [(i * c) % self.pN for i, c in enumerate(self.f)][1:]
        prec = 1
        while True:
            val = self._eval_poly(self.f, s)
            if val.is_zero():
                break
            if prec > 2 * self.N + 2:
                raise PrecisionExhausted("Newton iteration for sigma(y) did not converge")
            s = s - val * self._eval_poly(fprime, s).inverse()
            prec *= 2
        return s.c

    @staticmethod
    def _eval_poly(coeffs, x):
        ctx = x.ctx
        out = ctx.zero()
        for c in reversed(coeffs):
            out = out * x + ctx(c)
        return out

    # -- element constructors --------------------------------------------
    def __call__(self, x):
        if isinstance(x, ZqElem):
            if x.ctx is self:
                return x
            return ZqElem(self, x.c)
        if isinstance(x, (tuple, list)):
            return ZqElem(self, x)
        c = [0] * self.a
        c[0] = int(x)
        return ZqElem(self, c)

    def zero(self):
        return ZqElem(self, (0,) * self.a)

    def one(self):
        return self(1)

    def gen(self):
        if self.a == 1:
            return self((self.pN - self.f[0]) % self.pN)
        c = [0] * self.a
        c[1] = 1
        return ZqElem(self, c)

    def change_precision(self, N):
        """Context with identical f at a different precision.  Cached."""
        cache = self.__dict__.setdefault("_siblings", {})
        if N == self.N:
            return self
        if N not in cache:
            cache[N] = PadicContext(self.p, self.a, N, self.f_lift())
        return cache[N]

    def _mult_tables(self):
        """a x a matrices of multiplication by y^k, k < a (cached)."""
        if not hasattr(self, "_mtab"):
            self._mtab = [_mult_matrix(ZqElem(self, tuple(1 if i == k else 0 for i in range(self.a))))
                          for k in range(self.a)]
        return self._mtab

    def f_lift(self):
        """f with coordinates in the symmetric range, as given."""
        h = self.pN // 2
        return [c - self.pN if c > h else c for c in self.f]

    def __repr__(self):
        return "PadicContext(p=%s, a=%s, N=%s, f=%s)" % (self.p, self.a, self.N, self.f_lift())


def make_context(p, a, N, f=None):
    """
    Build the working ring Z_q / p^N with q = p^a.

    EXAMPLES::

        >>> ctx = make_context(3, 2, 4, [1, 0, 1])
        >>> sigma(ctx.gen(), ctx) == -ctx.gen()
        True
    """
    if f is None:
        f = default_modulus(p, a)
    return PadicContext(p, a, N, f)


class ZqElem:
    __slots__ = ("ctx", "c")

    def __init__(self, ctx, coeffs):
        pN = ctx.pN
        c = tuple(int(x) % pN for x in coeffs)
        if len(c) != ctx.a:
            raise ValueError("expected %s coordinates" % ctx.a)
        self.ctx = ctx
        self.c = c

    def _coerce(self, other):
        if isinstance(other, ZqElem):
            return other
        return self.ctx(other)

    def __add__(self, other):
        o = self._coerce(other)
        pN = self.ctx.pN
        return ZqElem(self.ctx, [(x + y) % pN for x, y in zip(self.c, o.c)])

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return ZqElem(self.ctx, [x - y for x, y in zip(self.c, o.c)])

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return ZqElem(self.ctx, [-x for x in self.c])

    def __mul__(self, other):
        ctx = self.ctx
        if not isinstance(other, ZqElem):
            return ZqElem(ctx, [x * int(other) for x in self.c])
        a = ctx.a
        if a == 1:
            return ZqElem(ctx, (self.c[0] * other.c[0],))
        prod = [0] * (2 * a - 1)
        for i, x in enumerate(self.c):
            if x:
                for j, y in enumerate(other.c):
                    prod[i + j] += x * y
        out = [0] * a
        for k, v in enumerate(prod):
            if v:
                pw = ctx._powers[k]
                for i in range(a):
                    out[i] += v * pw[i]
        return ZqElem(ctx, out)

    __rmul__ = __mul__

    def __pow__(self, e):
        if e < 0:
            return self.inverse() ** (-e)
        out = self.ctx.one()
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, ZqElem):
            return self.c == other.c and self.ctx.pN == other.ctx.pN
        try:
            return self.c == self.ctx(other).c
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash(self.c)

    def is_zero(self):
        return not any(self.c)

    def valuation(self):
        v = min(valuation(x, self.ctx.p) for x in self.c)
        return v if v < self.ctx.N else INFINITY

    def inverse(self):
        return inv(self, self.ctx)

    def sigma(self, k=1):
        return sigma(self, self.ctx, k)

    def lift(self):
        """Coordinates in the symmetric range (-p^N/2, p^N/2]."""
        pN = self.ctx.pN
        h = pN // 2
        return tuple(x - pN if x > h else x for x in self.c)

    def divexact_p(self, v):
        """self / p^v, assuming divisibility; the result is known to N - v
        digits, the top digits are zero padding."""
        pv = self.ctx.p ** v
        if any(x % pv for x in self.c):
            raise PrecisionExhausted("element not divisible by p^%s" % v)
        return ZqElem(self.ctx, [x // pv for x in self.c])

    def __int__(self):
        if any(self.c[1:]):
            raise ValueError("element is not in Z_p")
        return self.c[0]

    def __repr__(self):
        if self.ctx.a == 1:
            return "%s" % self.c[0]
        return "Zq%s" % (self.c,)


def sigma(x, ctx=None, k=1):
    """Frobenius lift applied k times (coordinatewise linear map)."""
    ctx = ctx or x.ctx
    if ctx.a == 1:
        return x
    cols = ctx._sigma_matrix
    a, pN = ctx.a, ctx.pN
    c = x.c
    for _ in range(k % a):
        c = [sum(c[j] * cols[j][i] for j in range(a)) % pN for i in range(a)]
    return ZqElem(ctx, c)


def ord_p(x, ctx=None):
    """Valuation; INFINITY when the element vanishes at the working precision."""
    if isinstance(x, ScaledZq):
        v = x.unit_part.valuation()
        return v if v == INFINITY else v - x.shift
    if isinstance(x, ZqElem):
        return x.valuation()
    v = valuation(int(x) % ctx.pN, ctx.p)
    return v if v < ctx.N else INFINITY


def inv(x, ctx=None):
    """Inverse of a unit by Newton iteration from the inverse mod p."""
    ctx = ctx or x.ctx
    if not isinstance(x, ZqElem):
        x = ctx(x)
    p, a = ctx.p, ctx.a
    if all(c % p == 0 for c in x.c):
        raise NotAUnit("%r is not a unit" % (x,))
    if a == 1:
        return ZqElem(ctx, (pow(x.c[0], -1, ctx.pN),))
    Fp = flint.fmpz_mod_poly_ctx(p)
    g, s, _ = Fp(list(x.c)).xgcd(Fp(list(ctx.f)))
    s = s * g.coeffs()[0].inverse() if g.degree() == 0 else None
    coeffs = [int(c) for c in s.coeffs()] + [0] * a
    y = ZqElem(ctx, coeffs[:a])
    two = ctx(2)
    prec = 1
    while prec < ctx.N:
        y = y * (two - x * y)
        prec *= 2
    return y


@dataclass(frozen=True)
class ScaledZq:
    """The element unit_part * p^(-shift); unit_part need not be a unit."""
    unit_part: ZqElem
    shift: int

    def __mul__(self, other):
        return ScaledZq(self.unit_part * other.unit_part, self.shift + other.shift)

    def value_mod(self, k):
        """Coordinates of p^shift * value reduced mod p^k."""
        m = self.unit_part.ctx.p ** k
        return tuple(c % m for c in self.unit_part.c)


# -- matrices over Z_q -------------------------------------------------------

class ZqMatrix:
    """
    Matrix over Z_q / p^N in the regular representation (see module doc).

    Entries are ZqElem; arithmetic goes through flint's fmpz_mod_mat.
    """
    __slots__ = ("ctx", "rows", "cols", "M")

    def __init__(self, ctx, rows, cols, M):
        self.ctx = ctx
        self.rows = rows
        self.cols = cols
        self.M = M

    # construction
    @classmethod
    def zero(cls, ctx, rows, cols=None):
        cols = rows if cols is None else cols
        a = ctx.a
        return cls(ctx, rows, cols, flint.fmpz_mod_mat(rows * a, cols * a, ctx.mod_ctx))

    @classmethod
    def identity(cls, ctx, n):
        return cls.scalar(ctx, n, 1)

    @classmethod
    def scalar(cls, ctx, n, c):
        c = ctx(c)
        return cls.from_entries(ctx, [[c if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def from_entries(cls, ctx, entries):
        rows = len(entries)
        cols = len(entries[0]) if rows else 0
        a = ctx.a
        if a == 1:
            flat = []
            for row in entries:
                for x in row:
                    flat.append(x.c[0] if isinstance(x, ZqElem) else int(x))
            return cls(ctx, rows, cols, flint.fmpz_mod_mat(rows, cols, flat, ctx.mod_ctx))
        big = [[0] * (cols * a) for _ in range(rows * a)]
        for i, row in enumerate(entries):
            for j, x in enumerate(row):
                x = ctx(x)
                if x.is_zero():
                    continue
                block = _mult_matrix(x)
                for s in range(a):
                    for t in range(a):
                        big[i * a + s][j * a + t] = block[s][t]
        flat = [v for row in big for v in row]
        return cls(ctx, rows, cols, flint.fmpz_mod_mat(rows * a, cols * a, flat, ctx.mod_ctx))

    @classmethod
    def from_int_rows(cls, ctx, rows_):
        """From a list of rows of python ints (a = 1 fast path or embedded Z_p)."""
        return cls.from_entries(ctx, [[ctx(v) if ctx.a > 1 else v for v in row] for row in rows_])

    def entries(self):
        a = self.ctx.a
        raw = self.M.tolist() if a > 1 else None
        if a == 1:
            flat = [int(x) for x in self.M.entries()]
            c = self.cols
            ctx = self.ctx
            return [[ZqElem(ctx, (flat[i * c + j],)) for j in range(c)] for i in range(self.rows)]
        out = []
        for i in range(self.rows):
            row = []
            for j in range(self.cols):
                row.append(ZqElem(self.ctx, [int(raw[i * a + s][j * a]) for s in range(a)]))
            out.append(row)
        return out

    def coordinate_rows(self):
        """Nested lists of coordinate tuples (for serialization and comparison)."""
        return [[x.c for x in row] for row in self.entries()]

    def __getitem__(self, ij):
        i, j = ij
        a = self.ctx.a
        return ZqElem(self.ctx, [int(self.M[i * a + s, j * a]) for s in range(a)])

    # arithmetic
    def __add__(self, other):
        return ZqMatrix(self.ctx, self.rows, self.cols, self.M + other.M)

    def __sub__(self, other):
        return ZqMatrix(self.ctx, self.rows, self.cols, self.M - other.M)

    def __neg__(self):
        return ZqMatrix(self.ctx, self.rows, self.cols, -self.M)

    def __mul__(self, other):
        if isinstance(other, ZqMatrix):
            if self.cols != other.rows:
                raise ValueError("dimension mismatch")
            return ZqMatrix(self.ctx, self.rows, other.cols, self.M * other.M)
        return self.scale(other)

    __matmul__ = __mul__

    def scale(self, c):
        ctx = self.ctx
        if isinstance(c, ZqElem) and ctx.a > 1:
            if not any(c.c[1:]):
                return ZqMatrix(ctx, self.rows, self.cols, self.M * c.c[0])
            return ZqMatrix.scalar(ctx, self.rows, c) * self
        c = c.c[0] if isinstance(c, ZqElem) else int(c) % ctx.pN
        return ZqMatrix(ctx, self.rows, self.cols, self.M * c)

    __rmul__ = scale

    def __eq__(self, other):
        return (isinstance(other, ZqMatrix) and self.rows == other.rows
                and self.cols == other.cols and self.ctx.pN == other.ctx.pN
                and self.M == other.M)

    def is_zero(self):
        return all(int(x) == 0 for x in self.M.entries())

    def transpose(self):
        if self.ctx.a == 1:
            return ZqMatrix(self.ctx, self.cols, self.rows, self.M.transpose())
        e = self.entries()
        return ZqMatrix.from_entries(self.ctx, [list(col) for col in zip(*e)])

    def sigma(self, k=1):
        if self.ctx.a == 1:
            return self
        return ZqMatrix.from_entries(self.ctx, [[sigma(x, self.ctx, k) for x in row] for row in self.entries()])

    def valuation(self):
        p = self.ctx.p
        v = min((valuation(int(x), p) for x in self.M.entries()), default=INFINITY)
        return v if v < self.ctx.N else INFINITY

    def divexact_p(self, v):
        """
        Divide every entry by p^v after checking divisibility.

        For a > 1 only the coordinates (first column of each block) are
        divided and the blocks are rebuilt.  Dividing the whole block would
        leave its zero-padded top digits off the image of the regular
        representation, and such a component is propagated by products as a
        Z_p-linear map rather than a Z_q-scalar, which destroys the error
        behaviour of the recurrences using this.
        """
        if v == 0:
            return self
        ctx = self.ctx
        pv = ctx.p ** v
        a = ctx.a
        if a == 1:
            flat = [int(x) for x in self.M.entries()]
            for x in flat:
                if x % pv:
                    raise PrecisionExhausted("matrix entry not divisible by p^%s" % v)
            M = flint.fmpz_mod_mat(self.M.nrows(), self.M.ncols(), [x // pv for x in flat], ctx.mod_ctx)
            return ZqMatrix(ctx, self.rows, self.cols, M)
        tab = self.M.tolist()
        coords = []
        for i in range(self.rows):
            for j in range(self.cols):
                c = [int(tab[i * a + s][j * a]) for s in range(a)]
                if any(x % pv for x in c):
                    raise PrecisionExhausted("matrix entry not divisible by p^%s" % v)
                coords.append([x // pv for x in c])
        return ZqMatrix._from_coordinates(ctx, self.rows, self.cols, coords)

    @staticmethod
    def _from_coordinates(ctx, rows, cols, coords):
        """Regular representation from row-major coordinate lists (a > 1)."""
        a, pN = ctx.a, ctx.pN
        L = ctx._mult_tables()
        width = cols * a
        flat = [0] * (rows * a * width)
        for i in range(rows):
            for j in range(cols):
                c = coords[i * cols + j]
                nz = [(k, x) for k, x in enumerate(c) if x]
                if not nz:
                    continue
                for s in range(a):
                    base = (i * a + s) * width + j * a
                    for t in range(a):
                        flat[base + t] = sum(x * L[k][s][t] for k, x in nz) % pN
        return ZqMatrix(ctx, rows, cols, flint.fmpz_mod_mat(rows * a, width, flat, ctx.mod_ctx))

    def reduce(self, k):
        """Entries reduced mod p^k (still stored at precision N)."""
        m = self.ctx.p ** k
        flat = [int(x) % m for x in self.M.entries()]
        M = flint.fmpz_mod_mat(self.M.nrows(), self.M.ncols(), flat, self.ctx.mod_ctx)
        return ZqMatrix(self.ctx, self.rows, self.cols, M)

    def change_ring(self, ctx):
        """Reinterpret the integer coordinates in a context with the same p and f."""
        flat = [int(x) for x in self.M.entries()]
        M = flint.fmpz_mod_mat(self.M.nrows(), self.M.ncols(), flat, ctx.mod_ctx)
        return ZqMatrix(ctx, self.rows, self.cols, M)

    def block(self, r0, r1, c0, c1):
        """Submatrix rows r0:r1, cols c0:c1 (in Z_q units)."""
        a = self.ctx.a
        tab = self.M.tolist()
        flat = [int(tab[i][j]) for i in range(r0 * a, r1 * a) for j in range(c0 * a, c1 * a)]
        M = flint.fmpz_mod_mat((r1 - r0) * a, (c1 - c0) * a, flat, self.ctx.mod_ctx)
        return ZqMatrix(self.ctx, r1 - r0, c1 - c0, M)

    @staticmethod
    def stack(blocks):
        """Vertical concatenation."""
        ctx = blocks[0].ctx
        rows = []
        for B in blocks:
            rows.extend(B.M.tolist())
        cols = blocks[0].cols
        flat = [int(x) for row in rows for x in row]
        total = sum(B.rows for B in blocks)
        M = flint.fmpz_mod_mat(total * ctx.a, cols * ctx.a, flat, ctx.mod_ctx)
        return ZqMatrix(ctx, total, cols, M)

    def __repr__(self):
        return "ZqMatrix(%sx%s over %r)" % (self.rows, self.cols, self.ctx)


def _mult_matrix(x):
    """a x a matrix of multiplication by x in the power basis."""
    ctx = x.ctx
    a = ctx.a
    cols = []
    basis = [ctx(tuple(1 if i == j else 0 for i in range(a))) for j in range(a)]
    for e in basis:
        cols.append((x * e).c)
    return [[cols[t][s] for t in range(a)] for s in range(a)]


@dataclass
class ScaledMatrix:
    """
    The matrix p^(-shift) * mat, whose entries are known modulo p^prec
    (absolute precision of the value, not of mat).
    """
    mat: ZqMatrix
    shift: int
    prec: int

    def normalize(self):
        """Absorb common powers of p into the shift without losing precision."""
        v = self.mat.valuation()
        if v == INFINITY or v == 0 or self.shift == 0:
            return self
        v = min(v, self.shift)
        return ScaledMatrix(self.mat.divexact_p(v), self.shift - v, self.prec)

    def numerators_mod(self):
        """Entries of p^shift * value reduced mod p^(prec + shift), symmetric lift."""
        k = self.prec + self.shift
        m = self.mat.ctx.p ** k
        h = m // 2
        out = []
        for row in self.mat.entries():
            out.append([tuple((c % m) - m if (c % m) > h else (c % m) for c in x.c) for x in row])
        return out

    def equal_mod(self, other, k=None):
        """Equality of the values modulo p^k (default: the smaller precision)."""
        k = min(self.prec, other.prec) if k is None else k
        s = max(self.shift, other.shift)
        A = self.mat.change_ring(self.mat.ctx.change_precision(max(self.mat.ctx.N, other.mat.ctx.N) + s))
        B = other.mat.change_ring(A.ctx)
        A = A.scale(self.mat.ctx.p ** (s - self.shift))
        B = B.scale(self.mat.ctx.p ** (s - other.shift))
        return A.reduce(k + s) == B.reduce(k + s)


def scaled_matrix_to_dict(S):
    """JSON-friendly form: p, a, f, shift, prec and the integer coordinates of
    p^shift * value (symmetric residues mod p^(prec + shift))."""
    ctx = S.mat.ctx
    return {"p": ctx.p, "a": ctx.a, "f": ctx.f_lift(), "shift": S.shift, "prec": S.prec,
            "rows": [[list(x) for x in row] for row in S.numerators_mod()]}


def scaled_matrix_from_dict(D):
    prec, shift = D["prec"], D["shift"]
    ctx = make_context(D["p"], D["a"], prec + shift, D["f"])
    mat = ZqMatrix.from_entries(ctx, [[ctx(tuple(x)) for x in row] for row in D["rows"]])
    return ScaledMatrix(mat, shift, prec)
