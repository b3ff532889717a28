"""
From the Frobenius matrix to the zeta function: the q-power Frobenius, its
characteristic polynomial lifted to Z using the Weil bounds, assembly of
Z(X, T), and the Weil sanity checks.
"""
from dataclasses import dataclass, field
from math import comb

import flint

from .errors import ChecksFailed, PrecisionTooLow
from .padic import ScaledMatrix, ZqMatrix
from .polyhyp import betti


@dataclass
class ZetaFunction:
    """Z(X, T) = numerator / denominator for a hypersurface in P^n over F_q.

    ``chi`` is det(1 - T Frob_q | primitive middle cohomology) with integer
    coefficients listed from the constant term up."""
    q: int
    n: int
    chi: list
    numerator: list = field(default_factory=list)
    denominator: list = field(default_factory=list)

    def counts(self, m):
        """|X(F_{q^i})| for i = 1..m from the logarithmic derivative."""
        return counts_from_chi(self.chi, self.q, self.n, m)

    def as_dict(self):
        return {"q": self.q, "n": self.n, "chi": list(self.chi),
                "numerator": list(self.numerator), "denominator": list(self.denominator)}

    def __eq__(self, other):
        return (isinstance(other, ZetaFunction) and self.q == other.q and self.n == other.n
                and list(self.numerator) == list(other.numerator)
                and list(self.denominator) == list(other.denominator))


def poly_mul(f, g):
    out = [0] * (len(f) + len(g) - 1)
    for i, x in enumerate(f):
        if x:
            for j, y in enumerate(g):
                out[i + j] += x * y
    return out


def assemble_zeta(chi, q, n):
    """Z = chi^{(-1)^n} / ((1 - T)(1 - qT)...(1 - q^{n-1}T))."""
    chi = [int(c) for c in chi]
    base = [1]
    for j in range(n):
        base = poly_mul(base, [1, -q ** j])
    if n % 2 == 0:
        num, den = chi, base
    else:
        num, den = [1], poly_mul(chi, base)
    return ZetaFunction(q, n, chi, num, den)


def power_sums_from_chi(chi, m):
    """Power sums of the reciprocal roots of chi, by Newton's identities."""
    c = list(chi) + [0] * (m + 1)
    P = []
    for k in range(1, m + 1):
        s = -k * c[k] - sum(c[k - j] * P[j - 1] for j in range(1, k))
        P.append(s)
    return P


def counts_from_chi(chi, q, n, m):
    P = power_sums_from_chi(chi, m)
    return [sum(q ** (i * j) for j in range(n)) + (-1) ** (n + 1) * P[i - 1] for i in range(1, m + 1)]


# -- q-power Frobenius and its characteristic polynomial --------------------

def frobenius_q(phi1):
    """Phi^(a) = Phi_1 sigma(Phi_1) ... sigma^(a-1)(Phi_1) as a ScaledMatrix."""
    ctx = phi1.mat.ctx
    a = ctx.a
    X = phi1.mat
    out = X
    for k in range(1, a):
        out = out * X.sigma(k)
    return ScaledMatrix(out, a * phi1.shift, phi1.prec - (a - 1) * phi1.shift)


def berkowitz(A, one, zero):
    """
    Coefficients [1, c_1, ..., c_m] of det(lambda I - A) = lambda^m + c_1
    lambda^(m-1) + ... for a square matrix over any commutative ring, without
    divisions.  Equivalently det(1 - T A) = sum c_i T^i.
    """
    m = len(A)
    vec = [one]
    for k in range(m - 1, -1, -1):
        size = m - k
        R = A[k][k + 1:]
        C = [A[i][k] for i in range(k + 1, m)]
        sub = [row[k + 1:] for row in A[k + 1:]]
        col = [one, zero - A[k][k]]
        v = C
        for _ in range(size - 1):
            s = zero
            for x, y in zip(R, v):
                s = s + x * y
            col.append(zero - s)
            v = [_dot(row, v, zero) for row in sub]
        new = []
        for i in range(size + 1):
            s = zero
            for j in range(max(0, i - size), min(i, size - 1) + 1):
                s = s + col[i - j] * vec[j]
            new.append(s)
        vec = new
    return vec


def _dot(r, v, zero):
    s = zero
    for x, y in zip(r, v):
        s = s + x * y
    return s


def coefficient_bounds(b, q, n):
    """|c_i| <= C(b, i) q^{i(n-1)/2}, returned as the integer ceilings."""
    out = []
    for i in range(b + 1):
        e = i * (n - 1)
        bound = comb(b, i) * q ** (e // 2)
        if e % 2:
            bound = bound * _isqrt_ceil(q)
        out.append(bound)
    return out


def _isqrt_ceil(x):
    from math import isqrt
    s = isqrt(x)
    return s if s * s == x else s + 1


def char_poly_lift(phiq, p, q, n, b):
    """
    chi(T) = det(1 - T Phi^(a)) over Z from the p-adic approximation.

    ``phiq`` is a ScaledMatrix p^(-s) X whose value is known mod p^prec.
    Coefficient c_i is read off modulo p^(prec + s - i s) and lifted to the
    symmetric range when that modulus exceeds twice the Weil bound; the
    remaining coefficients come from the functional equation.  For odd n
    the sign of the functional equation is fixed by a pair of coefficients
    that are both known directly.  Raises PrecisionTooLow otherwise.
    """
    ctx = phiq.mat.ctx
    s = phiq.shift
    P = phiq.prec + s
    entries = phiq.mat.entries()
    cp = berkowitz(entries, ctx.one(), ctx.zero())
    bounds = coefficient_bounds(b, q, n)
    known = {}
    for i, c in enumerate(cp):
        digits = P - i * s
        if digits <= 0:
            continue
        mod = p ** digits
        if mod <= 2 * bounds[i]:
            continue
        coords = c.c
        pis = p ** (i * s)
        if any(x % p ** min(i * s, ctx.N) for x in coords):
            raise PrecisionTooLow("coefficient %d not divisible by p^%d" % (i, i * s))
        vals = [(x // pis) % mod for x in coords]
        if any(vals[1:]):
            raise ChecksFailed("coefficient %d of the characteristic polynomial is not in Z_p" % i)
        v = vals[0]
        known[i] = v - mod if v > mod // 2 else v
    chi = [None] * (b + 1)
    for i, v in known.items():
        chi[i] = v
    eps = 1
    if n % 2 == 1:
        eps = None
        for i in range(b + 1):
            j = b - i
            if i in known and j in known and known[i] != 0 and i <= j:
                e2 = (n - 1) * (j - i)
                eps = 1 if known[j] == q ** (e2 // 2) * known[i] else -1
                if known[j] != eps * q ** (e2 // 2) * known[i]:
                    raise ChecksFailed("functional equation violated at %d, %d" % (i, j))
                break
        if eps is None:
            if all(chi[i] is not None for i in range(b + 1)):
                eps = 1
            else:
                raise PrecisionTooLow("cannot determine the sign of the functional equation")
    for i in range(b + 1):
        if chi[i] is None:
            j = b - i
            if chi[j] is None:
                raise PrecisionTooLow("coefficient %d undetermined at this precision" % i)
            e2 = (n - 1) * (i - j)
            if e2 >= 0:
                chi[i] = eps * q ** (e2 // 2) * chi[j]
            else:
                scale = q ** (-e2 // 2)
                if chi[j] % scale:
                    raise ChecksFailed("functional equation violated at %d, %d" % (i, j))
                chi[i] = eps * chi[j] // scale
    return chi


def traces_lift(phiq, p, q, n, b, m):
    """Power sums tr((Phi^(a))^i), i = 1..m, lifted to Z; enough for the first
    m point counts when the full characteristic polynomial is out of reach."""
    s = phiq.shift
    P = phiq.prec + s
    X = phiq.mat
    Y = X
    out = []
    for i in range(1, m + 1):
        digits = P - i * s
        bound = b * q ** ((i * (n - 1) + 1) // 2) + 1
        mod = p ** digits if digits > 0 else 1
        if mod <= 2 * bound:
            raise PrecisionTooLow("trace of power %d undetermined" % i)
        e = Y.entries()
        tr = e[0][0].ctx.zero()
        for k in range(len(e)):
            tr = tr + e[k][k]
        pis = p ** (i * s)
        if any(x % pis for x in tr.c):
            raise PrecisionTooLow("trace %d not divisible by p^%d" % (i, i * s))
        vals = [(x // pis) % mod for x in tr.c]
        if any(vals[1:]):
            raise ChecksFailed("trace %d not in Z_p" % i)
        v = vals[0]
        out.append(v - mod if v > mod // 2 else v)
        Y = Y * X
    return out


def counts_from_traces(traces, q, n):
    return [sum(q ** (i * j) for j in range(n)) + (-1) ** (n + 1) * t for i, t in enumerate(traces, start=1)]


# -- Weil checks --------------------------------------------------------------

def reciprocal_roots(chi):
    """Reciprocal roots of chi with multiplicity, as (complex, mult) pairs,
    from an exact factorization over Z followed by root isolation."""
    f = flint.fmpz_poly(list(reversed(chi)))
    # roots of T^b chi(1/T) are the reciprocal roots of chi
    out = []
    _, factors = f.factor()
    for g, e in factors:
        if g.degree() < 1:
            continue
        for z in g.complex_roots():
            z = z[0] if isinstance(z, tuple) else z
            out.append((complex(z), e))
    return out


def weil_checks(Z, b=None, counts=None, tol=1e-6, strict=True):
    """
    Report on the Weil properties of Z: chi integral of degree b, reciprocal
    roots of absolute value q^{(n-1)/2} paired under alpha -> q^{n-1}/alpha,
    and nonnegative integer point counts.  Optional ``counts`` are compared to
    the counts predicted by Z.  Raises ChecksFailed listing violations.
    """
    q, n, chi = Z.q, Z.n, Z.chi
    report = {}
    problems = []
    if b is not None:
        report["degree"] = len(chi) - 1 == b and chi[-1] != 0
        if not report["degree"]:
            problems.append("degree of chi is %d, expected %s" % (len(chi) - 1, b))
    report["integral"] = all(isinstance(c, int) for c in chi) and chi[0] == 1
    if not report["integral"]:
        problems.append("chi is not an integral polynomial with constant term 1")
    roots = reciprocal_roots(chi)
    target = q ** ((n - 1) / 2)
    absolute = all(abs(abs(z) / target - 1) < tol for z, _ in roots)
    paired = True
    for z, e in roots:
        w = q ** (n - 1) / z
        if not any(abs(w - y) < tol * target and e == f for y, f in roots):
            paired = False
    report["absolute_values"] = absolute
    report["pairing"] = paired
    if not absolute:
        problems.append("reciprocal roots off the circle |alpha| = q^{(n-1)/2}")
    if not paired:
        problems.append("reciprocal roots not paired under alpha -> q^{n-1}/alpha")
    m = max(len(chi) - 1, 1)
    predicted = counts_from_chi(chi, q, n, m)
    report["nonnegative_counts"] = all(x >= 0 for x in predicted)
    if not report["nonnegative_counts"]:
        problems.append("negative point count predicted")
    if counts is not None:
        agree = list(predicted[:len(counts)]) == list(counts)
        report["oracle_counts"] = agree
        if not agree:
            problems.append("predicted counts %s differ from %s" % (predicted[:len(counts)], list(counts)))
    report["ok"] = not problems
    report["problems"] = problems
    if problems and strict:
        raise ChecksFailed("; ".join(problems))
    return report


def check_chi_degree(chi, n, d):
    return len(chi) - 1 == betti(n, d)


def frobenius_matrix_to_int_rows(X):
    """Debug helper: integer coordinates of a ZqMatrix."""
    return [[list(x.c) for x in row] for row in ZqMatrix.entries(X)]
