"""
Gauss-Manin connection of the pencil P = (1 - t) P_0 + t P_1 on the basis
of forms x^u Omega / P^k(u), u in the monomial basis.

Pole order reduction.  At pole order k the numerators have degree
D_k = k d - n - 1.  Every monomial w of degree D_k either lies in B_k or has
some exponent w_i >= d - 1; for the latter we use the column
x^(w - (d-1) e_i) dP/dx_i with the smallest such i.  Together with the unit
columns of B_k this gives a square matrix Delta_k(t) which at t = 0 is
diagonal with entries 1 or d a_i, so it is invertible for generic t.  Writing
a numerator Q = sum_{u in B_k} c_u x^u + sum_i A_i dP/dx_i, the second part is
replaced by (1/(k-1)) sum_i dA_i/dx_i at pole order k - 1.

The connection matrix M(t) = G(t)/r(t) is recovered exactly over
K = Q[y]/(f) by evaluating the reduction at many points t = tau modulo word
size primes l which split f, reconstructing each entry as a rational
function, and combining primes by CRT and rational reconstruction.  The
result is checked at a fresh prime and fresh points before it is returned.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd

import flint

from .errors import GenericityFailure, NotInJacobianIdeal, UnitDenominatorFailure
from .polyhyp import HomogPoly, MonomialBasis, monomial_basis, monomial_index, diagonal

PRIME_START = (1 << 62) - 57


# -- the pencil -------------------------------------------------------------

@dataclass
class Pencil:
    """P(t) = (1 - t) P_0 + t P_1 with P_0 = sum a_i x_i^d.

    Coefficients of P_1 are integer coordinate tuples over the power basis of
    f (the lift of the defining polynomial of F_q); a_i are integers prime to
    p."""
    n: int
    d: int
    P1: HomogPoly
    a_vec: tuple
    f: tuple = (0, 1)
    p: int = None

    def __post_init__(self):
        self.a = len(self.f) - 1
        self.a_vec = tuple(int(x) for x in self.a_vec)
        if len(self.a_vec) != self.n + 1:
            raise ValueError("need n + 1 diagonal coefficients")
        self.P1 = self.P1.map_coefficients(self._coerce)
        if self.p is not None:
            for x in self.a_vec:
                if x % self.p == 0:
                    raise ValueError("diagonal coefficient %s is not a unit mod %s" % (x, self.p))
        self.P0 = diagonal(self.n, self.d, self.a_vec, self._coerce)
        diff = dict((e, c) for e, c in self.P1.terms.items())
        for e, c in self.P0.terms.items():
            old = diff.get(e, (0,) * self.a)
            diff[e] = tuple(x - y for x, y in zip(old, c))
        self.diff = HomogPoly(self.n, self.d, diff)

    def _coerce(self, c):
        if isinstance(c, int):
            c = (c,)
        c = tuple(int(x) for x in c) + (0,) * self.a
        return c[:self.a]

    @property
    def basis(self):
        return monomial_basis(self.n, self.d)


# -- the number field K = Q[y]/(f) --------------------------------------------

class NumberField:
    """Elements are tuples of a Fractions (power basis coordinates)."""

    def __init__(self, f):
        self.f = tuple(int(c) for c in f)
        self.a = len(f) - 1
        self._f = flint.fmpq_poly(list(self.f))

    def __call__(self, c):
        if isinstance(c, (int, Fraction)):
            c = (c,)
        c = [Fraction(x) for x in c] + [Fraction(0)] * self.a
        if any(c[self.a:]):
            return self._from_poly(flint.fmpq_poly([_q(x) for x in c]) % self._f)
        return tuple(c[:self.a])

    def _from_poly(self, g):
        cs = [Fraction(int(x.p), int(x.q)) for x in g.coeffs()] + [Fraction(0)] * self.a
        return tuple(cs[:self.a])

    def _to_poly(self, x):
        return flint.fmpq_poly([_q(c) for c in x])

    def zero(self):
        return (Fraction(0),) * self.a

    def one(self):
        return self(1)

    def add(self, x, y):
        return tuple(u + v for u, v in zip(x, y))

    def sub(self, x, y):
        return tuple(u - v for u, v in zip(x, y))

    def mul(self, x, y):
        if self.a == 1:
            return (x[0] * y[0],)
        return self._from_poly((self._to_poly(x) * self._to_poly(y)) % self._f)

    def inv(self, x):
        if self.a == 1:
            return (1 / x[0],)
        g, s, _ = self._to_poly(x).xgcd(self._f)
        return self._from_poly((s / g) % self._f)

    def is_zero(self, x):
        return not any(x)

    def eval_poly(self, coeffs, tau):
        """coeffs: list of K elements; tau: Fraction."""
        out = self.zero()
        for c in reversed(coeffs):
            out = self.add(tuple(v * tau for v in out), c)
        return out

    def mult_block(self, x):
        """a x a rational matrix of multiplication by x."""
        a = self.a
        cols = []
        for j in range(a):
            e = [0] * a
            e[j] = 1
            cols.append(self.mul(x, self(e)))
        return [[cols[t][s] for t in range(a)] for s in range(a)]


def _q(x):
    x = Fraction(x)
    return flint.fmpq(x.numerator, x.denominator)


# -- the reduction structure ----------------------------------------------------

@dataclass
class Level:
    k: int
    D: int
    mons: list
    index: dict
    basis_rows: dict           # row -> basis index, for w in B_k
    choice: dict               # row -> (i, m) for w not in B_k


@lru_cache(maxsize=None)
def reduction_levels(n, d):
    basis = monomial_basis(n, d)
    bidx = {u: j for j, u in enumerate(basis.entries)}
    levels = {}
    for k in range(1, n + 2):
        D = k * d - n - 1
        if D < 0:
            levels[k] = Level(k, D, [], {}, {}, {})
            continue
        mons, index = monomial_index(n + 1, D)
        basis_rows, choice = {}, {}
        for row, w in enumerate(mons):
            if k <= n and w in bidx:
                basis_rows[row] = bidx[w]
                continue
            i = min(i for i in range(n + 1) if w[i] >= d - 1)
            m = list(w)
            m[i] -= d - 1
            choice[row] = (i, tuple(m))
        levels[k] = Level(k, D, list(mons), dict(index), basis_rows, choice)
    return basis, levels


@dataclass
class PencilSystem:
    """Sparse description of all linear systems used by the reduction.

    For level k >= 2:
      delta[k]: list of (row, col, c0, c1) meaning Delta_k(t)[row, col] gets
                c0 + t c1 (c0 an int, c1 a K coordinate tuple of ints);
      deriv[k]: list of (row', col, Fraction) for the map A -> (1/(k-1)) sum dA_i/dx_i
                from level k to level k - 1;
    inject[k]: list of (row, j, coeff tuple) for the numerators -(k-1) x^u (P_1 - P_0)
               of d/dt applied to basis elements u at level k - 1."""
    pencil: Pencil
    basis: MonomialBasis
    levels: dict
    delta: dict = field(default_factory=dict)
    deriv: dict = field(default_factory=dict)
    inject: dict = field(default_factory=dict)


def build_system(pencil):
    n, d = pencil.n, pencil.d
    basis, levels = reduction_levels(n, d)
    S = PencilSystem(pencil, basis, levels)
    zero = (0,) * pencil.a
    # partial derivatives of P_0 (int) and of P_1 - P_0 (K)
    dP0 = []
    dD = []
    for i in range(n + 1):
        e = [0] * (n + 1)
        e[i] = d - 1
        dP0.append((tuple(e), d * pencil.a_vec[i]))
        terms = {}
        for ex, c in pencil.diff.terms.items():
            if ex[i]:
                g = list(ex)
                g[i] -= 1
                terms[tuple(g)] = tuple(ex[i] * x for x in c)
        dD.append(terms)
    for k in range(2, n + 2):
        L = levels[k]
        entries = []
        for row in L.basis_rows:
            entries.append((row, row, 1, zero))
        for col, (i, m) in L.choice.items():
            acc = {}
            e0, c0 = dP0[i]
            w = tuple(x + y for x, y in zip(e0, m))
            acc[L.index[w]] = [c0, zero]
            for ex, c in dD[i].items():
                w = tuple(x + y for x, y in zip(ex, m))
                cur = acc.setdefault(L.index[w], [0, zero])
                cur[1] = tuple(x + y for x, y in zip(cur[1], c))
            for row, (a0, a1) in acc.items():
                entries.append((row, col, a0, a1))
        S.delta[k] = entries
        # derivative map to level k - 1
        Lm = levels[k - 1]
        der = []
        for col, (i, m) in L.choice.items():
            if m[i] == 0:
                continue
            g = list(m)
            g[i] -= 1
            der.append((Lm.index[tuple(g)], col, Fraction(m[i], k - 1)))
        S.deriv[k] = der
    for k in range(2, n + 2):
        L = levels[k]
        inj = []
        for j, u in enumerate(basis.entries):
            if basis.k[j] != k - 1:
                continue
            for ex, c in pencil.diff.terms.items():
                w = tuple(x + y for x, y in zip(ex, u))
                inj.append((L.index[w], j, tuple(-(k - 1) * x for x in c)))
        S.inject[k] = inj
    return S


# -- evaluation modulo a prime --------------------------------------------------

class ModularSystem:
    """The PencilSystem reduced modulo a prime l along an embedding y -> rho."""

    def __init__(self, S, ell, rho):
        self.S, self.ell, self.rho = S, ell, rho
        a = S.pencil.a
        self.rho_pows = [pow(rho, j, ell) for j in range(a)]
        n = S.pencil.n
        b = S.basis.b
        self.b = b
        self.n = n
        self.D0, self.D1, self.Der, self.Inj, self.Sel = {}, {}, {}, {}, {}
        for k in range(2, n + 2):
            Lk = S.levels[k]
            Dk = len(Lk.mons)
            M0 = [0] * (Dk * Dk)
            M1 = [0] * (Dk * Dk)
            for row, col, c0, c1 in S.delta[k]:
                M0[row * Dk + col] = (M0[row * Dk + col] + c0) % ell
                M1[row * Dk + col] = (M1[row * Dk + col] + self.embed(c1)) % ell
            self.D0[k] = flint.nmod_mat(Dk, Dk, M0, ell)
            self.D1[k] = flint.nmod_mat(Dk, Dk, M1, ell)
            Dm = len(S.levels[k - 1].mons)
            der = [0] * (Dm * Dk)
            for row, col, v in S.deriv[k]:
                der[row * Dk + col] = v.numerator * pow(v.denominator, -1, ell) % ell
            self.Der[k] = flint.nmod_mat(Dm, Dk, der, ell) if Dm else None
        for k in range(1, n + 2):
            Lk = S.levels[k]
            Dk = len(Lk.mons)
            inj = [0] * (Dk * b)
            for row, j, c in S.inject.get(k, []):
                inj[row * b + j] = (inj[row * b + j] + self.embed(c)) % ell
            self.Inj[k] = flint.nmod_mat(Dk, b, inj, ell) if Dk else None
            sel = [0] * (b * Dk)
            for row, j in Lk.basis_rows.items():
                sel[j * Dk + row] = 1
            self.Sel[k] = flint.nmod_mat(b, Dk, sel, ell) if Dk else None

    def embed(self, c):
        ell = self.ell
        if isinstance(c, int):
            return c % ell
        s = 0
        for x, r in zip(c, self.rho_pows):
            x = Fraction(x)
            s += x.numerator * pow(x.denominator, -1, ell) * r
        return s % ell

    def reduce_columns(self, tau, V):
        """Reduce numerators V (dict level -> nmod_mat with D_k rows) at t = tau.
        Returns the b x c coordinate matrix, or None if some Delta_k(tau) is
        singular."""
        n = self.n
        out = None
        carry = None
        for k in range(n + 1, 0, -1):
            Vk = V.get(k)
            if carry is not None:
                Vk = carry if Vk is None else Vk + carry
            if Vk is None:
                carry = None
                continue
            if k >= 2:
                A = self.D0[k] + self.D1[k] * tau
                try:
                    Z = A.solve(Vk)
                except ZeroDivisionError:
                    return None
                part = self.Sel[k] * Z
                out = part if out is None else out + part
                carry = self.Der[k] * Z if self.Der[k] is not None else None
            else:
                part = self.Sel[1] * Vk
                out = part if out is None else out + part
        return out

    def connection_at(self, tau):
        V = {k: self.Inj[k] for k in range(2, self.n + 2) if self.Inj[k] is not None}
        return self.reduce_columns(tau, V)


def split_primes(f, start=PRIME_START):
    """Primes l < start (descending) such that f has a distinct roots mod l."""
    a = len(f) - 1
    ell = start
    while True:
        ell = _prev_prime(ell)
        if a == 1:
            yield ell, [(-int(f[0])) % ell]
            continue
        g = flint.nmod_poly([int(c) % ell for c in f], ell)
        roots = [int(r) for r, e in g.roots()]
        if len(roots) == a:
            yield ell, sorted(roots)


def _prev_prime(x):
    x -= 1
    while not flint.fmpz(x).is_prime():
        x -= 1
    return x


# -- rational function reconstruction modulo a prime ---------------------------

def interpolate_columns(points, rows, ell):
    """Given values rows[i][e] = F_e(points[i]) (T points, E functions),
    return the T x E coefficient matrix (low degree first)."""
    T = len(points)
    V = flint.nmod_mat(T, T, [pow(x, j, ell) for x in points for j in range(T)], ell)
    Y = flint.nmod_mat(T, len(rows[0]), [v for r in rows for v in r], ell)
    return V.solve(Y)


def ratrecon_poly(m, modpoly, ell, deg_num_max):
    """Find (num, den) with num = den * m mod modpoly, deg num <= deg_num_max,
    deg den <= deg(modpoly) - deg_num_max - 1, den(0) = 1.  None on failure."""
    r0, r1 = modpoly, m
    s0, s1 = flint.nmod_poly([0], ell), flint.nmod_poly([1], ell)
    while r1.degree() > deg_num_max:
        q, rr = divmod(r0, r1)
        r0, r1 = r1, rr
        s0, s1 = s1, s0 - q * s1
    if s1.degree() < 0:
        return None
    c0 = int(s1[0])
    if c0 == 0:
        return None
    inv = pow(c0, -1, ell)
    num, den = r1 * inv, s1 * inv
    if ((num - den * m) % modpoly).degree() >= 0:
        return None
    return num, den


@dataclass
class ModularConnection:
    """Common denominator r (r(0) = 1) and numerators G modulo l, for one
    embedding."""
    r: object
    G: list


def reconstruct_mod_ell(evaluate, b_rows, b_cols, ell, T, extra=4, start=2):
    """
    Evaluate a matrix of rational functions at T + extra points modulo ell and
    reconstruct the common denominator r and the numerators.  ``evaluate``
    returns an nmod_mat or None when the point is singular.  Returns
    (r, G) as nmod_polys, or None if T points were not enough.
    """
    points, rows = [], []
    tau = start
    while len(points) < T + extra:
        val = evaluate(tau)
        if val is not None:
            points.append(tau)
            rows.append([int(x) for x in val.entries()])
        tau += 1
        if tau - start > 4 * (T + extra) + 50:
            raise NotInJacobianIdeal("reduction singular at too many points; pencil not generic")
    fit_pts, fit_rows = points[:T], rows[:T]
    coeffs = interpolate_columns(fit_pts, fit_rows, ell)
    E = b_rows * b_cols
    modpoly = flint.nmod_poly([1], ell)
    for x in fit_pts:
        modpoly *= flint.nmod_poly([-x % ell, 1], ell)
    half = (T - 1) // 2
    r = flint.nmod_poly([1], ell)
    nums = []
    col = coeffs.tolist() if hasattr(coeffs, "tolist") else None
    raw = [[int(col[i][e]) for i in range(T)] for e in range(E)]
    dens = []
    for e in range(E):
        m = flint.nmod_poly(raw[e], ell)
        if m.degree() < 0:
            nums.append(None)
            dens.append(None)
            continue
        rec = ratrecon_poly(m, modpoly, ell, half)
        if rec is None or rec[1].degree() > T - 1 - half:
            return None
        nums.append(rec[0])
        dens.append(rec[1])
        r = _lcm(r, rec[1])
    if r.degree() >= half - 1:
        return None
    c0 = int(r[0])
    r = r * pow(c0, -1, ell)
    G = []
    for e in range(E):
        if nums[e] is None:
            G.append(flint.nmod_poly([0], ell))
        else:
            G.append(nums[e] * (r // dens[e]))
    if max((g.degree() for g in G), default=0) >= half:
        return None
    # check at the extra points
    for x, vals in zip(points[T:], rows[T:]):
        rx = int(r(x))
        if rx == 0:
            continue
        for e in range(E):
            if int(G[e](x)) != vals[e] * rx % ell:
                return None
    return r, G


def _lcm(u, v):
    g = u.gcd(v)
    return (u * v) // g


# -- integer and rational reconstruction ---------------------------------------

def ratrecon(a, m):
    """Rational x = num/den with x = a mod m and |num|, den <= sqrt(m/2).
    None if no such fraction exists."""
    a %= m
    bound = _isqrt(m // 2)
    r0, r1 = m, a
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound:
        return None
    if s1 < 0:
        r1, s1 = -r1, -s1
    if gcd(r1, s1) != 1:
        return None
    return Fraction(r1, s1)


def _isqrt(x):
    from math import isqrt
    return isqrt(x)


@dataclass
class ConnectionData:
    """M = G / r exactly over K = Q[y]/(f).

    ``r``: list of K-coordinate tuples of integers, content 1, r(0) prime to p.
    ``G``: b x b nested lists of polynomials, each a list of K-coordinate
    tuples of Fractions.  ``G_den`` is a common denominator of all G
    coordinates (informational)."""
    r: list
    G: list
    f: tuple
    b: int

    @property
    def deg_r(self):
        return len(self.r) - 1

    @property
    def deg_G(self):
        return max((len(g) - 1 for row in self.G for g in row if g), default=-1)

    def G_den(self):
        den = 1
        for row in self.G:
            for g in row:
                for c in g:
                    for x in c:
                        den = den * Fraction(x).denominator // gcd(den, Fraction(x).denominator)
        return den

    def as_dict(self):
        """Integer-coefficient serialization: r, and G_num with G = G_num / G_den."""
        den = self.G_den()
        return {
            "r": [list(c) for c in self.r],
            "G_den": den,
            "G_num": [[[[int(x * den) for x in c] for c in g] for g in row] for row in self.G],
        }

    def evaluate(self, tau):
        """M(tau) over K for a rational tau."""
        K = NumberField(self.f)
        rt = K.eval_poly([K(c) for c in self.r], Fraction(tau))
        ri = K.inv(rt)
        return [[K.mul(K.eval_poly([K(c) for c in g] or [K.zero()], Fraction(tau)), ri) for g in row] for row in self.G]


def _vandermonde_solve(rhos, values, ell):
    a = len(rhos)
    if a == 1:
        return [values[0] % ell]
    V = flint.nmod_mat(a, a, [pow(r, j, ell) for r in rhos for j in range(a)], ell)
    Y = flint.nmod_mat(a, 1, [v % ell for v in values], ell)
    X = V.solve(Y)
    return [int(X[j, 0]) for j in range(a)]


def reconstruct_rational_matrix(S, make_eval, b_rows, b_cols, T0=16, max_primes=400, verbose=None):
    """
    Exact reconstruction of a matrix of rational functions in t over K from
    modular evaluations.  ``make_eval(ms)`` maps a ModularSystem to a function
    tau -> nmod_mat (or None).  Returns (r, Gentries) where r is a list of K
    tuples (Fractions) normalized by r(0) = 1 and Gentries[e] a list of K
    tuples (Fractions).
    """
    f = S.pencil.f
    a = S.pencil.a
    E = b_rows * b_cols
    T = T0
    primes = split_primes(f)
    residues = []   # list of (ell, r_coords, G_coords)
    signature = None
    previous = None
    used = 0
    while True:
        ell, rhos = next(primes)
        used += 1
        if used > max_primes:
            raise NotInJacobianIdeal("rational reconstruction did not stabilize")
        per_embedding = []
        ok = True
        for rho in rhos:
            ms = ModularSystem(S, ell, rho)
            ev = make_eval(ms)
            while True:
                res = reconstruct_mod_ell(ev, b_rows, b_cols, ell, T)
                if res is not None:
                    break
                T *= 2
                if T > 4096:
                    raise NotInJacobianIdeal("degree of the connection exceeds reconstruction limit")
            per_embedding.append(res)
        degs = tuple([per_embedding[0][0].degree()] + [max(g.degree() for g in per_embedding[0][1])])
        for r_, G_ in per_embedding[1:]:
            if r_.degree() != degs[0]:
                ok = False
        if not ok:
            continue
        if signature is None or degs[0] > signature[0]:
            if signature is not None:
                residues = []
            signature = degs
        elif degs[0] < signature[0]:
            continue
        dr = signature[0]
        # K coordinates modulo ell
        r_coords = []
        for i in range(dr + 1):
            vals = [int(res[0][i]) if i <= res[0].degree() else 0 for res in per_embedding]
            r_coords.append(_vandermonde_solve(rhos, vals, ell))
        G_coords = []
        for e in range(E):
            deg = max(res[1][e].degree() for res in per_embedding)
            poly = []
            for i in range(deg + 1):
                vals = [int(res[1][e][i]) if i <= res[1][e].degree() else 0 for res in per_embedding]
                poly.append(_vandermonde_solve(rhos, vals, ell))
            G_coords.append(poly)
        residues.append((ell, r_coords, G_coords))
        if verbose:
            verbose("prime %d: deg r = %d" % (len(residues), dr))
        current = _crt_and_reconstruct(residues, a)
        if current is not None and current == previous:
            r, G = current
            if _verify(S, make_eval, r, G, b_rows, b_cols, primes):
                return r, G
            previous = None
            continue
        previous = current


def _crt_and_reconstruct(residues, a):
    """Combine residues of all primes; None if some coordinate fails to
    reconstruct."""
    mod = 1
    for ell, _, _ in residues:
        mod *= ell

    def combine(get):
        x, m = 0, 1
        for ell, rc, gc in residues:
            v = get(rc, gc)
            # x = x mod m, v mod ell
            t = ((v - x) * pow(m, -1, ell)) % ell
            x += m * t
            m *= ell
        return ratrecon(x, m)

    dr = len(residues[0][1]) - 1
    r = []
    for i in range(dr + 1):
        coords = []
        for j in range(a):
            q = combine(lambda rc, gc: rc[i][j])
            if q is None:
                return None
            coords.append(q)
        r.append(tuple(coords))
    G = []
    E = len(residues[0][2])
    for e in range(E):
        deg = max(len(res[2][e]) for res in residues) - 1
        poly = []
        for i in range(deg + 1):
            coords = []
            for j in range(a):
                q = combine(lambda rc, gc: gc[e][i][j] if i < len(gc[e]) else 0)
                if q is None:
                    return None
                coords.append(q)
            poly.append(tuple(coords))
        while poly and not any(poly[-1]):
            poly.pop()
        G.append(poly)
    return r, G


def _verify(S, make_eval, r, G, b_rows, b_cols, primes, npoints=3):
    """Check G(tau) = r(tau) M(tau) at a fresh prime and fresh points."""
    ell, rhos = next(primes)
    a = S.pencil.a
    for rho in rhos:
        ms = ModularSystem(S, ell, rho)
        ev = make_eval(ms)
        rmod = flint.nmod_poly([ms.embed(c) for c in r], ell)
        Gmod = [flint.nmod_poly([ms.embed(c) for c in g] or [0], ell) for g in G]
        tau = 7919
        done = 0
        while done < npoints:
            tau += 104729
            val = ev(tau)
            if val is None:
                continue
            vals = [int(x) for x in val.entries()]
            rx = int(rmod(tau))
            for e in range(b_rows * b_cols):
                if int(Gmod[e](tau)) != vals[e] * rx % ell:
                    return False
            done += 1
    return True


def _normalize_content(r, G, K):
    """Scale (r, G) by a common rational so r has coprime integer coordinates."""
    den = 1
    for c in r:
        for x in c:
            den = den * x.denominator // gcd(den, x.denominator)
    num = 0
    for c in r:
        for x in c:
            num = gcd(num, int(x * den))
    scale = Fraction(den, num)
    r2 = [tuple(int(x * scale) for x in c) for c in r]
    G2 = [[[tuple(x * scale for x in c) for c in g] for g in row] for row in G]
    return r2, G2


def gauss_manin(pencil, verbose=None):
    """
    Connection matrix M = G / r of the pencil on the monomial basis, with
    d/dt omega_j = sum_i M[i][j] omega_i.

    The denominator r is the least common denominator of the entries of M,
    scaled to have coprime integer coordinates; r(0) is then a nonzero
    integer.  If p is known for the pencil, r and G are checked to be
    p-integral with r(0), r(1) units mod p.
    """
    S = build_system(pencil)
    b = S.basis.b
    K = NumberField(pencil.f)
    if not pencil.diff.terms:
        one = (1,) + (0,) * (pencil.a - 1)
        return ConnectionData([one], [[[] for _ in range(b)] for _ in range(b)], pencil.f, b)
    r, Gflat = reconstruct_rational_matrix(S, lambda ms: ms.connection_at, b, b, verbose=verbose)
    G = [[Gflat[i * b + j] for j in range(b)] for i in range(b)]
    r, G = _normalize_content(r, G, K)
    data = ConnectionData(r, G, pencil.f, b)
    if pencil.p is not None:
        check_p_integral(data, pencil.p)
    return data


def check_p_integral(data, p):
    from .polyhyp import check_generic_pencil
    if all(x % p == 0 for x in data.r[0]):
        raise UnitDenominatorFailure("r(0) is divisible by p")
    for row in data.G:
        for g in row:
            for c in g:
                for x in c:
                    if Fraction(x).denominator % p == 0:
                        raise UnitDenominatorFailure("G has a denominator divisible by p")
    f = tuple(int(c) for c in data.f)
    if not check_generic_pencil(data.r, p, f):
        ex = GenericityFailure("r vanishes mod p at t = 1")
        ex.at_one = True
        raise ex


# -- exact reduction at a rational fibre ---------------------------------------

def _realify(rows, K):
    """Rational matrix of a K matrix (entries K tuples), a x a blocks."""
    a = K.a
    nr, nc = len(rows), len(rows[0])
    out = [[Fraction(0)] * (nc * a) for _ in range(nr * a)]
    for i, row in enumerate(rows):
        for j, x in enumerate(row):
            if not any(x):
                continue
            blk = K.mult_block(x)
            for s in range(a):
                for t in range(a):
                    out[i * a + s][j * a + t] = blk[s][t]
    return out


def _fmpq_mat(rows):
    nr, nc = len(rows), len(rows[0]) if rows else 0
    return flint.fmpq_mat(nr, nc, [_q(x) for row in rows for x in row])


def reduce_at(pencil, tau, numerators, S=None):
    """
    Exact reduction over K at the fibre t = tau (a rational number).

    ``numerators`` maps a pole order k to a list of b' numerators, each a dict
    exponent -> K tuple (degree D_k).  Returns b x b' coordinates as K tuples.
    Raises NotInJacobianIdeal if some Delta_k(tau) is singular.
    """
    S = S or build_system(pencil)
    K = NumberField(pencil.f)
    a = K.a
    tau = Fraction(tau)
    n = pencil.n
    b = S.basis.b
    ncols = len(next(iter(numerators.values())))
    carry = None
    out = [[K.zero() for _ in range(ncols)] for _ in range(b)]
    for k in range(n + 1, 0, -1):
        L = S.levels[k]
        Dk = len(L.mons)
        V = [[K.zero() for _ in range(ncols)] for _ in range(Dk)]
        for c, num in enumerate(numerators.get(k, [])):
            for e, val in num.items():
                V[L.index[e]][c] = K.add(V[L.index[e]][c], K(val))
        if carry is not None:
            V = [[K.add(x, y) for x, y in zip(r1, r2)] for r1, r2 in zip(V, carry)]
        if Dk == 0:
            carry = None
            continue
        if k == 1:
            for row, j in L.basis_rows.items():
                for c in range(ncols):
                    out[j][c] = K.add(out[j][c], V[row][c])
            break
        A = [[K.zero() for _ in range(Dk)] for _ in range(Dk)]
        for row, col, c0, c1 in S.delta[k]:
            val = K.add(K(c0), tuple(Fraction(x) * tau for x in K(c1)))
            A[row][col] = K.add(A[row][col], val)
        Ar = _fmpq_mat(_realify(A, K))
        Vr = _fmpq_mat(_realify_cols(V, K))
        try:
            Zr = Ar.solve(Vr)
        except ZeroDivisionError:
            raise NotInJacobianIdeal("Delta_%d singular at t = %s" % (k, tau))
        Z = [[tuple(Fraction(int(Zr[i * a + s, c].p), int(Zr[i * a + s, c].q)) for s in range(a))
              for c in range(ncols)] for i in range(Dk)]
        for row, j in L.basis_rows.items():
            for c in range(ncols):
                out[j][c] = K.add(out[j][c], Z[row][c])
        Lm = S.levels[k - 1]
        carry = [[K.zero() for _ in range(ncols)] for _ in range(len(Lm.mons))]
        for row, col, v in S.deriv[k]:
            for c in range(ncols):
                carry[row][c] = K.add(carry[row][c], tuple(x * v for x in Z[col][c]))
    return out


def _realify_cols(V, K):
    """Columns of K-vectors to rational matrix with a x 1 blocks (coordinates)."""
    a = K.a
    out = []
    for row in V:
        for s in range(a):
            out.append([x[s] for x in row])
    return out


def connection_at(pencil, tau, S=None):
    """M(tau) computed directly by exact reduction at the fibre t = tau."""
    S = S or build_system(pencil)
    numerators = {}
    b = S.basis.b
    for k in range(2, pencil.n + 2):
        cols = []
        for j in range(b):
            num = {}
            if S.basis.k[j] == k - 1:
                u = S.basis.entries[j]
                for e, c in pencil.diff.terms.items():
                    w = tuple(x + y for x, y in zip(e, u))
                    num[w] = tuple(-(k - 1) * x for x in c)
            cols.append(num)
        numerators[k] = cols
    return reduce_at(pencil, tau, numerators, S)


def griffiths_dwork_reduce(numerator, k, pencil, tau=None, S=None):
    """
    Class of numerator * Omega / P^k in the basis.  With ``tau`` given the
    reduction is done exactly on the fibre t = tau and the coordinates are K
    elements; otherwise the coordinates are returned as rational functions
    (den, nums) in t over K, reconstructed from modular evaluations.
    """
    S = S or build_system(pencil)
    num = {e: pencil._coerce(c) for e, c in numerator.terms.items()}
    if tau is not None:
        res = reduce_at(pencil, tau, {k: [num]}, S)
        return [row[0] for row in res]
    b = S.basis.b

    def make_eval(ms):
        Lk = S.levels[k]
        Dk = len(Lk.mons)
        vec = [0] * Dk
        for e, c in num.items():
            vec[Lk.index[e]] = (vec[Lk.index[e]] + ms.embed(c)) % ms.ell
        V = {k: flint.nmod_mat(Dk, 1, vec, ms.ell)}
        return lambda tau: ms.reduce_columns(tau, V)

    r, nums = reconstruct_rational_matrix(S, make_eval, b, 1)
    return r, nums
