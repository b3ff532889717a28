"""
Step 3: the Frobenius matrix Phi_1 on the fibre t = 1 from the connection
M = G / r and the Frobenius matrix Phi_0 of the diagonal fibre.

With C the fundamental matrix of horizontal sections (C' + M C = 0,
C(0) = I), Phi = C Phi_0 sigma(C^-1).  Multiplying by s = r^theta and
evaluating at t = 1 after truncation at t^K,

    Phi_1 = sum_{j < ceil(K/p)} E_{K-1-pj} Phi_0 sigma((C^-1)_j),

where E_i = D_0 + ... + D_i are the partial sums of D = (r / r(1))^theta C,
the solution of r D' + H D = 0, H = G - theta r' I, D(0) = (r(0)/r(1))^theta.

Two ways to get the E_i:

* linear: iterate the D recurrence
      r_0 (i+1) D_{i+1} = - sum_l (H_l + (i-l) r_{l+1}) D_{i-l}
  with a window of kappa coefficients, K steps.
* sqrt-p: the vector (E_i, E_{i-1}, ..., E_{i-kappa+1}) obeys
  E_{i+1} = A(i+1) E_i / (i+1) for a kappa b x kappa b matrix A(x) of degree
  1, so ceil(K/p) - 1 jumps of length p, each an interval product
  A(i+p) ... A(i+1) (computed on transposes, since interval_product
  multiplies in increasing order) followed by division by (i+1)...(i+p).

Precision.  Every series is kept in fixed point: an integer matrix X = p^o Y
modulo p^W for a fixed offset o.  Divisions by (i+1) or (i+1)...(i+p) are
exact divisions by the p-part, checked, followed by multiplication by the
inverse of the unit part; a failed check raises PrecisionExhausted and the
driver retries with a larger offset.  The working precision is
W = N_Phi + o_E + o_C + buffer.
"""
from dataclasses import dataclass, asdict, field
from fractions import Fraction
from math import ceil

import flint

from .bgsprod import LinearMatrixPoly, interval_product, legendre, giant_step_condition, NAIVE_THRESHOLD
from .errors import PrecisionExhausted, UnitDenominatorFailure, GenericityFailure
from .padic import ZqMatrix, ZqElem, ScaledMatrix, valuation, INFINITY


# -- precision plan ------------------------------------------------------------

@dataclass
class PrecisionPlan:
    p: int
    a: int
    n: int
    N_phi: int
    N_phi0: int
    theta: int
    h: int
    K: int
    kappa: int
    delta: int
    offset_E: int
    offset_C: int
    W: int
    deg_r: int
    deg_G: int
    ledger: list = field(default_factory=list)

    @property
    def jumps(self):
        return -(-self.K // self.p)

    def as_dict(self):
        out = asdict(self)
        out["ledger_total"] = sum(v for _, v in self.ledger)
        out.pop("ledger")
        return out


def h_of(N, n, p):
    """
    max{i : i + (n-1) + ord_p((n-1)!) - n floor(log_p(p(n+i) - n)) < N}, by
    direct search (the left side grows without bound, so the search stops).

    EXAMPLES::

        >>> h_of(3, 2, 7)
        3
    """
    best = None
    fact_val = legendre(n - 1, p)
    i = 0
    misses = 0
    while misses < 4 * p + 50:
        lhs = i + (n - 1) + fact_val - n * _ilog(p * (n + i) - n, p)
        if lhs < N:
            best = i
            misses = 0
        else:
            misses += 1
        i += 1
    return 0 if best is None else best


def _ilog(x, p):
    k = 0
    while p ** (k + 1) <= x:
        k += 1
    return k


def truncation_K(p, n, h, deg_r, deg_G):
    """K = deg(s) + 1 + (theta - n) * e_inf + p h with s = r^theta, where
    e_inf = max(0, deg G - deg r) is the pole order of M at infinity."""
    theta = p * (n + h)
    e_inf = max(0, deg_G - deg_r)
    return theta * deg_r + 1 + max(0, theta - n) * e_inf + p * h


def precision_plan(p, a, d, n, N_phi, deg_r, deg_G, offset_E=None, offset_C=None,
                   buffer=None, K=None):
    """
    Precision and truncation parameters for Step 3.  ``N_phi`` is the
    absolute p-adic precision wanted for Phi_1.

    The offsets bound the denominators of the E_i and (C^-1)_j; the buffer
    absorbs the digits lost to the exact divisions.  Defaults are
    n ceil(log_p K) + 2 for the offsets and ceil(log_p K) + 3 for the buffer;
    ``delta`` records the accumulated valuation sum_j ord_p of the blocks
    (i+1)...(i+p) over the giant steps for comparison.
    """
    h = h_of(N_phi, n, p)
    theta = p * (n + h)
    if K is None:
        K = truncation_K(p, n, h, deg_r, deg_G)
    deg_H = max(deg_G, deg_r - 1)
    kappa = max(deg_H + 1, deg_r, 1) + 1
    lk = _ilog(max(K, 1), p) + 1
    if offset_E is None:
        offset_E = n * lk + 2
    if offset_C is None:
        offset_C = n * lk + 2
    if buffer is None:
        buffer = lk + 3
    J = -(-K // p)
    i0 = K - 1 - p * (J - 1)
    delta = sum(legendre(i0 + (t + 1) * p, p) - legendre(i0 + t * p, p) for t in range(J - 1)) + 2
    W = N_phi + offset_E + offset_C + buffer
    return PrecisionPlan(p, a, n, N_phi, W, theta, h, K, kappa, delta, offset_E, offset_C, W, deg_r, deg_G)


# -- conversion of the connection to Z_q / p^W ------------------------------

def _to_zq(c, ctx):
    """K-coordinate tuple (ints or Fractions with unit denominators) -> ZqElem."""
    pN = ctx.pN
    out = []
    for x in c:
        x = Fraction(x)
        if x.denominator % ctx.p == 0:
            raise UnitDenominatorFailure("coefficient %s is not p-integral" % x)
        out.append(x.numerator * pow(x.denominator, -1, pN) % pN)
    out += [0] * (ctx.a - len(out))
    return ZqElem(ctx, out[:ctx.a])


@dataclass
class ZqConnection:
    """r_l as ZqElem and G_l as b x b ZqMatrix, l = 0..deg."""
    ctx: object
    b: int
    r: list
    G: list

    @property
    def deg_r(self):
        return len(self.r) - 1

    @property
    def deg_G(self):
        return len(self.G) - 1


def load_connection(conn, ctx):
    b = conn.b
    r = [_to_zq(c, ctx) for c in conn.r]
    deg_G = conn.deg_G
    G = []
    zero = (0,) * ctx.a
    for l in range(deg_G + 1):
        rows = [[_to_zq(conn.G[i][j][l] if l < len(conn.G[i][j]) else zero, ctx)
                 for j in range(b)] for i in range(b)]
        G.append(ZqMatrix.from_entries(ctx, rows))
    return ZqConnection(ctx, b, r, G)


# -- fixed point helpers ------------------------------------------------------

def _divide(X, den, ctx):
    """X / den for an integer den, exact on the p-part (checked)."""
    p = ctx.p
    v = valuation(den, p)
    u = den // p ** v
    if v:
        X = X.divexact_p(v)
    if u != 1:
        X = X.scale(pow(u, -1, ctx.pN))
    return X


def _scal(X, c):
    return X.scale(c)


def _horner_at_one(coeffs, ctx):
    out = ctx.zero()
    for c in coeffs:
        out = out + c
    return out


def initial_D(conn, theta):
    """(r(0) / r(1))^theta, checking that r(0) and r(1) are units."""
    ctx = conn.ctx
    r0 = conn.r[0]
    r1 = _horner_at_one(conn.r, ctx)
    if r0.valuation() > 0:
        raise UnitDenominatorFailure("r(0) is not a unit")
    if r1.valuation() > 0:
        raise GenericityFailure("r(1) is not a unit")
    return (r0 * r1.inverse()) ** theta


# -- series solutions ---------------------------------------------------------

def cminus_series(conn, count, offset=0):
    """
    (C^-1)_j, j < count, stored as p^offset (C^-1)_j, from r Z' = Z G:

        r_0 (i+1) Z_{i+1} = sum_l Z_{i-l} G_l - sum_{l>=1} r_l (i+1-l) Z_{i+1-l}.
    """
    ctx, b = conn.ctx, conn.b
    r0inv = conn.r[0].inverse()
    Z = [ZqMatrix.identity(ctx, b).scale(ctx.p ** offset)]
    for i in range(count - 1):
        acc = ZqMatrix.zero(ctx, b)
        for l, Gl in enumerate(conn.G):
            if i - l < 0:
                break
            acc = acc + Z[i - l] * Gl
        for l in range(1, len(conn.r)):
            k = i + 1 - l
            if k < 0:
                break
            if k:
                acc = acc - Z[k].scale(conn.r[l] * k)
        Z.append(_divide(acc.scale(r0inv), i + 1, ctx))
    return Z


def c_series(conn, count, offset=0):
    """Primal C_i, i < count (p^offset C_i), from r C' + G C = 0."""
    ctx, b = conn.ctx, conn.b
    r0inv = conn.r[0].inverse()
    C = [ZqMatrix.identity(ctx, b).scale(ctx.p ** offset)]
    for i in range(count - 1):
        acc = ZqMatrix.zero(ctx, b)
        for l, Gl in enumerate(conn.G):
            if i - l < 0:
                break
            acc = acc + Gl * C[i - l]
        for l in range(1, len(conn.r)):
            k = i + 1 - l
            if k < 0:
                break
            if k:
                acc = acc + C[k].scale(conn.r[l] * k)
        C.append(_divide(-acc.scale(r0inv), i + 1, ctx))
    return C


def twisted_H(conn, theta):
    """H = G - theta r' I as a list of b x b matrices."""
    ctx, b = conn.ctx, conn.b
    deg = max(conn.deg_G, conn.deg_r - 1)
    H = []
    for l in range(deg + 1):
        M = conn.G[l] if l < len(conn.G) else ZqMatrix.zero(ctx, b)
        if l + 1 < len(conn.r):
            M = M - ZqMatrix.scalar(ctx, b, conn.r[l + 1] * ((l + 1) * theta))
        H.append(M)
    return H


def d_series(conn, theta, count, offset=0):
    """D_i, i < count (p^offset D_i) from r D' + H D = 0 (for tests)."""
    ctx, b = conn.ctx, conn.b
    H = twisted_H(conn, theta)
    D = [ZqMatrix.scalar(ctx, b, initial_D(conn, theta) * ctx.p ** offset)]
    r0inv = conn.r[0].inverse()
    for i in range(count - 1):
        D.append(_d_step(D, i, H, conn.r, r0inv, ctx, b))
    return D


def _d_step(D, i, H, r, r0inv, ctx, b):
    acc = ZqMatrix.zero(ctx, b)
    for l, Hl in enumerate(H):
        if i - l < 0:
            break
        acc = acc + Hl * D[i - l]
    for l in range(len(r) - 1):
        k = i - l
        if k < 0:
            break
        if k:
            acc = acc + D[k].scale(r[l + 1] * k)
    return _divide(-acc.scale(r0inv), i + 1, ctx)


# -- companion form -----------------------------------------------------------

@dataclass
class Companion:
    """A(x) = A0 + x A1 (kappa b x kappa b over Z_q, as ZqMatrix) with
    E_{i+1} = A(i+1) E_i / (i+1) for the stacked vector E_i."""
    A0: ZqMatrix
    A1: ZqMatrix
    kappa: int
    b: int

    def at(self, x):
        return self.A0 + self.A1.scale(x)

    def linear_poly(self):
        """Integer (regular representation) form for bgsprod."""
        return LinearMatrixPoly(self.A0.M, self.A1.M)


def build_companion(conn, theta, kappa=None):
    """
    Assemble A(x) from the E recurrence

        (i+1) E_{i+1} = (i+1) E_i - r_0^-1 sum_l Q_l(i+1) (E_{i-l} - E_{i-l-1}),
        Q_l(x) = H_l + r_{l+1} (x - 1 - l),

    so that the coefficient of E_{i-l} in the first block row is
    x [l = 0] - r_0^-1 (Q_l(x) - Q_{l-1}(x)), and the lower block rows shift
    the window with a factor x.
    """
    ctx, b = conn.ctx, conn.b
    H = twisted_H(conn, theta)
    deg_H = len(H) - 1
    if kappa is None:
        kappa = max(deg_H + 1, conn.deg_r, 1) + 1
    r0inv = conn.r[0].inverse()
    zero = ZqMatrix.zero(ctx, b)

    def Q(l):
        # (constant part, x part) of Q_l, zero outside 0..kappa-2
        if l < 0 or l > kappa - 2:
            return zero, zero
        Hl = H[l] if l < len(H) else zero
        rl1 = conn.r[l + 1] if l + 1 < len(conn.r) else ctx.zero()
        return Hl - ZqMatrix.scalar(ctx, b, rl1 * (1 + l)), ZqMatrix.scalar(ctx, b, rl1)

    I = ZqMatrix.identity(ctx, b)
    top0, top1 = [], []
    for l in range(kappa):
        c0, c1 = Q(l)
        d0, d1 = Q(l - 1)
        B0 = (c0 - d0).scale(r0inv)
        B1 = (c1 - d1).scale(r0inv)
        top0.append(-B0)
        top1.append((I - B1) if l == 0 else -B1)
    blocks0 = [[None] * kappa for _ in range(kappa)]
    blocks1 = [[None] * kappa for _ in range(kappa)]
    for l in range(kappa):
        blocks0[0][l] = top0[l]
        blocks1[0][l] = top1[l]
    for j in range(1, kappa):
        for l in range(kappa):
            blocks0[j][l] = zero
            blocks1[j][l] = I if l == j - 1 else zero
    return Companion(_assemble(ctx, blocks0, b), _assemble(ctx, blocks1, b), kappa, b)


def _assemble(ctx, blocks, b):
    a = ctx.a
    k = len(blocks)
    size = k * b * a
    rows = [[0] * size for _ in range(size)]
    for I_, brow in enumerate(blocks):
        for J_, B in enumerate(brow):
            tab = B.M.tolist()
            for s in range(b * a):
                row = rows[I_ * b * a + s]
                src = tab[s]
                for t in range(b * a):
                    row[J_ * b * a + t] = int(src[t])
    M = flint.fmpz_mod_mat(size, size, [x for r in rows for x in r], ctx.mod_ctx)
    return ZqMatrix(ctx, k * b, k * b, M)


def initial_state(conn, theta, kappa, offset):
    """Stacked vector at i = 0: (E_0, 0, ..., 0), E_0 = D_0."""
    ctx, b = conn.ctx, conn.b
    E0 = ZqMatrix.scalar(ctx, b, initial_D(conn, theta) * ctx.p ** offset)
    return ZqMatrix.stack([E0] + [ZqMatrix.zero(ctx, b)] * (kappa - 1))


# -- Phi_1 ---------------------------------------------------------------------

def _accumulate(E, phi0, Zj):
    return E * phi0 * Zj.sigma()


def phi1_linear(conn, phi0, Cinv, plan, verbose=None):
    """
    Phi_1 by direct iteration of the D recurrence with a kappa-window,
    summing E_{K-1-pj} Phi_0 sigma((C^-1)_j).  ``phi0`` is a ZqMatrix at the
    working precision, ``Cinv`` the stored p^offset_C (C^-1)_j.
    Returns a ScaledMatrix.
    """
    ctx, b, p, K = conn.ctx, conn.b, plan.p, plan.K
    H = twisted_H(conn, plan.theta)
    r0inv = conn.r[0].inverse()
    J = plan.jumps
    i0 = K - 1 - p * (J - 1)
    window = [ZqMatrix.scalar(ctx, b, initial_D(conn, plan.theta) * ctx.p ** plan.offset_E)]
    keep = max(len(H), len(conn.r)) + 1
    E = window[0]
    total = ZqMatrix.zero(ctx, b)
    # window[-1] is D_i; the recurrence needs D_{i-l} for l < keep
    base = 0  # index of window[0]
    for i in range(K):
        if i >= 1:
            D = _d_step_window(window, base, i - 1, H, conn.r, r0inv, ctx, b)
            window.append(D)
            E = E + D
            if len(window) > keep:
                window.pop(0)
                base += 1
        if i >= i0 and (i - i0) % p == 0:
            j = (K - 1 - i) // p
            total = total + _accumulate(E, phi0, Cinv[j])
            if verbose:
                verbose("linear: i = %d, j = %d" % (i, j))
    return _finish(total, plan)


def _d_step_window(window, base, i, H, r, r0inv, ctx, b):
    """D_{i+1} from D_{i}, D_{i-1}, ... stored in window (window[k] = D_{base+k})."""
    acc = ZqMatrix.zero(ctx, b)
    for l, Hl in enumerate(H):
        k = i - l
        if k < base:
            break
        acc = acc + Hl * window[k - base]
    for l in range(len(r) - 1):
        k = i - l
        if k < base:
            break
        if k:
            acc = acc + window[k - base].scale(r[l + 1] * k)
    return _divide(-acc.scale(r0inv), i + 1, ctx)


def phi1_sqrt_p(conn, phi0, Cinv, plan, companion=None, giant="auto", verbose=None, counter=None):
    """
    Phi_1 through the companion recurrence: naive steps up to
    i0 = K - 1 - p (ceil(K/p) - 1), then ceil(K/p) - 1 jumps of length p.

    ``giant``: "giant-step" forces the baby-step/giant-step interval product
    for every jump, "naive" applies the p factors one at a time to the stacked
    vector, "auto" uses giant steps when p >= 256.
    """
    ctx, b, p, K = conn.ctx, conn.b, plan.p, plan.K
    if p <= plan.n:
        raise ValueError("the companion path needs p > n")
    if companion is None:
        companion = build_companion(conn, plan.theta, plan.kappa)
    kappa = companion.kappa
    J = plan.jumps
    i0 = K - 1 - p * (J - 1)
    state = initial_state(conn, plan.theta, kappa, plan.offset_E)
    for i in range(i0):
        state = _divide(companion.at(i + 1) * state, i + 1, ctx)
    mode = giant
    if mode == "auto":
        mode = "giant-step" if (p >= NAIVE_THRESHOLD and giant_step_condition(p, p)) else "naive"
    Alin = companion.linear_poly()
    AlinT = Alin.transpose() if mode == "giant-step" else None
    total = ZqMatrix.zero(ctx, b)
    i = i0
    plan.ledger = []
    for step in range(J):
        j = J - 1 - step
        E = state.block(0, b, 0, b)
        total = total + _accumulate(E, phi0, Cinv[j])
        if step == J - 1:
            break
        if mode == "giant-step":
            PT = interval_product(AlinT, i, p, p, "giant-step", counter).value
            state = ZqMatrix(ctx, state.rows, state.cols, PT.transpose() * state.M)
        else:
            for t in range(1, p + 1):
                state = companion.at(i + t) * state
        den = 1
        for t in range(1, p + 1):
            den *= i + t
        v = valuation(den, p)
        plan.ledger.append((i, v))
        state = _divide(state, den, ctx)
        if verbose:
            verbose("sqrt-p: jump %d -> %d, ord debit %d" % (i, i + p, v))
        i += p
    assert i == K - 1
    return _finish(total, plan)


def _finish(total, plan):
    shift = plan.offset_E + plan.offset_C
    S = ScaledMatrix(total, shift, plan.N_phi)
    return S.normalize()


# -- driver ------------------------------------------------------------------

@dataclass
class Step3Result:
    phi1: ScaledMatrix
    plan: PrecisionPlan
    method: str
    retries: int = 0


def compute_phi1(conn, phi0_mat, plan, method="sqrt-p", giant="auto", verbose=None, max_retries=6,
                 counter=None):
    """
    Run Step 3 with the given plan, enlarging the offsets and the buffer
    (and with them the working precision) when an exact division fails.  ``phi0_mat`` is a
    function N -> ZqMatrix giving Phi_0 at working precision N.
    ``conn`` is a ConnectionData (exact); it is reduced at each precision.
    """
    from .padic import make_context
    tries = 0
    while True:
        W = plan.W
        ctx = make_context(plan.p, plan.a, W, _modulus_of(conn))
        try:
            zc = load_connection(conn, ctx)
            Cinv = cminus_series(zc, plan.jumps, plan.offset_C)
            P0 = phi0_mat(W)
            if method == "linear":
                out = phi1_linear(zc, P0, Cinv, plan, verbose)
            else:
                out = phi1_sqrt_p(zc, P0, Cinv, plan, giant=giant, verbose=verbose, counter=counter)
            return Step3Result(out, plan, method, tries)
        except PrecisionExhausted:
            tries += 1
            if tries > max_retries:
                raise
            # the buffer is raised to at least its default as well: larger
            # offsets alone make the divisions exact again but do not protect
            # the digits shifted out by them
            grow = max(2, plan.offset_E // 2)
            buffer = plan.W - plan.N_phi - plan.offset_E - plan.offset_C
            buffer = max(buffer + grow, _ilog(max(plan.K, 1), plan.p) + 4)
            plan.offset_E += grow
            plan.offset_C += grow
            plan.W = plan.N_phi + plan.offset_E + plan.offset_C + buffer
            plan.N_phi0 = plan.W
            if verbose:
                verbose("precision exhausted; offsets -> %d, %d" % (plan.offset_E, plan.offset_C))


def _modulus_of(conn):
    return [int(c) for c in conn.f]
