"""
End-to-end computation of Z(X, T) for a job description.

A job names the field F_q (p, a and optionally the modulus f), the polynomial
P_1 defining X, and the solver options.  ``run`` performs

    validation -> Gauss-Manin connection of (1 - t) P_0 + t P_1
               -> Frobenius of the diagonal fibre
               -> Frobenius of X by solving the Frobenius equation
               -> characteristic polynomial, zeta function, Weil checks

and returns a JSON-ready document.  The document depends only on the job
(no timings, sorted keys), so identical jobs give identical bytes.
"""
import json
import random
import re
import time
from dataclasses import dataclass, field, asdict

from . import __version__
from .deform import precision_plan, compute_phi1
from .diagfrob import phi0
from .errors import (DeformZetaError, ValidationError, NotPrime, NotSmooth, NotIrreducible, GenericityFailure,
                     PrecisionTooLow, Inconsistent, TooLarge)
from .gaussmanin import Pencil, gauss_manin
from .oracle import oracle_zeta, count_points, DEFAULT_MAX_SIZE
from .padic import is_prime, make_context, default_modulus, scaled_matrix_to_dict
from .polyhyp import HomogPoly, betti, check_smooth, substitute_linear
from .zeta import (frobenius_q, char_poly_lift, assemble_zeta, coefficient_bounds, weil_checks,
                   ZetaFunction)

METHODS = ("sqrt-p", "linear", "both", "oracle")
VARIABLES = "xyzwvuts"


@dataclass
class JobSpec:
    """
    Input of one computation.

    ``terms`` maps exponent tuples to coefficient coordinate tuples over the
    power basis 1, g, ..., g^(a-1) of F_q = F_p[g]/(f).  ``N_target`` is the
    p-adic precision of the Frobenius matrix; None picks the smallest value
    the Weil bounds allow.  ``diagonal`` gives the a_i of P_0 (default all 1;
    re-drawn with ``seed`` if the pencil is not generic).
    """
    p: int
    terms: dict
    n: int
    d: int
    a: int = 1
    f: list = None
    N_target: int = None
    diagonal: list = None
    method: str = "sqrt-p"
    giant: str = "auto"
    factorials: str = "table"
    seed: int = 0
    genericity_retries: int = 5
    precision_retries: int = 3
    check_oracle: bool = False
    max_oracle_size: int = DEFAULT_MAX_SIZE

    def __post_init__(self):
        if self.f is None and self.a >= 1 and is_prime(self.p):
            self.f = default_modulus(self.p, self.a)
        self.terms = {tuple(int(x) for x in e): _coords(c, self.a) for e, c in self.terms.items()}

    @property
    def q(self):
        return self.p ** self.a

    @property
    def polynomial(self):
        return HomogPoly(self.n, self.d, dict(self.terms))

    def to_dict(self):
        out = asdict(self)
        out["terms"] = [{"exponents": list(e), "coefficient": list(c)} for e, c in sorted(self.terms.items())]
        return out

    @classmethod
    def from_dict(cls, D):
        D = dict(D)
        raw = D.pop("terms", None)
        text = D.pop("polynomial", None)
        if raw is None and text is None:
            raise ValidationError("job needs 'terms' or 'polynomial'")
        p, a = int(D["p"]), int(D.get("a", 1))
        if not is_prime(p) or p < 3:
            raise NotPrime("p = %s is not an odd prime" % p)
        if a < 1:
            raise ValidationError("a must be positive")
        f = D.get("f")
        if f is None:
            f = default_modulus(p, a)
        if raw is not None:
            terms = {}
            for t in raw:
                c = t["coefficient"]
                terms[tuple(t["exponents"])] = tuple(c) if isinstance(c, list) else c
        else:
            terms = parse_polynomial(text, f, D.get("n"))
        exps = list(terms)
        if not exps:
            raise ValidationError("empty polynomial")
        n = len(exps[0]) - 1
        d = sum(exps[0])
        if any(len(e) != n + 1 or sum(e) != d for e in exps):
            raise ValidationError("polynomial is not homogeneous")
        D.pop("n", None)
        D.pop("d", None)
        D["f"] = f
        known = {k: v for k, v in D.items() if k in cls.__dataclass_fields__}
        unknown = set(D) - set(known)
        if unknown:
            raise ValidationError("unknown job fields: %s" % ", ".join(sorted(unknown)))
        return cls(terms=terms, n=n, d=d, **known)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _coords(c, a):
    if isinstance(c, int):
        c = (c,)
    c = tuple(int(x) for x in c) + (0,) * a
    return c[:a]


# -- polynomial strings ---------------------------------------------------------

_TERM = re.compile(r"\s*([+-]?)\s*([^+-]+)")


def parse_polynomial(text, f=(0, 1), n=None):
    """
    Parse a homogeneous polynomial such as "x^3 + y^3 + z^3 - 2*x*y*z" into
    {exponents: coordinates}.  Variables are x, y, z, w, v, u, t, s or
    x0, x1, ...; the letter g stands for the generator of F_q over F_p and
    may appear in coefficients ("3*g^2*x^4").  The number of variables is
    n + 1 when n is given, otherwise one more than the largest index used.

    EXAMPLES::

        >>> parse_polynomial("x^3 + y^3 + z^3 - x*y*z")[(1, 1, 1)]
        (-1,)
        >>> parse_polynomial("g*x^2 + y^2 + z^2", [2, 0, 1])[(2, 0, 0)]
        (0, 1)
    """
    f = [int(c) for c in f]
    a = len(f) - 1
    text = text.replace(" ", "").replace("**", "^")
    if not text:
        raise ValidationError("empty polynomial")
    if text[0] not in "+-":
        text = "+" + text
    parsed = []
    pos = 0
    for m in _TERM.finditer(text):
        if m.start() != pos:
            raise ValidationError("cannot parse %r" % text)
        pos = m.end()
        sign = -1 if m.group(1) == "-" else 1
        coeff = [sign] + [0] * (a - 1)
        mono = {}
        for factor in m.group(2).split("*"):
            base, _, ex = factor.partition("^")
            k = int(ex) if ex else 1
            if re.fullmatch(r"\d+", base):
                coeff = [c * int(base) ** k for c in coeff]
            elif base == "g":
                for _ in range(k):
                    coeff = _times_gen(coeff, f)
            else:
                idx = _var_index(base)
                mono[idx] = mono.get(idx, 0) + k
        parsed.append((mono, coeff))
    if pos != len(text):
        raise ValidationError("cannot parse %r" % text)
    nvars = (n + 1) if n is not None else max((max(m) for m, _ in parsed if m), default=0) + 1
    terms = {}
    for mono, coeff in parsed:
        if mono and max(mono) >= nvars:
            raise ValidationError("variable index out of range")
        e = tuple(mono.get(i, 0) for i in range(nvars))
        old = terms.get(e, (0,) * a)
        terms[e] = tuple(x + y for x, y in zip(old, coeff))
    return {e: c for e, c in terms.items() if any(c)}


def _times_gen(c, f):
    """Multiply coordinates c (length a) by the generator modulo f."""
    a = len(f) - 1
    top = c[-1]
    out = [0] + c[:-1]
    return [out[i] - top * f[i] for i in range(a)]


def _var_index(name):
    if re.fullmatch(r"x\d+", name):
        return int(name[1:])
    if len(name) == 1 and name in VARIABLES:
        return VARIABLES.index(name)
    raise ValidationError("unknown variable %r" % name)


# -- validation -------------------------------------------------------------------

def validate(job):
    """Check the job and the input polynomial; raise a ValidationError."""
    p, a, n, d = job.p, job.a, job.n, job.d
    if not is_prime(p) or p < 3:
        raise NotPrime("p = %s is not an odd prime" % p)
    if a < 1:
        raise ValidationError("a must be positive")
    if n < 1 or d < 2:
        raise ValidationError("need n >= 1 and d >= 2")
    if d % p == 0:
        raise ValidationError("p divides d")
    if p <= n:
        raise ValidationError("need p > n (p = %s, n = %s)" % (p, n))
    if job.method not in METHODS:
        raise ValidationError("unknown method %r" % job.method)
    if job.giant not in ("auto", "naive", "giant-step"):
        raise ValidationError("unknown giant-step mode %r" % job.giant)
    f = job.f
    if len(f) != a + 1 or f[-1] != 1:
        raise ValidationError("f must be monic of degree a")
    try:
        make_context(p, a, 1, f)
    except NotIrreducible:
        raise
    if job.diagonal is not None and (len(job.diagonal) != n + 1 or any(x % p == 0 for x in job.diagonal)):
        raise ValidationError("diagonal needs n + 1 coefficients prime to p")
    if job.N_target is not None and job.N_target < 1:
        raise ValidationError("N_target must be positive")
    if not check_smooth(job.polynomial, p, f):
        raise NotSmooth("the hypersurface is singular over the algebraic closure of F_%s" % job.q)


# -- precision -------------------------------------------------------------------

def default_precision(p, q, n, b):
    """
    Smallest N with p^N > 2 |c_i| for every coefficient that the functional
    equation does not supply (for odd n one more, to fix the sign).
    """
    bounds = coefficient_bounds(b, q, n)
    last = b // 2 if n % 2 == 0 else b - b // 2
    N = 1
    for i in range(1, last + 1):
        while p ** N <= 2 * bounds[i]:
            N += 1
    return N


# -- the pipeline ---------------------------------------------------------------

@dataclass
class RunState:
    """Intermediate results kept for callers that want more than the document."""
    job: JobSpec
    pencil: Pencil = None
    connection: object = None
    plan: object = None
    phi1: dict = field(default_factory=dict)
    zeta: ZetaFunction = None
    step: str = "validation"
    timings: dict = field(default_factory=dict)


def _log(verbose, msg):
    if verbose:
        verbose(msg)


def random_unipotent(m, p, rng):
    """Upper triangular m x m matrix with unit diagonal and random entries mod p."""
    return [[1 if i == j else (rng.randrange(p) if j > i else 0) for j in range(m)] for i in range(m)]


def connection_step(job, verbose=None):
    """
    Gauss-Manin connection with re-drawn diagonal coefficients on genericity
    failures.  A failure at t = 1 depends only on P1, so there the polynomial
    is also replaced by P1(A x) for a random unipotent A (same zeta function).
    Returns (pencil, connection, attempts, A) with A None if P1 was kept.
    """
    n, p = job.n, job.p
    a_vec = list(job.diagonal) if job.diagonal is not None else [1] * (n + 1)
    rng = random.Random(job.seed)
    P1, A = job.polynomial, None
    for attempt in range(job.genericity_retries + 1):
        pencil = Pencil(n, job.d, P1, a_vec, f=tuple(job.f), p=p)
        try:
            conn = gauss_manin(pencil)
            return pencil, conn, attempt, A
        except GenericityFailure as ex:
            _log(verbose, "pencil with diagonal %s not generic (%s)" % (a_vec, ex))
            if attempt == job.genericity_retries:
                raise
            a_vec = [rng.randrange(1, p) for _ in range(n + 1)]
            if getattr(ex, "at_one", False):
                A = random_unipotent(n + 1, p, rng)
                P1 = substitute_linear(job.polynomial, A, p)
                _log(verbose, "changing coordinates by %s" % A)


def frobenius_step(job, pencil, conn, N_phi, method, verbose=None, counter=None):
    """Step 2 and Step 3 at precision N_phi: returns (Step3Result, phi0 record)."""
    n, d, p, a = job.n, job.d, job.p, job.a
    plan = precision_plan(p, a, d, n, N_phi, conn.deg_r, conn.deg_G)
    cache = {}

    def phi0_mat(W):
        if W not in cache:
            ctx = make_context(p, a, W, list(job.f))
            cache[W] = phi0(n, d, pencil.a_vec, p, W, ctx=ctx, factorials=job.factorials)
        return cache[W].matrix.mat

    res = compute_phi1(conn, phi0_mat, plan, method, giant=job.giant, verbose=verbose, counter=counter)
    return res, cache[res.plan.W]


def run(job, verbose=None, state=None):
    """
    Compute the zeta function for ``job``; returns the output document.
    Raises a DeformZetaError subclass (carrying the exit code) on failure;
    its ``step`` attribute names the stage that failed.
    """
    state = state if state is not None else RunState(job)
    try:
        return _run(job, verbose, state)
    except DeformZetaError as ex:
        ex.step = state.step
        raise


def _run(job, verbose, state):
    state.step = "validation"
    validate(job)
    n, d, p, a, q = job.n, job.d, job.p, job.a, job.q
    b = betti(n, d)
    doc = {
        "program": {"name": "deformzeta", "version": __version__},
        "job": job.to_dict(),
        "field": {"p": p, "a": a, "q": q, "f": list(job.f)},
        "hypersurface": {"n": n, "d": d, "b": b},
    }
    if job.method == "oracle":
        state.step = "oracle"
        t = time.perf_counter()
        Z, counts = oracle_zeta(job.polynomial, p, tuple(job.f), job.max_oracle_size)
        state.timings["oracle"] = time.perf_counter() - t
        state.zeta = Z
        report = weil_checks(Z, b)
        doc["zeta"] = Z.as_dict()
        doc["counts"] = list(counts)
        doc["checks"] = report
        doc["status"] = "ok"
        return doc

    state.step = "connection"
    t = time.perf_counter()
    pencil, conn, attempts, A = connection_step(job, verbose)
    state.timings["connection"] = time.perf_counter() - t
    state.pencil, state.connection = pencil, conn
    _log(verbose, "connection: deg r = %d, deg G = %d" % (conn.deg_r, conn.deg_G))
    doc["pencil"] = {"diagonal": list(pencil.a_vec), "genericity_attempts": attempts,
                     "deg_r": conn.deg_r, "deg_G": conn.deg_G, "coordinate_change": A}

    N = job.N_target if job.N_target is not None else default_precision(p, q, n, b)
    methods = ["linear", "sqrt-p"] if job.method == "both" else [job.method]
    for tries in range(job.precision_retries + 1):
        results = {}
        state.step = "frobenius"
        for m in methods:
            t = time.perf_counter()
            results[m], P0 = frobenius_step(job, pencil, conn, N, m, verbose)
            state.timings["frobenius " + m] = time.perf_counter() - t
            _log(verbose, "%s: K = %d, W = %d, retries %d"
                 % (m, results[m].plan.K, results[m].plan.W, results[m].retries))
        first = results[methods[0]]
        agree = None
        if len(methods) == 2:
            agree = results["linear"].phi1.equal_mod(results["sqrt-p"].phi1, N)
            if not agree:
                raise Inconsistent("linear and sqrt-p Frobenius matrices differ mod p^%d" % N)
        state.step = "zeta"
        phiq = frobenius_q(first.phi1)
        try:
            chi = char_poly_lift(phiq, p, q, n, b)
            break
        except PrecisionTooLow as ex:
            if tries == job.precision_retries:
                raise
            _log(verbose, "precision %d too low (%s); retrying" % (N, ex))
            N += 2
    state.plan = first.plan
    state.phi1 = {m: r.phi1 for m, r in results.items()}
    Z = assemble_zeta(chi, q, n)
    state.zeta = Z

    state.step = "checks"
    oracle_counts = None
    checks_extra = {}
    if job.check_oracle:
        m = max(1, min(b, 3))
        try:
            oracle_counts = [count_points(job.polynomial, p, tuple(job.f), i, job.max_oracle_size)
                             for i in range(1, m + 1)]
        except TooLarge:
            oracle_counts = None
            for i in range(m, 0, -1):
                try:
                    oracle_counts = [count_points(job.polynomial, p, tuple(job.f), j, job.max_oracle_size)
                                     for j in range(1, i + 1)]
                    break
                except TooLarge:
                    continue
        checks_extra["oracle_counts_used"] = oracle_counts
    report = weil_checks(Z, b, counts=oracle_counts)
    report.update(checks_extra)
    report["methods_agree"] = agree

    plan = first.plan.as_dict()
    plan["N_target"] = N
    plan["precision_retries"] = tries
    plan["step3_retries"] = first.retries
    doc["precision"] = plan
    doc["frobenius"] = {"phi0": P0.as_dict()["matrix"], "phi1": scaled_matrix_to_dict(first.phi1),
                        "diagonal_series_terms": P0.R}
    doc["zeta"] = Z.as_dict()
    doc["counts"] = Z.counts(max(1, min(b, 5)))
    doc["checks"] = report
    doc["status"] = "ok"
    return doc


def dumps(doc):
    """Canonical serialization (sorted keys, fixed separators)."""
    return json.dumps(doc, sort_keys=True, indent=1, separators=(",", ": ")) + "\n"
