"""
Acceptance suite.  Each test checks one criterion over its whole instance set
and prints a single PASS/FAIL line (collected again in the terminal summary).

Reference values come from brute-force enumeration (tests/fixtures, frozen by
running the oracle) and never from the deformation pipeline itself.
"""
import random

import pytest

from conftest import report, job_of
from deformzeta.bench import bench_interval_product, bench_factorial_table, random_matrix_poly, ratios
from deformzeta.bgsprod import interval_product, naive_product
from deformzeta.deform import precision_plan, compute_phi1
from deformzeta.diagfrob import phi0
from deformzeta.padic import make_context
from deformzeta.pipeline import RunState, run
from deformzeta.polyhyp import betti
from deformzeta.zeta import assemble_zeta, weil_checks


def _all_instances(curves, extension_curves, surface):
    return list(curves) + list(extension_curves) + [surface]


def test_criterion_1_curves_match_oracle(curves, runs):
    bad = []
    primes, degrees = set(), set()
    for entry in curves:
        job, state, doc = runs.get(entry)
        ref = assemble_zeta(entry["oracle"]["chi"], job.q, job.n)
        if state.zeta != ref or doc["zeta"]["chi"] != entry["oracle"]["chi"]:
            bad.append(entry["name"])
        primes.add(job.p)
        degrees.add(job.d)
    ok = not bad and len(curves) >= 10 and primes == {5, 7, 11, 13} and degrees == {3, 4}
    report(1, ok, "%d curves, d in %s, p in %s%s" % (len(curves), sorted(degrees), sorted(primes),
                                                  "; mismatches: %s" % bad if bad else ""))
    assert ok


def test_criterion_2_extension_fields(extension_curves, runs):
    bad = []
    fields = set()
    for entry in extension_curves:
        job, state, doc = runs.get(entry)
        fields.add(job.q)
        if doc["zeta"]["chi"] != entry["oracle"]["chi"] or job.a != 2 or job.d != 3:
            bad.append(entry["name"])
    ok = not bad and len(extension_curves) >= 3 and fields == {25, 49}
    report(2, ok, "%d cubics over F_25 and F_49%s" % (len(extension_curves), "; mismatches: %s" % bad if bad else ""))
    assert ok


def test_criterion_3_quartic_surface(surface, runs):
    job, state, doc = runs.get(surface)
    predicted = state.zeta.counts(2)
    ok = (job.n, job.d, job.p) == (3, 4, 7) and predicted == surface["oracle"]["counts"] \
        and len(state.zeta.chi) - 1 == 21 == betti(3, 4)
    report(3, ok, "|X(F_7)|, |X(F_49)| predicted %s, enumerated %s; deg chi = %d"
           % (predicted, surface["oracle"]["counts"], len(state.zeta.chi) - 1))
    assert ok


def test_criterion_4_methods_agree(curves, extension_curves, surface, runs):
    bad = []
    for entry in _all_instances(curves, extension_curves, surface):
        job, state, doc = runs.get(entry)
        N = doc["precision"]["N_target"]
        if not state.phi1["linear"].equal_mod(state.phi1["sqrt-p"], N):
            bad.append(entry["name"])
    n = len(curves) + len(extension_curves) + 1
    report(4, not bad, "phi1 linear == phi1 sqrt-p mod p^N_phi on %d instances%s" % (n, "; differ: %s" % bad if bad else ""))
    assert not bad


def test_criterion_5_phi0_dual_route(curves, extension_curves, surface, runs):
    bad = []
    count = 0
    for entry in _all_instances(curves, extension_curves, surface):
        job, state, doc = runs.get(entry)
        if job.p > 100:
            continue
        W = state.plan.W
        ctx = make_context(job.p, job.a, W, list(job.f))
        a_vec = doc["pencil"]["diagonal"]
        A = phi0(job.n, job.d, a_vec, job.p, W, ctx=ctx, factorials="table")
        B = phi0(job.n, job.d, a_vec, job.p, W, ctx=ctx, factorials="naive")
        count += 1
        if A.matrix.mat != B.matrix.mat:
            bad.append(entry["name"])
    report(5, not bad and count > 0, "table vs math.factorial phi0 on %d fixtures%s"
           % (count, "; differ: %s" % bad if bad else ""))
    assert not bad


def test_criterion_6_interval_product_kernel():
    rng = random.Random(20240601)
    mismatches = 0
    for k in range(200):
        m = rng.randint(1, 4)
        L = rng.randint(1, 2000)
        p = rng.choice([101, 10007])
        N = rng.randint(1, 20)
        s = rng.randrange(10 ** 6)
        A = random_matrix_poly(m, p ** N, rng.randrange(10 ** 9))
        if interval_product(A, s, L, p, "giant-step").value != naive_product(A, s, L):
            mismatches += 1
    split_fail = 0
    for k in range(100):
        m = rng.randint(1, 4)
        p = rng.choice([101, 10007])
        A = random_matrix_poly(m, p ** rng.randint(1, 20), rng.randrange(10 ** 9))
        L = rng.randint(2, 2000)
        L1 = rng.randint(1, L - 1)
        s = rng.randrange(10 ** 6)
        whole = interval_product(A, s, L, p, "giant-step").value
        left = interval_product(A, s, L1, p, "giant-step").value
        right = interval_product(A, s + L1, L - L1, p, "giant-step").value
        if whole != left * right:
            split_fail += 1
    ok = mismatches == 0 and split_fail == 0
    report(6, ok, "200 giant-step vs naive instances: %d mismatches; 100 splits: %d failures" % (mismatches, split_fail))
    assert ok


def _ratio_line(rs):
    return ", ".join("%.2f" % r["ratio"] for r in rs)


def test_criterion_7_sqrt_scaling():
    rows_b = bench_interval_product([1 << 14, 1 << 16, 1 << 18, 1 << 20], p=10007, N=4, m=2, repeat=3)
    rows_f = bench_factorial_table([6257, 25013, 100003], R=8, N=3, repeat=3)
    gb, nb = ratios(rows_b, "L", "giant"), ratios(rows_b, "L", "naive")
    gf, nf = ratios(rows_f, "p", "giant"), ratios(rows_f, "p", "naive")
    agree = all(r["agree"] for r in rows_b + rows_f)
    ok_g = all(1.5 <= r["ratio"] <= 3.0 for r in gb + gf)
    ok_n = all(r["ratio"] > 3.4 for r in nb + nf)
    ok = agree and ok_g and ok_n
    report(7, ok, "interval product t(4L)/t(L) giant [%s] naive [%s]; factorial table t(4p)/t(p) giant [%s] naive [%s]"
           % (_ratio_line(gb), _ratio_line(nb), _ratio_line(gf), _ratio_line(nf)))
    assert ok


def test_criterion_8_weil_properties(curves, extension_curves, surface, runs):
    bad = []
    for entry in _all_instances(curves, extension_curves, surface):
        job, state, doc = runs.get(entry)
        b = betti(job.n, job.d)
        rep = weil_checks(state.zeta, b, tol=1e-6, strict=False)
        counts = state.zeta.counts(b)
        if not (rep["ok"] and rep["degree"] and rep["integral"] and rep["pairing"] and rep["absolute_values"]
                and all(isinstance(c, int) and c >= 0 for c in counts) and doc["checks"]["ok"]):
            bad.append(entry["name"])
    report(8, not bad, "Weil checks on %d zeta functions%s"
           % (len(curves) + len(extension_curves) + 1, "; violations: %s" % bad if bad else ""))
    assert not bad


def test_criterion_9_precision_robustness(curves, runs):
    bad_n, bad_k = [], []
    for entry in curves:
        job, state, doc = runs.get(entry)
        N = doc["precision"]["N_target"]
        hi_job = job_of(entry, method="both", N_target=N + 3)
        hi = RunState(hi_job)
        hi_doc = run(hi_job, state=hi)
        same = hi_doc["zeta"]["chi"] == doc["zeta"]["chi"] and all(
            hi.phi1[m].equal_mod(state.phi1[m], N) for m in ("linear", "sqrt-p"))
        if not same:
            bad_n.append(entry["name"])
        if job.d == 3:
            conn, plan = state.connection, state.plan
            cache = {}

            def get(W):
                if W not in cache:
                    ctx = make_context(job.p, job.a, W, list(job.f))
                    cache[W] = phi0(job.n, job.d, state.pencil.a_vec, job.p, W, ctx=ctx).matrix.mat
                return cache[W]
            for method in ("linear", "sqrt-p"):
                big = precision_plan(job.p, job.a, job.d, job.n, N, conn.deg_r, conn.deg_G, K=2 * plan.K)
                if not compute_phi1(conn, get, big, method).phi1.equal_mod(state.phi1[method], N):
                    bad_k.append((entry["name"], method))
    ok = not bad_n and not bad_k
    report(9, ok, "N_target + 3 reproduces %d curves; K-doubling on %d cubics%s"
           % (len(curves), sum(1 for e in curves if runs.get(e)[0].d == 3),
              "; failures: %s %s" % (bad_n, bad_k) if not ok else ""))
    assert ok
