"""
Scaling benchmarks for the two kernels whose cost is meant to grow like the
square root of the length: interval products of 2 x 2 linear matrix
polynomials, and factorial tables c!, (c+p)!, ..., (c+Rp)! mod p^N.

Each measurement is the minimum wall time over ``repeat`` runs, taken with
the giant-step method and with the naive baseline on the same input.
Ratios t(4x)/t(x) near 2 indicate square-root scaling, near 4 linear.
"""
import random
import time

from .bgsprod import LinearMatrixPoly, interval_product, OpCounter
from .diagfrob import factorial_table


def _best(fn, repeat):
    best = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        dt = time.perf_counter() - t
        best = dt if best is None else min(best, dt)
    return best, out


def random_matrix_poly(m, modulus, seed):
    rng = random.Random(seed)
    A0 = [[rng.randrange(modulus) for _ in range(m)] for _ in range(m)]
    A1 = [[rng.randrange(modulus) for _ in range(m)] for _ in range(m)]
    return LinearMatrixPoly.from_rows(A0, A1, modulus)


def bench_interval_product(lengths, p=10007, N=4, m=2, repeat=3, seed=0, naive=True):
    """
    Time interval_product(A, 0, L) for each L.  Returns a list of rows
    {L, giant, naive, ops, agree}; ``ops`` is the operation-count model of
    the giant-step run and ``agree`` whether both methods gave the same
    matrix.
    """
    A = random_matrix_poly(m, p ** N, seed)
    rows = []
    for L in lengths:
        tg, G = _best(lambda: interval_product(A, 0, L, p, "giant-step"), repeat)
        counter = OpCounter()
        interval_product(A, 0, L, p, "giant-step", counter)
        row = {"L": L, "giant": tg, "ops": counter.ops}
        if naive:
            tn, Nv = _best(lambda: interval_product(A, 0, L, p, "naive"), repeat if L <= 1 << 18 else 1)
            row["naive"] = tn
            row["agree"] = G.value == Nv.value
        rows.append(row)
    return rows


def bench_factorial_table(primes, R=8, N=3, repeat=3, naive=True):
    """Time factorial_table(p, 1, 1 + R p, N) for each p with giant steps and
    with naive interval products.  Rows {p, giant, naive, agree}.

    The default N = 3 keeps p^N below 2^63 for p up to 2 10^6, so the sweep
    does not cross from one-word to multi-word integers (which alone adds a
    factor of about 1.4 to the ratio at p ~ 10^5 with N = 4)."""
    rows = []
    for p in primes:
        top = 1 + R * p
        tg, G = _best(lambda: factorial_table(p, 1, top, N, "giant-step"), repeat)
        row = {"p": p, "giant": tg}
        if naive:
            tn, Nv = _best(lambda: factorial_table(p, 1, top, N, "naive"), repeat)
            row["naive"] = tn
            row["agree"] = G.values == Nv.values
        rows.append(row)
    return rows


def ratios(rows, key, column):
    """t(x_{k+1}) / t(x_k) for consecutive rows of a benchmark table."""
    out = []
    for u, v in zip(rows, rows[1:]):
        if column in u and column in v and u[column] > 0:
            out.append({"from": u[key], "to": v[key], "ratio": v[column] / u[column]})
    return out


def summarize(rows, key):
    """Benchmark document: rows plus ratios for each measured method."""
    doc = {"rows": rows, "ratios": {}}
    for col in ("giant", "naive", "ops"):
        if rows and col in rows[0]:
            doc["ratios"][col] = ratios(rows, key, col)
    return doc


def next_prime(x):
    from .padic import is_prime
    x = max(3, x)
    while not is_prime(x):
        x += 1
    return x
