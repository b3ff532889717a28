import json

import pytest

from deformzeta.errors import (ValidationError, NotPrime, NotSmooth, NotIrreducible, DeformZetaError)
from deformzeta.oracle import oracle_zeta
from deformzeta.pipeline import (JobSpec, RunState, run, dumps, parse_polynomial, validate, default_precision,
                                 connection_step)


def job(**kw):
    D = {"p": 5, "polynomial": "x^3+y^3+z^3+x*y*z"}
    D.update(kw)
    return JobSpec.from_dict(D)


def test_parse_polynomial():
    assert parse_polynomial("x^3 + y^3 + z^3 - x*y*z")[(1, 1, 1)] == (-1,)
    assert parse_polynomial("g*x^2 + y^2 + z^2", [2, 0, 1])[(2, 0, 0)] == (0, 1)
    # g^2 = -2 in F_5[g]/(g^2 + 2)
    assert parse_polynomial("3*g^2*x^2 + y^2", [2, 0, 1])[(2, 0)] == (-6, 0)
    assert parse_polynomial("x0^2 + x2^2", n=3) == {(2, 0, 0, 0): (1,), (0, 0, 2, 0): (1,)}
    assert parse_polynomial("x**2 - x^2 + y^2") == {(0, 2): (1,)}
    for bad in ("x^3 + q^3", "x^3 +* y", "", "x^3 + y^3 + z^3 + x9"):
        with pytest.raises(ValidationError):
            parse_polynomial(bad, n=2 if "x9" in bad else None)


def test_jobspec_roundtrip():
    J = job(a=2, diagonal=[1, 2, 3], seed=4)
    D = J.to_dict()
    assert JobSpec.from_dict(D) == J
    assert JobSpec.from_json(json.dumps(D)) == J
    assert J.q == 25 and J.n == 2 and J.d == 3 and J.f == [2, 0, 1]


@pytest.mark.parametrize("kw,err,msg", [
    ({"p": 3}, ValidationError, "p divides d"),
    ({"p": 7}, NotSmooth, "singular"),
    ({"p": 3, "polynomial": "x^4+y^4+z^4+w^4"}, ValidationError, "need p > n"),
    ({"method": "fast"}, ValidationError, "unknown method"),
    ({"giant": "huge"}, ValidationError, "giant-step mode"),
    ({"a": 2, "f": [1, 0, 1]}, NotIrreducible, ""),
    ({"diagonal": [1, 5, 1]}, ValidationError, "diagonal"),
    ({"N_target": 0}, ValidationError, "N_target"),
])
def test_validation(kw, err, msg):
    with pytest.raises(err, match=msg or None):
        validate(job(**kw))


def test_from_dict_rejects_bad_documents():
    for p in (9, 2, 1):
        with pytest.raises(NotPrime):
            job(p=p)
    with pytest.raises(ValidationError, match="homogeneous"):
        JobSpec.from_dict({"p": 5, "polynomial": "x^3+y^2"})
    with pytest.raises(ValidationError, match="unknown job fields"):
        JobSpec.from_dict({"p": 5, "polynomial": "x^3+y^3+z^3", "colour": 1})
    with pytest.raises(ValidationError, match="terms"):
        JobSpec.from_dict({"p": 5})


def test_default_precision():
    # b = 2, q = 5: |c_1| <= 2 sqrt 5, so p^N > 10 needs N = 2
    assert default_precision(5, 5, 2, 2) == 2
    assert default_precision(7, 7, 3, 21) >= 18


def test_run_document_and_determinism():
    J = job(method="both", check_oracle=True)
    a, b = dumps(run(J)), dumps(run(J))
    assert a == b
    doc = json.loads(a)
    assert doc["status"] == "ok"
    assert doc["checks"]["ok"] and doc["checks"]["methods_agree"] and doc["checks"]["oracle_counts"]
    Z, counts = oracle_zeta(J.polynomial, 5)
    assert doc["zeta"]["chi"] == Z.chi
    assert doc["counts"][:1] == counts
    assert set(doc) == {"program", "job", "field", "hypersurface", "pencil", "precision", "frobenius", "zeta",
                        "counts", "checks", "status"}


def test_oracle_method():
    doc = run(job(method="oracle"))
    assert doc["job"]["method"] == "oracle" and doc["status"] == "ok"
    assert "frobenius" not in doc and doc["checks"]["ok"]


def test_error_carries_step():
    with pytest.raises(DeformZetaError) as ex:
        run(job(p=7))
    assert ex.value.step == "validation" and ex.value.exit_code == 2


def test_explicit_precision_and_state():
    J = job(N_target=6)
    state = RunState(J)
    doc = run(J, state=state)
    assert doc["precision"]["N_target"] == 6
    assert state.plan.N_phi == 6 and set(state.phi1) == {"sqrt-p"}
    assert state.zeta.chi == doc["zeta"]["chi"]


def test_coordinate_change_retry():
    # this quartic gives a pencil with r(1) = 0 mod 5 for every diagonal P_0
    from conftest import load_fixture
    entry = next(e for e in load_fixture("curves.json") if e["name"] == "random-d4-p5")
    J = JobSpec.from_dict(entry["job"])
    pencil, conn, attempts, A = connection_step(J)
    assert attempts >= 1 and A is not None
    assert all(A[i][i] == 1 and all(A[i][j] == 0 for j in range(i)) for i in range(3))
    J0 = JobSpec.from_dict(dict(entry["job"], genericity_retries=0))
    with pytest.raises(DeformZetaError) as ex:
        connection_step(J0)
    assert ex.value.exit_code == 3
