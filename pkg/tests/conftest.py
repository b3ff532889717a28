import json
import os

import pytest

from deformzeta.pipeline import JobSpec, RunState, run

HERE = os.path.dirname(__file__)
FIXTURES = os.path.join(HERE, "fixtures")

ACCEPTANCE_LINES = []


def load_fixture(name):
    with open(os.path.join(FIXTURES, name)) as fh:
        return json.load(fh)


def job_of(entry, **overrides):
    D = dict(entry["job"])
    D.update(overrides)
    return JobSpec.from_dict(D)


class Runs:
    """Pipeline runs (method both) shared between tests, computed on demand."""

    def __init__(self):
        self._cache = {}

    def get(self, entry):
        name = entry["name"]
        if name not in self._cache:
            job = job_of(entry, method="both")
            state = RunState(job)
            doc = run(job, state=state)
            self._cache[name] = (job, state, doc)
        return self._cache[name]


@pytest.fixture(scope="session")
def runs():
    return Runs()


@pytest.fixture(scope="session")
def curves():
    return load_fixture("curves.json")


@pytest.fixture(scope="session")
def extension_curves():
    return load_fixture("extension_curves.json")


@pytest.fixture(scope="session")
def surface():
    return load_fixture("surface.json")


def report(criterion, ok, detail=""):
    """Record one pass/fail line of the acceptance suite."""
    line = "criterion %s: %s%s" % (criterion, "PASS" if ok else "FAIL", "  (%s)" % detail if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
