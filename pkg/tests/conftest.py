import pathlib

import numpy as np
import pytest

from conijsr import io
from conijsr.engine import Options, algorithm1

FIXTURES = pathlib.Path(__file__).parent / "fixtures"

_cache = {}


def fixture_path(name):
    return FIXTURES / f"{name}.json"


def load(name):
    return io.parse_problem(fixture_path(name))


def run_conitope(name, **kw):
    """Algorithm 1 on a fixture, computed once per session."""
    key = (name, tuple(sorted(kw.items())))
    if key not in _cache:
        _cache[key] = algorithm1(load(name), Options(**kw))
    return _cache[key]


def random_psd(rng, n, rank=None, complex_=False):
    rank = rank or n
    g = rng.standard_normal((n, rank))
    if complex_:
        g = g + 1j * rng.standard_normal((n, rank))
    return g @ np.conj(g).T


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance reporting: one line per criterion, shown after the run

SUITE_BUDGET_S = 300.0
ACCEPTANCE = {}
_session = {}


def record(criterion, checks, detail=""):
    """Store and print the outcome of one acceptance criterion; returns the failed checks."""
    failed = [name for name, ok in checks.items() if not ok]
    status = "PASS" if not failed else "FAIL"
    line = f"criterion {criterion}: {status}"
    if detail:
        line += f" | {detail}"
    if failed:
        line += f" | failed: {', '.join(failed)}"
    ACCEPTANCE[criterion] = line
    print(line)
    return failed


def pytest_sessionstart(session):
    import time

    _session["start"] = time.perf_counter()


def pytest_sessionfinish(session, exitstatus):
    import time

    elapsed = time.perf_counter() - _session["start"]
    _session["elapsed"] = elapsed
    if 10 in ACCEPTANCE and elapsed > SUITE_BUDGET_S:
        ACCEPTANCE[10] = ACCEPTANCE[10].replace("PASS", "FAIL") + f" | suite took {elapsed:.0f} s"
        session.exitstatus = 1


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
    if "elapsed" in _session:
        terminalreporter.write_line(f"full suite time: {_session['elapsed']:.1f} s (budget {SUITE_BUDGET_S:.0f} s)")
