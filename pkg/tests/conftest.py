"""Acceptance bookkeeping: one PASS/FAIL line per criterion in the terminal summary."""
from collections import defaultdict

import pytest

CRITERIA = {
    1: "alignment DP equals brute force (binary n<=5, ternary n=8)",
    2: "worked examples reproduced",
    3: "pushforward of P(u,v) equals P(u+k0,v) exactly",
    4: "single-step loss never exceeds the A2 bound",
    5: "neighbouring-fiber ratio identity and fiber shapes",
    6: "Var L_n / n stable across n (block model)",
    7: "typical-set coverage",
    8: "n * min point mass stable across n",
    9: "monotone conditional mean l(u,v)",
    10: "variance bounds, decomposition and tail bounds",
    11: "byte-identical output across worker counts",
}

_outcomes: dict = defaultdict(list)
_notes: dict = defaultdict(list)


def _criterion(item):
    m = item.get_closest_marker("criterion")
    return m.args[0] if m else None


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    k = _criterion(item)
    if k is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _outcomes[k].append((item.name, rep.passed))


@pytest.fixture
def note(request):
    """Attach a measured value to the criterion of the running test."""
    k = _criterion(request.node)

    def add(text: str) -> None:
        _notes[k].append(text)
        print(text)

    return add


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(CRITERIA):
        runs = _outcomes.get(k)
        if not runs:
            continue
        status = "PASS" if all(ok for _, ok in runs) else "FAIL"
        tr.write_line(f"criterion {k:2d}: {status}  {CRITERIA[k]}")
        for name, ok in runs:
            if not ok:
                tr.write_line(f"    failed: {name}")
        for text in _notes.get(k, []):
            tr.write_line(f"    {text}")
