"""Shared test configuration and the acceptance summary printer."""

import numpy as np
import pytest

# One line per acceptance criterion, printed after the run.  Keys are the
# criterion prefixes of the test names in test_acceptance.py.
ACCEPTANCE_TITLES = {
    "criterion_01": "closed-form weighted perimeter of balls",
    "criterion_02": "mass <-> gamma scaling correspondence",
    "criterion_03": "Riesz homogeneity and MC agreement",
    "criterion_04": "analytic shape gradient vs finite differences",
    "criterion_05": "perturbed-ball descent recovers the ball",
    "criterion_06": "Fuglede deficit suite",
    "criterion_07": "inequality corpora (Lipschitz, relative isoperimetric)",
    "criterion_08": "small-mass lower bound expansion",
    "criterion_09": "gamma sweep monotone and concave",
    "criterion_10": "large-gamma fragmentation comparison",
}


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def _criterion_key(nodeid: str):
    if "test_acceptance.py::test_criterion_" not in nodeid:
        return None
    tail = nodeid.split("::test_", 1)[1]
    key = tail[:12]
    return key if key in ACCEPTANCE_TITLES else None


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    status = {}
    for outcome in ("passed", "failed", "error", "skipped"):
        for rep in terminalreporter.stats.get(outcome, ()):
            key = _criterion_key(getattr(rep, "nodeid", ""))
            if key is None:
                continue
            rank = {"passed": 0, "skipped": 1, "failed": 2, "error": 2}[outcome]
            status[key] = max(status.get(key, 0), rank)
    if not status:
        return
    tw = terminalreporter
    tw.section("acceptance criteria")
    for idx, (key, title) in enumerate(sorted(ACCEPTANCE_TITLES.items()), 1):
        if key not in status:
            continue
        word = {0: "PASS", 1: "SKIP", 2: "FAIL"}[status[key]]
        tw.write_line(f"criterion {idx:2d}  {title:<55} {word}")
