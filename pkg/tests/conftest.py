"""Shared fixtures and draw helpers for the test suite."""

import numpy as np
import pytest

from chemotaxis_lab.regimes import ModelParams, check_assumptions

ACCEPTANCE_RESULTS = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and item.name.startswith("test_criterion"):
        ACCEPTANCE_RESULTS.append((item.name, report.outcome))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, outcome in sorted(ACCEPTANCE_RESULTS):
        label = name.replace("test_criterion_", "criterion ")
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{label}: {status}")


def random_params(rng, **overrides):
    """A random parameter set with positive structural constants."""
    values = dict(
        n=int(rng.integers(1, 7)),
        m1=float(rng.uniform(-3, 3)),
        m2=float(rng.uniform(-3, 3)),
        m3=float(rng.uniform(-3, 3)),
        chi=float(rng.uniform(0.1, 5)),
        xi=float(rng.uniform(0.1, 5)),
        lam=float(rng.uniform(0.01, 2)),
        mu=float(rng.uniform(0.01, 2)),
        k=float(rng.uniform(1.05, 3)),
        alpha=float(rng.uniform(0.05, 4)),
        beta=float(rng.uniform(0.05, 4)),
        R=float(rng.uniform(0.5, 2)),
    )
    values.update(overrides)
    return ModelParams(**values)


def draw_admissible(rng, max_tries=20000, **overrides):
    """Rejection-sample params satisfying H1 plus one of H2-H4."""
    for _ in range(max_tries):
        p = random_params(rng, **overrides)
        report = check_assumptions(p)
        if report.lp_theory_applicable:
            return p
    raise RuntimeError("failed to draw admissible parameters")


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def blowup_params():
    """The default attraction-dominated blow-up scenario parameters."""
    return ModelParams(
        n=2, m1=1.0, m2=1.0, m3=1.0, chi=5.0, xi=1.0,
        lam=0.1, mu=0.1, k=1.1, alpha=1.2, beta=0.5, R=1.0,
    )
