import numpy as np
import pytest

from satlab.models import (SourcePrior, default_ground_truth, make_composition_model,
                           make_diagonal_linear, synthesize_instance)
from satlab.rules import SelectorConfig

# criterion number -> (passed, detail); filled by tests/test_acceptance.py
_ACCEPTANCE = {}


def record_criterion(number, passed, detail):
    _ACCEPTANCE[int(number)] = (bool(passed), str(detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        passed, detail = _ACCEPTANCE[number]
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {verdict} - {detail}")


@pytest.fixture(scope="session")
def sel_cfg():
    return SelectorConfig(tau=1.5, gamma=0.5)


@pytest.fixture(scope="session")
def small_instance():
    # 40-dim diagonal model, flat half-order source element of unit norm
    model = make_diagonal_linear(40, s=2.0)
    u = np.ones(40) / np.sqrt(40.0)
    return synthesize_instance(model, default_ground_truth(40), SourcePrior(nu=0.5, element=u))


@pytest.fixture(scope="session")
def tiny_composition():
    # 12-dim mildly nonlinear model; small source keeps L*||u|| = 0.2
    matrix = np.diag([float(i) ** -2.0 for i in range(1, 13)])
    model = make_composition_model(matrix, beta=0.2, rho=1.0)
    u = np.ones(12) / np.sqrt(12.0)
    return synthesize_instance(model, default_ground_truth(12),
                               SourcePrior(nu=0.5, element=u),
                               require_small_source=True)
