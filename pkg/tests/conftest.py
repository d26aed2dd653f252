import numpy as np
import pytest

from sbdflow.core import PhysicalParams, SymTensor2


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def mms_params():
    return PhysicalParams(mu=1.0, mu_eff=1.0, alpha=0.1, beta=SymTensor2(0, 0, 0),
                          K_tr=SymTensor2.iso(1e-2), K_pm=SymTensor2.iso(1e-2))


ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
