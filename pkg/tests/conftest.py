import math
from pathlib import Path

import pytest

from eitkerr.channel import KerrGateSpec, Transfer
from eitkerr.config import load_config
from eitkerr.params import ChannelConfig, ControlProfile, Label, PhysicalParams

ROOT = Path(__file__).resolve().parents[1]
DEFAULT_CFG = ROOT / "configs" / "default.cfg"
ORACLE_CFG = ROOT / "configs" / "oracle.cfg"

# filled by test_acceptance, echoed at the end of the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])


@pytest.fixture(scope="session")
def default_cfg():
    return load_config(DEFAULT_CFG)


@pytest.fixture(scope="session")
def oracle_cfg():
    return load_config(ORACLE_CFG)


@pytest.fixture
def base_params():
    return PhysicalParams(g2n=1e19, v0=10.0, c=299792458.0, L=0.2,
                          mu=((6.4e-17, 3.2e-17), (3.2e-17, 6.4e-17)))


@pytest.fixture
def ramp():
    return ControlProfile.tanh_ramp(1e7, 10.0, 0.1, 0.01)


@pytest.fixture
def hold():
    return ControlProfile.constant(1e7)


@pytest.fixture
def fig2a(ramp):
    return ChannelConfig(ramp, ramp, Label.FIG2A)


@pytest.fixture
def fig2b(ramp, hold):
    return ChannelConfig(ramp, hold, Label.FIG2B)


def ideal_gate(transfer_1=Transfer.TO_ATOM_LASER, transfer_2=Transfer.TO_ATOM_LASER,
               amp_1=1.0, amp_2=1.0):
    return KerrGateSpec(2 * math.pi, 2 * math.pi, math.pi, transfer_1, transfer_2, amp_1, amp_2)
