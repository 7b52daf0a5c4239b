import numpy as np
import pytest

from mbcool import ModeSpec, joint_state_from_thermal

WA = 1.4e9  # omega_a, rad/s
G = 5.6e7  # 0.04 omega_a
DELTA = 1.4e7  # 0.01 omega_a

ACCEPTANCE_LINES = []


def two_mode_specs(temperature=0.1, detuning_b=DELTA):
    return [ModeSpec(WA, G, DELTA, temperature), ModeSpec(1.68e9, G, detuning_b, temperature)]


def single_mode_specs(temperature=0.1):
    return [ModeSpec(WA, G, DELTA, temperature)]


def five_mode_specs():
    return [ModeSpec(w, G, DELTA, 0.05) for w in (8.4e8, 1.12e9, 1.4e9, 1.68e9, 1.96e9)]


@pytest.fixture(scope="session")
def fig4_specs():
    return two_mode_specs()


@pytest.fixture(scope="session")
def fig4_state(fig4_specs):
    return joint_state_from_thermal(fig4_specs)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
