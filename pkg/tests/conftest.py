"""Shared fixtures: one direct-ratio model and two derived models."""

import sys
from pathlib import Path

import pytest

from widomcantor import CantorModel, Gamma, SequenceSpec, regularize

DATA_DIR = Path(__file__).parent / "data"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo the acceptance verdict lines after the run, where capture
    cannot hide them."""
    for name in ("test_acceptance", "tests.test_acceptance"):
        mod = sys.modules.get(name)
        if mod is not None and getattr(mod, "VERDICTS", None):
            terminalreporter.section("acceptance criteria")
            for line in mod.VERDICTS:
                terminalreporter.write_line(line)
            break


@pytest.fixture(scope="session")
def model_sixth():
    """Direct gamma == 1/6 at every level (all closed forms are exact)."""
    return CantorModel(Gamma.direct(["1/6"] * 4, "hold"), s_max=12)


@pytest.fixture(scope="session")
def model_const_e():
    """Derived from the constant scale sequence c == e."""
    reg = regularize(SequenceSpec.constant("e"), 64)
    return CantorModel(Gamma.derived(reg), s_max=12)


@pytest.fixture(scope="session")
def model_power():
    """Derived from the growing scale sequence c_n = e * n^(1/2)."""
    reg = regularize(SequenceSpec.power("e", "1/2"), 64)
    return CantorModel(Gamma.derived(reg), s_max=12)


@pytest.fixture(scope="session")
def data_dir():
    return DATA_DIR
