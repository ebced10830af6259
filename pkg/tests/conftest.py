import numpy as np
import pytest

from homeledger import kernels


def pytest_addoption(parser):
    parser.addoption(
        "--kernel-backend",
        choices=("auto", "cython", "python"),
        default="auto",
        help="force the kernel implementation used by the library under test",
    )


def pytest_configure(config):
    choice = config.getoption("--kernel-backend")
    if choice != "auto":
        kernels.use_backend(choice)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
