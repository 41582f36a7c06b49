import numpy as np
import pytest

from lppl_sloppy import Ar1Config, LpplParams, PriceSeries, SynthSpec, eval_lppl, make_series

# Lines collected by the acceptance tests, echoed in the terminal summary.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def reference_spec():
    return SynthSpec()


@pytest.fixture(scope="session")
def noiseless_spec():
    return SynthSpec(noise=Ar1Config(sigma=0.0))


@pytest.fixture(scope="session")
def noiseless_series(noiseless_spec):
    return make_series(noiseless_spec)


@pytest.fixture(scope="session")
def noisy_series(reference_spec):
    return make_series(reference_spec, 0)


@pytest.fixture
def small_truth():
    return LpplParams(A=500.0, B=-20.0, C=0.1, t_c=210.0, alpha=0.6, omega=8.0, phi=1.0)


@pytest.fixture
def small_series(small_truth):
    t = np.arange(0, 200, dtype=float)
    return PriceSeries(0, eval_lppl(small_truth, t))
