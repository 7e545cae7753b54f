import pytest

from finitewidth.config import EnsembleSpec, InitScheme, NetworkConfig
from finitewidth.sampler import available_backends


def make_spec(width=128, activation="relu", init="glorot_uniform", x=1.0, n_samples=100_000, seed=11,
              init_output=None):
    hid = InitScheme.parse(init)
    out = InitScheme.parse(init_output) if init_output else hid
    return EnsembleSpec(NetworkConfig(width, activation, hid, out), x, n_samples, seed)


@pytest.fixture
def spec_factory():
    return make_spec


requires_compiled = pytest.mark.skipif(
    "compiled" not in available_backends(), reason="compiled kernels not built"
)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
