import numpy as np
import pytest

from terratwin.generate import generate_country
from terratwin.grid import GridSpec, RasterLayer

PINNED_SEED = 42

#: (criterion name, passed) pairs filled by the acceptance suite
ACCEPTANCE_RESULTS: list[tuple[str, bool]] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_RESULTS:
        terminalreporter.write_sep("=", "acceptance criteria")
        for name, ok in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}: {name}")


@pytest.fixture(scope="session")
def pinned_model():
    """The 256x256 regression model used by the acceptance suite."""
    return generate_country(PINNED_SEED)


@pytest.fixture(scope="session")
def small_model():
    """A fast 48x48 model for endpoint and CLI tests."""
    from terratwin.generate import GeneratorParams
    spec = GridSpec(ncols=48, nrows=48, xll=0.0, yll=0.0, cellsize=100.0)
    return generate_country(7, spec, GeneratorParams(
        n_trees=300, n_pools=40, n_buildings=60, events_per_peril=60))


def make_spec(n=8, cellsize=100.0, xll=0.0, yll=0.0):
    return GridSpec(ncols=n, nrows=n, xll=xll, yll=yll, cellsize=cellsize)


def make_layer(values, name="test", spec=None, cellsize=100.0):
    values = np.asarray(values, dtype=np.float64)
    if spec is None:
        spec = GridSpec(ncols=values.shape[1], nrows=values.shape[0],
                        xll=0.0, yll=0.0, cellsize=cellsize)
    return RasterLayer(spec, values, name)
