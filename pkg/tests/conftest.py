import numpy as np
import pytest

from fluidcascade.spectral import SparseSpectralField


def cos_field(k, vec, dim=2):
    """vec * cos(k . x) as a sparse field."""
    return SparseSpectralField.from_modes(dim, [k], [np.asarray(vec, dtype=complex) / 2], add_conjugates=True)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
