import numpy as np
import pytest

from droughtclass.clustering import canonicalize_labels
from droughtclass.preprocess import select_features, standardize
from droughtclass.synthgen import generate_preset

ACCEPTANCE_RESULTS = []


@pytest.fixture(scope="session")
def synthetic():
    return generate_preset("default", seed=42)


@pytest.fixture(scope="session")
def synthetic_matrix(synthetic):
    return standardize(select_features(synthetic.dataset))


@pytest.fixture(scope="session")
def regime_canonical(synthetic):
    """Generator regimes relabeled by the same wettest-first rule as clusters."""
    return canonicalize_labels(synthetic.regime, synthetic.dataset).apply(synthetic.regime)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number}. {title}  {detail}")
