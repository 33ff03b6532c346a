import numpy as np
import pytest

from levyinfo.stable import get_engine


@pytest.fixture(scope="session")
def engines():
    """Shared per-beta engines; construction is the slow part, reuse it."""
    return {b: get_engine(b) for b in (0.5, 1.0, 1.5, 1.9, 2.0)}


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
