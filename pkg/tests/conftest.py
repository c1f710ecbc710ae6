"""Shared fixtures. The session-scoped context caches the solution
dictionary so the acceptance checks and the unit tests build it once."""

import numpy as np
import pytest

from fnlslab.checks import DEFAULT_SEED, CheckContext


@pytest.fixture(scope="session")
def ctx():
    return CheckContext(seed=DEFAULT_SEED, jobs=1)


@pytest.fixture()
def rng():
    return np.random.default_rng(DEFAULT_SEED)
