import numpy as np
import pytest

from ldpgap.mechanisms import Budget, MechanismSpec


@pytest.fixture
def fixed_population():
    """Two groups of 10 fixed values with easy exact moments."""
    g0 = np.array([0.9, 0.7, 0.5, 0.3, 0.1, -0.1, 0.2, 0.4, 0.6, 0.8])
    g1 = np.array([-0.8, -0.6, -0.4, -0.2, 0.0, 0.1, 0.2, -0.1, -0.3, 0.3])
    groups = np.repeat(np.arange(2, dtype=np.int64), 10)
    values = np.concatenate([g0, g1])
    return groups, values


def freq_se(p, n):
    """Standard error of an empirical frequency."""
    return np.sqrt(max(p * (1.0 - p), 1e-12) / n)


@pytest.fixture
def mech_r():
    return MechanismSpec("r", Budget(1.0, 1.0))


@pytest.fixture
def mech_l():
    return MechanismSpec("l", Budget(1.0, 2.0, 2.0))
