import numpy as np
import pytest

from toposqm import fixtures


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def qubit():
    return fixtures.qubit_antichain()


@pytest.fixture(scope="session")
def qutrit():
    return fixtures.qutrit_universe()


@pytest.fixture(scope="session")
def qutrit_t():
    return fixtures.qutrit_universe(include_trivial=True)


def ctx(universe, label):
    return universe.by_label(label)


def block_of(v, diag):
    """Index of the block of ``v`` equal to ``diag(diag)``."""
    target = np.diag(np.asarray(diag, dtype=float))
    for j, q in enumerate(v.blocks):
        if np.allclose(q, target):
            return j
    raise KeyError(diag)
