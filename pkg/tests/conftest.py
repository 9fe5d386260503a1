"""Shared fixtures for the qstlab test suite."""

from typing import Callable

import numpy as np
import pytest

from qstlab.config import Settings, reset_settings
from qstlab.core.randomizer import sample_and_certify
from qstlab.models import CertificationResult, KeySet

ENV_VARS = [
    "QSTLAB_THREADS",
    "QSTLAB_DENSE_CAP",
    "QSTLAB_TRANSFORM_CAP",
    "QSTLAB_SEED",
    "QSTLAB_LOG_LEVEL",
]


@pytest.fixture(autouse=True)
def default_settings(monkeypatch):
    """Every test starts from default settings, whatever the environment says."""
    for name in ENV_VARS:
        monkeypatch.delenv(name, raising=False)
    reset_settings(Settings())
    yield
    reset_settings()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20140101)


@pytest.fixture
def make_key_set(rng) -> Callable[[int, int], KeySet]:
    """Random (uncertified) key set of ``size`` keys on ``n`` qubits."""

    def make(n: int, size: int) -> KeySet:
        return KeySet(n=n, codes=rng.integers(0, 1 << (2 * n), size=size))

    return make


@pytest.fixture(scope="session")
def certified_n4() -> CertificationResult:
    """Certified 0.8-randomizer on four qubits."""
    reset_settings(Settings())
    return sample_and_certify(4, 0.8, seed=7)
