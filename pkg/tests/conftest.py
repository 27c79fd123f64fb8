import numpy as np
import pytest

from freudhc.analysis import Basis
from freudhc.orthopoly import hermite_recurrence, stieltjes_recurrence
from freudhc.weights import WeightParams


@pytest.fixture(scope="session")
def gauss_params():
    return WeightParams(lam=2.0, a=0.5, b=0.0, d=1, r=2, p=2.0, q=2.0)


@pytest.fixture(scope="session")
def hermite_table(gauss_params):
    return hermite_recurrence(gauss_params, 140)


@pytest.fixture(scope="session")
def quartic_params():
    return WeightParams(lam=4.0, a=0.5, b=0.0, d=1, r=2, p=2.0, q=2.0)


@pytest.fixture(scope="session")
def quartic_table(quartic_params):
    return stieltjes_recurrence(quartic_params, 60)


@pytest.fixture(scope="session")
def hermite_basis(gauss_params):
    return Basis.build(gauss_params, 140)


@pytest.fixture(scope="session")
def rng():
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(2024)))
