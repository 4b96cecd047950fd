import math

import pytest

from app.schemas.experiment_schema import HamiltonianSpec
from app.services.hamiltonian import (build_diagonal, build_ising,
                                      build_random_hermitian,
                                      build_transverse_ising)
from app.services.spectral import build_eigensystem, build_kick

LN2 = math.log(2)


# Двухуровневая система с энергиями {0, 1}
@pytest.fixture
def two_state():
    es = build_eigensystem(build_diagonal(1, [0.0, 1.0]))
    return es, build_kick(es, "single-flip", 1)


# Поперечная модель Изинга, n = 2
@pytest.fixture
def tfim2():
    es = build_eigensystem(build_transverse_ising(2, 1.0, 1.0))
    return es, build_kick(es, "pauli-flips")


@pytest.fixture
def ising3():
    es = build_eigensystem(build_ising(3, 1.0))
    return es, build_kick(es, "single-flip", 1)


@pytest.fixture
def random2():
    es = build_eigensystem(build_random_hermitian(2, seed=5))
    return es, build_kick(es, "spin-flips")


@pytest.fixture
def tfim_spec():
    return HamiltonianSpec(model="tfim", n=2, J=1.0, h=1.0)


# Каталог результатов во временной папке теста
@pytest.fixture
def out_dir(tmp_path):
    return tmp_path / "results"
