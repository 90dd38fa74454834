import json
import math

import numpy as np
import pytest

from systolic.models.schemas import FlatTorus, GramMatrix
from systolic.services import (
    BmOptimizerService,
    DualCriteriaService,
    ExtremalConstructionService,
    HodgeService,
    LatticeService,
    TorusSystoleService,
)

HEXAGONAL_ROWS = [[1, 0.5], [0.5, 1]]
FCC_ROWS = [[2, 1, 1], [1, 2, 1], [1, 1, 2]]
HEXAGONAL_BASIS = np.array([[1.0, 0.5], [0.0, math.sqrt(3.0) / 2.0]])


@pytest.fixture(scope="session")
def lattice_service():
    return LatticeService()


@pytest.fixture(scope="session")
def dual_service(lattice_service):
    return DualCriteriaService(lattice_service)


@pytest.fixture(scope="session")
def optimizer_service(lattice_service):
    return BmOptimizerService(lattice_service)


@pytest.fixture(scope="session")
def torus_service(lattice_service):
    return TorusSystoleService(lattice_service)


@pytest.fixture(scope="session")
def hodge_service(lattice_service):
    return HodgeService(lattice_service)


@pytest.fixture(scope="session")
def construction_service(hodge_service):
    return ExtremalConstructionService(hodge_service)


@pytest.fixture
def hexagonal():
    return GramMatrix.from_rows(HEXAGONAL_ROWS)


@pytest.fixture
def hexagonal_exact():
    return GramMatrix.from_rows([[1, "1/2"], ["1/2", 1]], exact=True)


@pytest.fixture
def fcc():
    return GramMatrix.from_rows(FCC_ROWS)


@pytest.fixture
def fcc_exact():
    return GramMatrix.from_rows(FCC_ROWS, exact=True)


@pytest.fixture
def identity():
    def make(b: int, exact: bool = False) -> GramMatrix:
        return GramMatrix.from_rows(np.eye(b, dtype=int).tolist(), exact=exact)
    return make


@pytest.fixture
def torus():
    def make(rows) -> FlatTorus:
        return FlatTorus.from_gram(GramMatrix.from_rows(rows))
    return make


@pytest.fixture
def gram_file(tmp_path):
    def write(rows, name="gram.json", as_strings=False):
        entries = [[str(x) for x in row] for row in rows] if as_strings else rows
        path = tmp_path / name
        path.write_text(json.dumps({"dim": len(rows), "gram": entries}))
        return str(path)
    return write


def random_gram(rng: np.random.Generator, b: int) -> GramMatrix:
    """Symmetric matrix with entries in [−5, 5], shifted to have smallest eigenvalue 1"""
    m = rng.uniform(-5.0, 5.0, (b, b))
    m = 0.5 * (m + m.T)
    shift = abs(float(np.min(np.linalg.eigvalsh(m)))) + 1.0
    return GramMatrix(entries=m + shift * np.eye(b))


@pytest.fixture(name="random_gram")
def random_gram_fixture():
    return random_gram
