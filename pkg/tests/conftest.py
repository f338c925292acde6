from pathlib import Path

import numpy as np
import pytest

from app.modules.classical.repository import trajectory_cache
from app.modules.deformation.repository import kernel_cache
from app.modules.operator_model.models import FourierPotential
from app.modules.operator_model.repository import ProblemRepository

PROBLEMS_DIR = Path(__file__).resolve().parent.parent / "problems"


@pytest.fixture(scope="session")
def problems_dir() -> Path:
    return PROBLEMS_DIR


@pytest.fixture(scope="session")
def repository() -> ProblemRepository:
    return ProblemRepository()


@pytest.fixture(scope="session")
def load_problem(repository):
    def _load(name: str):
        return repository.load(PROBLEMS_DIR / f"{name}.json")
    return _load


@pytest.fixture(scope="session")
def free_model():
    return ProblemRepository.free(1)


@pytest.fixture(scope="session")
def harmonic_model():
    return ProblemRepository.harmonic(1.0, 1)


@pytest.fixture(scope="session")
def stiff_harmonic_model():
    return ProblemRepository.harmonic(9.0, 1)


@pytest.fixture(scope="session")
def magnetic_model():
    return ProblemRepository.magnetic(np.array([[0.0, 1.0], [-1.0, 0.0]]))


@pytest.fixture(scope="session")
def cos_potential() -> FourierPotential:
    """½cos x"""
    return FourierPotential.cosine(1, [1.0], 0.5)


@pytest.fixture(scope="session")
def zero_potential() -> FourierPotential:
    return FourierPotential.zero(1)


@pytest.fixture
def fresh_caches():
    """Vacía las memoizaciones globales antes y después de la prueba"""
    trajectory_cache.clear()
    kernel_cache.clear()
    yield
    trajectory_cache.clear()
    kernel_cache.clear()
