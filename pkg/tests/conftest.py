import numpy as np
import pytest

from gaussito import catalog


@pytest.fixture(scope="session")
def brownian():
    return catalog("brownian")


@pytest.fixture(scope="session")
def fbm07():
    return catalog("fbm", hurst=0.7)


@pytest.fixture(scope="session")
def jump_bm():
    return catalog("jump_bm", jumps=[(0.5, 0.25)])


@pytest.fixture(scope="session")
def coupled():
    return catalog("coupled_jump_bm", c=1.0, s0=0.5)


@pytest.fixture(scope="session")
def evanescent():
    return catalog("evanescent", s0=0.5)


@pytest.fixture(scope="session")
def all_specs(brownian, fbm07, jump_bm, coupled, evanescent):
    return [brownian, fbm07, jump_bm, coupled, evanescent]


def sample_covariance(paths: np.ndarray) -> np.ndarray:
    return paths.T @ paths / paths.shape[0]
