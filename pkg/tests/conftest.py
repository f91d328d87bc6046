import functools

import numpy as np
import pytest

from stabatlas.group_engine import close_subgroup

HC = ("H1", "H2", "C12", "C21")
C2 = ("H1", "H2", "P1", "P2", "C12", "C21")


@functools.lru_cache(maxsize=None)
def group(gens: tuple[str, ...], mod_phase: bool = True):
    """Session-wide memo so the heavier groups are enumerated once."""
    return close_subgroup(list(gens), mod_phase=mod_phase)


@pytest.fixture(scope="session")
def hc_table():
    return group(HC)


@pytest.fixture(scope="session")
def c2_table():
    return group(C2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
