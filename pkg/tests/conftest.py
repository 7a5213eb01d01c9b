import pytest

from ktrg.lattice import TorusLattice
from ktrg.decomposition import decompose


@pytest.fixture(scope="session")
def stack_l3_massive():
    """(L, R, m) = (3, 3, 0.1): the small massive reference stack."""
    return decompose(TorusLattice(L=3, R=3, m=0.1))


@pytest.fixture(scope="session")
def stack_l3_massless():
    """(L, R) = (3, 6), massless: scales j = 0..5 on the 729 torus."""
    return decompose(TorusLattice(L=3, R=6, m=0.0))


@pytest.fixture(scope="session")
def stack_l3_r5():
    return decompose(TorusLattice(L=3, R=5, m=0.0))


@pytest.fixture(scope="session")
def stack_l9_massless():
    """(L, R) = (9, 6), massless; metadata-only (no torus tables)."""
    return decompose(TorusLattice(L=9, R=6, m=0.0))
