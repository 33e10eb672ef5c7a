import pytest

from clifford_forge import construct_clifford_system


@pytest.fixture(scope="session")
def sys40():
    return construct_clifford_system(4, 0, 1)


@pytest.fixture(scope="session")
def sys44():
    return construct_clifford_system(4, 4, 1)


@pytest.fixture(scope="session")
def sys42():
    return construct_clifford_system(4, 2, 1)
