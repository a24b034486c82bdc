import pytest

from sftkit import Alphabet, Pattern, SftSpec, involution_sft


@pytest.fixture(scope="session")
def binary():
    return Alphabet(["0", "1"])


@pytest.fixture(scope="session")
def hard_square(binary):
    """No two orthogonally adjacent 1s."""
    return SftSpec(binary, 2, [
        Pattern({(0, 0): "1", (1, 0): "1"}),
        Pattern({(0, 0): "1", (0, 1): "1"}),
    ])


@pytest.fixture(scope="session")
def involution5():
    """Five symbols, swaps (01) and (23), 4 fixed."""
    return involution_sft(2, 5, {0: 1, 1: 0, 2: 3, 3: 2})


@pytest.fixture(scope="session")
def checkerboard(binary):
    """Proper 2-coloring: no equal orthogonal neighbors."""
    return SftSpec(binary, 2, [
        Pattern({(0, 0): "0", (1, 0): "0"}),
        Pattern({(0, 0): "0", (0, 1): "0"}),
        Pattern({(0, 0): "1", (1, 0): "1"}),
        Pattern({(0, 0): "1", (0, 1): "1"}),
    ])
