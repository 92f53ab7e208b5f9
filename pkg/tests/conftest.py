import numpy as np
import pytest

from catscreen.crystal import Structure
from catscreen.energetics import MorseSurrogate, SurrogateParams


@pytest.fixture
def cu_bulk():
    """1-site simple-cubic Cu cell, a = 3.6 A."""
    return Structure(np.eye(3) * 3.6, ["Cu"], [[0.0, 0.0, 0.0]])


@pytest.fixture
def fcc_cu_bulk():
    return Structure(
        np.eye(3) * 3.615,
        ["Cu"] * 4,
        [[0, 0, 0], [0.5, 0.5, 0], [0.5, 0, 0.5], [0, 0.5, 0.5]],
    )


@pytest.fixture
def dimer_calc():
    """Morse surrogate with an exactly-known Cu-Cu minimum at 2.5 A."""
    return MorseSurrogate(SurrogateParams(pairs={("Cu", "Cu"): (1.0, 1.0, 2.5)}))


def make_dimer(r, species=("Cu", "Cu"), box=30.0):
    return Structure(
        np.eye(3) * box,
        list(species),
        [[0.4, 0.5, 0.5], [0.4 + r / box, 0.5, 0.5]],
    )
