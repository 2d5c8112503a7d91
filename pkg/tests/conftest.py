import numpy as np
import pytest

from ymhlab.forms import Grid


@pytest.fixture
def grid9():
    return Grid.cube(-1.0, 1.0, 9)


@pytest.fixture
def grid17():
    return Grid.cube(-1.5, 1.5, 17)


@pytest.fixture
def rng():
    return np.random.default_rng(20260811)


def monotone_decreasing(seq, slack=0.0):
    return all(b <= a + slack for a, b in zip(seq, seq[1:]))
