import numpy as np
import pytest

from muhs.spectral import PeriodicGrid

TWO_PI = 2.0 * np.pi


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def field_of(func, n=128):
    return PeriodicGrid(n).from_function(func)


def cos1(n=128, amp=1.0, offset=0.0):
    return field_of(lambda x: offset + amp * np.cos(TWO_PI * x), n)


def sin1(n=128, amp=1.0, offset=0.0):
    return field_of(lambda x: offset + amp * np.sin(TWO_PI * x), n)
