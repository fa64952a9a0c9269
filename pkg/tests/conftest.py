import numpy as np
import pytest

from circdesign.sequences import paley_hadamard_sequence


def primes_3mod4(limit):
    out = []
    for n in range(3, limit + 1, 4):
        if all(n % q for q in range(2, int(n ** 0.5) + 1)):
            out.append(n)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def paley7():
    return paley_hadamard_sequence(7)
