import numpy as np
import pytest

from circdesign.design import signed_info
from circdesign.errors import ConstructionError
from circdesign.sequences import (
    PRIMITIVE_POLYNOMIALS,
    BinaryDesign,
    ZeroRun,
    default_m_sequence,
    insert_zeros,
    m_sequence,
    min_rotation,
    paley_hadamard_sequence,
    taps_from_exponents,
    zero_runs,
)

from conftest import primes_3mod4


def test_paley_small():
    assert str(paley_hadamard_sequence(7)) == "1001011"
    assert str(paley_hadamard_sequence(3)) == "101"


@pytest.mark.parametrize("N", [1, 5, 9, 10, 13, 15, 21])
def test_paley_rejects(N):
    with pytest.raises(ConstructionError, match="prime ≡ 3"):
        paley_hadamard_sequence(N)


def test_paley_weight():
    for N in primes_3mod4(200):
        d = paley_hadamard_sequence(N)
        assert sum(d.bits) == (N + 1) // 2


def test_m_sequence_default_degree2():
    d = default_m_sequence(2)
    assert d.N == 3 and sorted(d.bits) == [0, 1, 1]


def test_m_sequence_degree2():
    assert str(m_sequence(2, taps_from_exponents([2, 1, 0]), 0b11)) == "110"


def test_m_sequence_non_primitive():
    with pytest.raises(ConstructionError, match="not primitive"):
        m_sequence(3, taps_from_exponents([3, 2, 1, 0]), 1)


def test_m_sequence_bad_inputs():
    with pytest.raises(ConstructionError):
        m_sequence(3, taps_from_exponents([3, 1, 0]), 0)
    with pytest.raises(ConstructionError):
        m_sequence(3, taps_from_exponents([4, 1, 0]), 1)


@pytest.mark.parametrize("r", sorted(PRIMITIVE_POLYNOMIALS))
def test_m_sequence_balance_and_window(r):
    d = default_m_sequence(r)
    N = 2 ** r - 1
    assert d.N == N and sum(d.bits) == 2 ** (r - 1)
    if r <= 10:
        windows = {tuple(d.bits[(i + k) % N] for k in range(r)) for i in range(N)}
        assert len(windows) == N


def test_hadamard_identity_all_sources():
    designs = [paley_hadamard_sequence(N) for N in primes_3mod4(500)]
    designs += [default_m_sequence(r) for r in range(2, 10)]
    for d in designs:
        N = d.N
        for K in (1, min(N, 5), min(N, 12)):
            S = signed_info(d, K)
            expect = (N + 1) * (N * np.eye(K, dtype=np.int64) - 1)
            assert np.array_equal(S.scaled, expect)


def test_zero_runs_examples():
    assert zero_runs([1, 0, 0, 1, 0, 1, 1]) == [ZeroRun(2, 2), ZeroRun(5, 1)]
    assert zero_runs([0, 1, 1, 0]) == [ZeroRun(4, 2)]
    assert zero_runs([0, 0, 1, 0, 0]) == [ZeroRun(4, 4)]
    assert zero_runs([1, 1, 1, 1, 1]) == []
    assert zero_runs([0, 0, 0]) == [ZeroRun(1, 3)]


def test_zero_runs_total(rng):
    for _ in range(200):
        bits = rng.integers(0, 2, size=int(rng.integers(1, 30)))
        runs = zero_runs(bits)
        assert sum(r.length for r in runs) == int(np.sum(bits == 0))


def test_insert_one():
    d = insert_zeros(paley_hadamard_sequence(7), 1)
    assert str(d) == "10001011"
    assert d.meta["g"] == 2 and d.provenance == "insertion"


def test_insert_two():
    d = insert_zeros(paley_hadamard_sequence(7), 2)
    assert str(d) == "100001011"


def test_insert_twice_equals_insert_two():
    for N in primes_3mod4(120):
        d = paley_hadamard_sequence(N)
        once = insert_zeros(insert_zeros(d, 1), 1)
        assert once.bits == insert_zeros(d, 2).bits


def test_insert_rejects():
    with pytest.raises(ConstructionError):
        insert_zeros(BinaryDesign((1, 1, 1)), 1)
    with pytest.raises(ValueError):
        insert_zeros(paley_hadamard_sequence(7), 3)


def test_canonical_rotation(rng):
    for _ in range(100):
        bits = tuple(int(b) for b in rng.integers(0, 2, size=12))
        d = BinaryDesign(bits)
        brute = min(bits[k:] + bits[:k] for k in range(12))
        assert d.canonical().bits == brute
        assert d.rotate(5).canonical() == d.canonical()
    assert min_rotation([]) == 0


def test_design_validation():
    with pytest.raises(ValueError):
        BinaryDesign((0, 2))
    with pytest.raises(ValueError):
        BinaryDesign(())
    assert BinaryDesign.from_string("1 0 1").bits == (1, 0, 1)
    assert BinaryDesign((1, 0), meta={"a": 1}) == BinaryDesign((1, 0))
