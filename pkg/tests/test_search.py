import math

import numpy as np
import pytest

from circdesign.criteria import CriterionSpec, inverse_x, neg_log, parse_criterion
from circdesign.design import lift_to_ternary
from circdesign.errors import CapExceeded
from circdesign.search import (
    canonical_design,
    design_value,
    exhaustive_best,
    space_size,
    verify_optimal,
)
from circdesign.sequences import BinaryDesign, insert_zeros, paley_hadamard_sequence

PHI1 = CriterionSpec("phi_p", p=1)


def test_paley7_phi1():
    rep = exhaustive_best("binary", 7, 3, PHI1)
    assert math.isclose(rep.best_value * 3, 2 / 8 + 7 / 32, rel_tol=1e-12)
    canon = canonical_design(paley_hadamard_sequence(7), "binary")
    assert canon in rep.argmin
    assert rep.orbits_checked == 100


def test_reduced_matches_full():
    a = exhaustive_best("binary", 8, 3, PHI1, symmetry_reduce=True)
    b = exhaustive_best("binary", 8, 3, PHI1, symmetry_reduce=False)
    assert a.best_value == b.best_value
    assert a.argmin == b.argmin
    assert a.evaluated < b.evaluated == 256


def test_threads_deterministic():
    a = exhaustive_best("binary", 10, 3, PHI1, threads=1)
    b = exhaustive_best("binary", 10, 3, PHI1, threads=4)
    assert a.best_value == b.best_value and a.argmin == b.argmin


def test_insertion_universal_proxy():
    d = insert_zeros(paley_hadamard_sequence(7), 1)
    for p in (0, 1, 2, math.inf):
        ok, margin = verify_optimal(d, "binary", 3, CriterionSpec("phi_p", p=p))
        assert ok and margin <= 1e-10
    assert math.isclose(design_value(d, "binary", 3, PHI1), 0.125)


def test_two_zero_insertion_type1():
    d = insert_zeros(paley_hadamard_sequence(7), 2)
    for f in (inverse_x, neg_log):
        ok, _ = verify_optimal(d, "binary", 3, CriterionSpec("type1", f=f))
        assert ok


def test_all_ones_not_optimal():
    ok, margin = verify_optimal(BinaryDesign((1,) * 7), "binary", 3, PHI1)
    assert not ok and margin == math.inf


def test_signed_space():
    rep = exhaustive_best("signed", 7, 3, PHI1)
    dt = tuple(int(x) for x in 1 - 2 * np.array(paley_hadamard_sequence(7).bits))
    assert canonical_design(dt, "signed") in rep.argmin
    assert canonical_design(tuple(-x for x in dt), "signed") == canonical_design(dt, "signed")


def test_ternary_space():
    u = lift_to_ternary(paley_hadamard_sequence(7), "j+d")
    ok, margin = verify_optimal(u, "ternary_two_stim", 2, PHI1)
    assert ok and abs(margin) <= 1e-10
    rep = exhaustive_best("ternary_two_stim", 7, 2, PHI1)
    assert canonical_design(u, "ternary_two_stim") in rep.argmin
    assert canonical_design(lift_to_ternary(paley_hadamard_sequence(7), "2j-d"), "ternary_two_stim") in rep.argmin


def test_cap():
    with pytest.raises(CapExceeded) as exc:
        exhaustive_best("binary", 30, 3, PHI1)
    assert exc.value.required == 2 ** 30
    with pytest.raises(CapExceeded):
        exhaustive_best("binary", 10, 3, PHI1, cap=100)
    with pytest.raises(CapExceeded):
        exhaustive_best("ternary_two_stim", 16, 2, PHI1, cap=10 ** 9)


def test_env_cap(monkeypatch):
    monkeypatch.setenv("CIRCDESIGN_CAP", "64")
    with pytest.raises(CapExceeded):
        exhaustive_best("binary", 7, 3, PHI1)


def test_errors():
    with pytest.raises(ValueError):
        exhaustive_best("quaternary", 5, 2, PHI1)
    with pytest.raises(ValueError):
        exhaustive_best("binary", 5, 6, PHI1)
    with pytest.raises(ValueError):
        exhaustive_best("binary", 5, 2, CriterionSpec("ms"))
    assert space_size("ternary_two_stim", 4) == 81


def test_best_bounds_every_design():
    rep = exhaustive_best("binary", 9, 3, parse_criterion("phi0"), symmetry_reduce=False)
    rng = np.random.default_rng(3)
    for _ in range(50):
        d = rng.integers(0, 2, size=9)
        assert design_value(d, "binary", 3, parse_criterion("phi0")) >= rep.best_value * (1 - 1e-12)


def test_report_dict():
    rep = exhaustive_best("binary", 7, 3, PHI1)
    d = rep.to_dict()
    assert d["space"] == "binary" and "0010111" in d["argmin"]
