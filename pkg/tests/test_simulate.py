import numpy as np
import pytest

from circdesign.criteria import parse_criterion
from circdesign.design import contrast_info, design_info, lift_to_ternary
from circdesign.errors import SingularDesignError
from circdesign.sequences import BinaryDesign, default_m_sequence, insert_zeros, paley_hadamard_sequence
from circdesign.simulate import (
    GroundTruth,
    NoiseSpec,
    efficiency_report,
    generate_responses,
    monte_carlo,
    ols_fit,
    theoretical_covariance,
)

M31 = default_m_sequence(5)


def test_noise_free_null():
    y = generate_responses(M31, GroundTruth(1.0, h=np.zeros(5)), NoiseSpec("iid", 0.0), seed=0)
    assert np.array_equal(y, np.ones(31))


def test_noiseless_recovery(rng):
    h = rng.standard_normal(5)
    y = generate_responses(M31, GroundTruth(2.0, h=h), NoiseSpec("iid", 0.0), seed=0)
    fit = ols_fit(y, M31, 5)
    assert np.allclose(fit.estimate, h, atol=1e-10)
    assert np.isclose(fit.gamma, 2.0)


def test_noiseless_contrast_recovery(rng):
    u = lift_to_ternary(paley_hadamard_sequence(11), "j+d")
    h1, h2 = rng.standard_normal(3), rng.standard_normal(3)
    y = generate_responses(u, GroundTruth(0.5, h1=h1, h2=h2), NoiseSpec("iid", 0.0), seed=0)
    fit = ols_fit(y, u, 3, "contrast")
    assert np.allclose(fit.estimate, h1 - h2, atol=1e-10)


def test_seed_determinism():
    truth = GroundTruth(0.0, h=np.ones(5))
    a = generate_responses(M31, truth, NoiseSpec(), seed=7, replicates=3)
    b = generate_responses(M31, truth, NoiseSpec(), seed=7, replicates=3)
    assert np.array_equal(a, b)
    c = generate_responses(M31, truth, NoiseSpec(), seed=8, replicates=3)
    assert not np.array_equal(a, c)


def test_thread_independence():
    truth = GroundTruth(0.0, h=np.ones(5))
    a = monte_carlo(M31, truth, NoiseSpec(), 25_000, 3, threads=1)
    b = monte_carlo(M31, truth, NoiseSpec(), 25_000, 3, threads=3)
    assert np.array_equal(a.covariance, b.covariance)


def test_theory_iid():
    C = theoretical_covariance(M31, 5, NoiseSpec("iid", 2.0))
    Mb = design_info(M31, 5).matrix
    assert np.allclose(C, 2.0 * np.linalg.inv(Mb))


def test_compound_is_alpha_scaled(rng):
    beta = rng.normal(0, 0.01, size=31)
    noise = NoiseSpec.compound(31, 1.5, 2.0, beta)
    C = theoretical_covariance(M31, 5, noise)
    assert np.allclose(C, 1.5 * 2.0 * np.linalg.inv(design_info(M31, 5).matrix))


def test_compound_validation():
    with pytest.raises(ValueError):
        NoiseSpec.compound(5, 1.0, 0.1, [1.0, -1.0, 0.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        NoiseSpec("ar1")
    with pytest.raises(ValueError):
        NoiseSpec("iid", -1.0)
    with pytest.raises(ValueError):
        NoiseSpec.compound(5).covariance(6)


def test_singular_reported():
    with pytest.raises(SingularDesignError) as exc:
        ols_fit(np.zeros(7), BinaryDesign((1,) * 7), 3)
    assert exc.value.rank is not None
    with pytest.raises(SingularDesignError):
        theoretical_covariance(np.ones(7, dtype=int), 2, NoiseSpec(), "contrast")


def test_unbiased():
    h = np.array([0.0, 1.0, 0.6, 0.2, -0.1])
    res = monte_carlo(M31, GroundTruth(3.0, h=h), NoiseSpec(), 20_000, 11)
    se = np.sqrt(np.diag(res.covariance) / res.replicates)
    assert np.all(np.abs(res.mean - h) <= 3 * se)


def test_covariance_converges():
    truth = GroundTruth(0.0, h=np.ones(5))
    theory = theoretical_covariance(M31, 5, NoiseSpec())
    for seed in range(5):
        small = monte_carlo(M31, truth, NoiseSpec(), 1_000, seed).covariance
        big = monte_carlo(M31, truth, NoiseSpec(), 100_000, seed).covariance
        assert np.linalg.norm(big - theory) < np.linalg.norm(small - theory)


def test_diagonal_close_at_1e5():
    res = monte_carlo(M31, GroundTruth(0.0, h=np.ones(5)), NoiseSpec(), 100_000, 0)
    theory = theoretical_covariance(M31, 5, NoiseSpec())
    assert np.allclose(np.diag(res.covariance), np.diag(theory), rtol=0.05)


def test_contrast_covariance():
    u = lift_to_ternary(paley_hadamard_sequence(31), "j+d")
    truth = GroundTruth(0.0, h1=np.ones(4), h2=np.zeros(4))
    res = monte_carlo(u, truth, NoiseSpec(), 100_000, 1, objective="contrast")
    theory = np.linalg.inv(contrast_info(u, 4))
    assert np.allclose(theoretical_covariance(u, 4, NoiseSpec(), "contrast"), theory)
    assert np.allclose(np.diag(res.covariance), np.diag(theory), rtol=0.05)


def test_efficiency_examples(rng):
    p7 = paley_hadamard_sequence(7)
    rows = efficiency_report([p7, BinaryDesign((1,) * 7), rng.integers(0, 2, 7)], 3, parse_criterion("phi1"))
    assert rows[0].efficiency == 1.0 and rows[1].efficiency == 0.0
    assert 0.0 <= rows[2].efficiency <= 1.0
    assert efficiency_report([p7], 3, parse_criterion("phi1"))[0].efficiency == 1.0
    with pytest.raises(ValueError):
        efficiency_report([p7, insert_zeros(p7, 1)], 3, parse_criterion("phi1"))


def test_efficiency_ranking_under_compound():
    rng = np.random.default_rng(5)
    designs = [paley_hadamard_sequence(31), M31, rng.integers(0, 2, 31)]
    crit = parse_criterion("phi1")
    iid = [r.value for r in efficiency_report(designs, 5, crit)]
    comp = [r.value for r in efficiency_report(designs, 5, crit, NoiseSpec.compound(31))]
    assert np.argsort(iid).tolist() == np.argsort(comp).tolist()


def test_truth_validation():
    with pytest.raises(ValueError):
        GroundTruth(0.0)
    with pytest.raises(ValueError):
        GroundTruth(0.0, h1=np.ones(2), h2=np.ones(3))
    t = GroundTruth(0.0, h1=[1, 2], h2=[0, 1])
    assert t.K == 2 and t.zeta.tolist() == [1, 1] and t.eta.tolist() == [1, 3]
