"""Monte-Carlo checks of the response model and its least-squares estimator.

Single stimulus:  ``y = gamma j + X_d h + e``.
Two stimuli:      ``y = gamma j + X_1 h_1 + X_2 h_2 + e``, refitted as
``gamma j + E eta + F zeta`` with ``zeta = h_1 - h_2``.

Random streams come from numpy's PCG64. A run with seed ``s`` and ``R``
replicates splits ``SeedSequence(s)`` into one child per block of
``BLOCK`` replicates, so results do not depend on the thread count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .criteria import CriterionSpec, eigenvalues
from .design import _check_ternary, column_space_projector, model_matrix, signed_info, ternary_components
from .errors import SingularDesignError
from .sequences import BinaryDesign

BLOCK = 10_000


@dataclass
class NoiseSpec:
    """``cov(e) = sigma2 * I`` (iid) or ``sigma2 * (alpha I + beta j' + j beta')`` (compound)."""

    kind: str = "iid"
    sigma2: float = 1.0
    alpha: float = 1.0
    beta: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in ("iid", "compound"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be nonnegative")
        if self.beta is not None:
            self.beta = np.asarray(self.beta, dtype=float)
            if self.kind == "compound" and self.sigma2 > 0:
                self._cholesky(self.beta.size)

    @classmethod
    def compound(cls, N: int, sigma2: float = 1.0, alpha: float = 1.0, beta=None) -> "NoiseSpec":
        if beta is None:
            beta = np.full(N, 0.1 / N)
        return cls("compound", sigma2, alpha, np.asarray(beta, dtype=float))

    def covariance(self, N: int) -> np.ndarray:
        if self.kind == "iid":
            return self.sigma2 * np.eye(N)
        beta = self.beta if self.beta is not None else np.full(N, 0.1 / N)
        if beta.size != N:
            raise ValueError(f"beta has length {beta.size}, design has {N} time points")
        j = np.ones(N)
        return self.sigma2 * (self.alpha * np.eye(N) + np.outer(beta, j) + np.outer(j, beta))

    def _cholesky(self, N: int) -> np.ndarray:
        try:
            return np.linalg.cholesky(self.covariance(N))
        except np.linalg.LinAlgError:
            raise ValueError("compound noise covariance is not positive definite") from None

    def draw(self, rng: np.random.Generator, N: int, size: int) -> np.ndarray:
        """Noise matrix of shape (N, size)."""
        z = rng.standard_normal((N, size))
        if self.sigma2 == 0:
            return np.zeros((N, size))
        if self.kind == "iid":
            return math.sqrt(self.sigma2) * z
        return self._cholesky(N) @ z


@dataclass
class GroundTruth:
    gamma: float
    h: Optional[np.ndarray] = None
    h1: Optional[np.ndarray] = None
    h2: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("h", "h1", "h2"):
            v = getattr(self, name)
            if v is not None:
                setattr(self, name, np.atleast_1d(np.asarray(v, dtype=float)))
        if self.h is None and (self.h1 is None or self.h2 is None):
            raise ValueError("give h, or both h1 and h2")
        if self.h1 is not None and self.h2 is not None and self.h1.shape != self.h2.shape:
            raise ValueError("h1 and h2 must have the same length")

    @property
    def two_stimulus(self) -> bool:
        return self.h is None

    @property
    def K(self) -> int:
        return (self.h if self.h is not None else self.h1).size

    @property
    def zeta(self) -> np.ndarray:
        return self.h1 - self.h2

    @property
    def eta(self) -> np.ndarray:
        return self.h1 + self.h2


def _as_array(design) -> np.ndarray:
    if isinstance(design, BinaryDesign):
        return np.array(design.bits, dtype=np.int64)
    return np.asarray(design, dtype=np.int64)


def mean_response(design, truth: GroundTruth) -> np.ndarray:
    """Noise-free response, using the circular pre-scan convention."""
    a = _as_array(design)
    K = truth.K
    if truth.two_stimulus:
        u = _check_ternary(a)
        x1 = model_matrix((u == 1).astype(np.int64), K)
        x2 = model_matrix((u == 2).astype(np.int64), K)
        return truth.gamma + x1 @ truth.h1 + x2 @ truth.h2
    if np.any((a != 0) & (a != 1)):
        raise ValueError("single-stimulus designs are binary")
    return truth.gamma + model_matrix(a, K) @ truth.h


def generate_responses(design, truth: GroundTruth, noise: NoiseSpec, seed: int, replicates: int = 1) -> np.ndarray:
    """Simulated responses; shape (N,) for one replicate, else (N, replicates)."""
    mu = mean_response(design, truth)
    N = mu.size
    noise.covariance(N)  # validates beta length
    eps = _draw_blocks(noise, N, replicates, seed)
    y = mu[:, None] + eps
    return y[:, 0] if replicates == 1 else y


def _draw_blocks(noise: NoiseSpec, N: int, replicates: int, seed: int, threads: int = 1) -> np.ndarray:
    n_blocks = max(1, -(-replicates // BLOCK))
    children = np.random.SeedSequence(seed).spawn(n_blocks)

    def block(i):
        size = min(BLOCK, replicates - i * BLOCK)
        return noise.draw(np.random.Generator(np.random.PCG64(children[i])), N, size)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(block, range(n_blocks)))
    else:
        parts = [block(i) for i in range(n_blocks)]
    return np.concatenate(parts, axis=1)


@dataclass
class OLSFit:
    objective: str
    estimate: np.ndarray  # h-hat, or zeta-hat for the contrast objective
    eta: Optional[np.ndarray]
    gamma: np.ndarray
    sigma2: np.ndarray
    rank: int


def regressors(design, K: int, objective: str = "estimate_hrf") -> np.ndarray:
    """Columns ``[j, X]`` or ``[j, E, F]``; the parameters of interest come last."""
    a = _as_array(design)
    N = a.size
    if objective == "estimate_hrf":
        return np.column_stack([np.ones(N), model_matrix(a, K).astype(float)])
    if objective == "contrast":
        E, F = ternary_components(a, K)
        return np.column_stack([np.ones(N), E, F])
    raise ValueError(f"unknown objective {objective!r}")


def estimator_map(design, K: int, objective: str = "estimate_hrf") -> np.ndarray:
    """Matrix A with ``A y`` the OLS estimate of h (or zeta)."""
    Z = regressors(design, K, objective)
    if objective == "contrast":
        # eta is not always identifiable; only the F-block must be estimable
        N = Z.shape[0]
        E, F = Z[:, 1:1 + K], Z[:, 1 + K:]
        P = column_space_projector(np.column_stack([np.ones(N), E]))
        Fr = F - P @ F
        M = Fr.T @ Fr
        rank = np.linalg.matrix_rank(M)
        if rank < K:
            raise SingularDesignError(f"contrast information has rank {rank} < {K}", rank)
        return np.linalg.solve(M, Fr.T)
    rank = np.linalg.matrix_rank(Z)
    if rank < Z.shape[1]:
        raise SingularDesignError(f"normal equations are singular: rank {rank} < {Z.shape[1]}", rank)
    return np.linalg.pinv(Z)[1:]


def ols_fit(y: np.ndarray, design, K: int, objective: str = "estimate_hrf") -> OLSFit:
    """Least squares with an intercept; ``y`` may hold replicates as columns."""
    y = np.asarray(y, dtype=float)
    Z = regressors(design, K, objective)
    N, P = Z.shape
    coef, _, rank, _ = np.linalg.lstsq(Z, y, rcond=None)
    resid = y - Z @ coef
    dof = max(N - rank, 1)
    sigma2 = np.sum(resid * resid, axis=0) / dof
    if objective == "estimate_hrf":
        if rank < P:
            raise SingularDesignError(f"normal equations are singular: rank {rank} < {P}", rank)
        return OLSFit(objective, coef[1:], None, coef[0], sigma2, int(rank))
    A = estimator_map(design, K, objective)
    zeta = A @ y
    eta = coef[1:1 + K] if rank == P else None
    return OLSFit(objective, zeta, eta, coef[0], sigma2, int(rank))


def theoretical_covariance(design, K: int, noise: NoiseSpec, objective: str = "estimate_hrf") -> np.ndarray:
    """Exact covariance of the OLS estimate, ``A Sigma A'``."""
    A = estimator_map(design, K, objective)
    return A @ noise.covariance(A.shape[1]) @ A.T


@dataclass
class MonteCarloResult:
    mean: np.ndarray
    covariance: np.ndarray
    replicates: int
    truth: np.ndarray


def monte_carlo(
    design,
    truth: GroundTruth,
    noise: NoiseSpec,
    replicates: int,
    seed: int,
    objective: str = "estimate_hrf",
    threads: int = 1,
) -> MonteCarloResult:
    """Empirical mean and covariance of the estimate over ``replicates`` draws.

    The estimate is linear in the noise, so it is accumulated as
    ``truth + A e`` with centred second moments summed block by block.
    """
    K = truth.K
    A = estimator_map(design, K, objective)
    mu = mean_response(design, truth)
    N = mu.size
    base = A @ mu
    n_blocks = max(1, -(-replicates // BLOCK))
    children = np.random.SeedSequence(seed).spawn(n_blocks)

    def block(i):
        size = min(BLOCK, replicates - i * BLOCK)
        eps = noise.draw(np.random.Generator(np.random.PCG64(children[i])), N, size)
        est = A @ eps
        m = est.mean(axis=1)
        c = est - m[:, None]
        return size, m, c @ c.T

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(block, range(n_blocks)))
    else:
        parts = [block(i) for i in range(n_blocks)]

    # pairwise (Chan et al.) merge of block means and scatter matrices
    n, mean, scatter = parts[0]
    for nb, mb, sb in parts[1:]:
        delta = mb - mean
        tot = n + nb
        mean = mean + delta * nb / tot
        scatter = scatter + sb + np.outer(delta, delta) * n * nb / tot
        n = tot
    cov = scatter / (n - 1)
    target = truth.h if objective == "estimate_hrf" else truth.zeta
    return MonteCarloResult(base + mean, cov, n, target)


@dataclass
class EfficiencyRow:
    label: str
    value: float
    efficiency: float


def efficiency_report(
    designs: Sequence,
    K: int,
    criterion: CriterionSpec,
    noise: Optional[NoiseSpec] = None,
    labels: Optional[Sequence[str]] = None,
) -> List[EfficiencyRow]:
    """Best criterion value divided by each design's value (0 for singular designs).

    With no noise (or iid noise) the criterion is applied to the information
    matrix; under compound noise it is applied to the inverse of the exact
    OLS covariance, scaled by sigma2.
    """
    arrays = [_as_array(d) for d in designs]
    if len({a.size for a in arrays}) > 1:
        raise ValueError("all designs must have the same length")
    labels = list(labels) if labels is not None else [f"design_{i}" for i in range(len(arrays))]
    values = []
    for a in arrays:
        if noise is None or noise.kind == "iid":
            M = signed_info(a, K).matrix / 4.0
        else:
            try:
                C = theoretical_covariance(a, K, noise) / noise.sigma2
            except SingularDesignError:
                values.append(math.inf)
                continue
            M = np.linalg.inv(C)
            M = (M + M.T) / 2
        values.append(criterion.from_spectrum(eigenvalues(M)))
    finite = [v for v in values if math.isfinite(v)]
    best = min(finite) if finite else math.inf
    rows = []
    for label, v in zip(labels, values):
        eff = 0.0 if not math.isfinite(v) else best / v
        rows.append(EfficiencyRow(label, v, eff))
    return rows
