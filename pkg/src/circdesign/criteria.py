"""Optimality criteria on information matrices.

All criteria are to be minimised and are ``+inf`` for singular matrices.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .design import ScaledInfoMatrix

CLAMP_RTOL = 1e-10


class NotNonnegativeDefinite(ValueError):
    pass


def _as_array(M) -> np.ndarray:
    if isinstance(M, ScaledInfoMatrix):
        return M.matrix
    return np.asarray(M, dtype=float)


def eigenvalues(M) -> np.ndarray:
    """Descending eigenvalues of a symmetric NND matrix, near-zeros clamped to 0."""
    A = _as_array(M)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("information matrix must be square")
    scale = max(np.abs(A).max(initial=0.0), 1.0)
    if not np.allclose(A, A.T, rtol=0, atol=1e-12 * scale):
        raise ValueError("information matrix is not symmetric")
    lam = np.linalg.eigvalsh((A + A.T) / 2)[::-1]
    tol = CLAMP_RTOL * max(lam[0], 0.0) if lam.size else 0.0
    if lam.size and lam[-1] < -tol:
        raise NotNonnegativeDefinite(f"eigenvalue {lam[-1]:.3g} below -{tol:.3g}")
    lam = np.where(np.abs(lam) <= tol, 0.0, lam)
    return lam


def phi_p(M, p: float) -> float:
    """Kiefer's Phi_p: D at p=0, A (``tr(M^-1)/K``) at p=1, E at p=inf."""
    if p < 0:
        raise ValueError("p must be nonnegative")
    lam = eigenvalues(M)
    return phi_p_from_spectrum(lam, p)


def phi_p_from_spectrum(lam: np.ndarray, p: float) -> float:
    if p < 0:
        raise ValueError("p must be nonnegative")
    lam = np.asarray(lam, dtype=float)
    if lam.size == 0 or lam.min() <= 0:
        return math.inf
    if p == 0:
        return math.exp(-np.mean(np.log(lam)))
    if math.isinf(p):
        return 1.0 / lam.min()
    if p == 1:
        return float(np.sum(1.0 / lam) / lam.size)
    return float(np.mean(lam ** (-p)) ** (1.0 / p))


def type1_value(M, f: Callable[[float], float]) -> float:
    """``sum f(lambda_i)``; a zero eigenvalue gives ``+inf``."""
    lam = eigenvalues(M)
    if lam.size == 0 or lam.min() <= 0:
        return math.inf
    return float(sum(f(float(x)) for x in lam))


class Ordering(enum.Enum):
    BETTER = "better"
    WORSE = "worse"
    TIE = "tie"
    INCOMPARABLE = "incomparable"


def ms_compare(M1, M2, rtol: float = 1e-12) -> Ordering:
    """(M,S) ordering: larger trace wins, then smaller trace of the square.

    Scaled integer matrices are compared exactly. Float matrices are compared
    with relative tolerance ``rtol``; non-finite entries are INCOMPARABLE.
    """
    if isinstance(M1, ScaledInfoMatrix) and isinstance(M2, ScaledInfoMatrix):
        if M1.K != M2.K:
            raise ValueError("dimension mismatch")
        key1 = (M1.trace(), -M1.trace_of_square())
        key2 = (M2.trace(), -M2.trace_of_square())
    else:
        A, B = _as_array(M1), _as_array(M2)
        if A.shape != B.shape:
            raise ValueError("dimension mismatch")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
            return Ordering.INCOMPARABLE

        def close(x, y):
            return abs(x - y) <= rtol * max(abs(x), abs(y), 1.0)

        t1, t2 = float(np.trace(A)), float(np.trace(B))
        if not close(t1, t2):
            return Ordering.BETTER if t1 > t2 else Ordering.WORSE
        s1, s2 = float(np.sum(A * A)), float(np.sum(B * B))
        if close(s1, s2):
            return Ordering.TIE
        return Ordering.BETTER if s1 < s2 else Ordering.WORSE
    if key1 > key2:
        return Ordering.BETTER
    if key1 < key2:
        return Ordering.WORSE
    return Ordering.TIE


@dataclass(frozen=True)
class CriterionSpec:
    """Which criterion to minimise: ``phi_p`` (with ``p``), ``type1`` (with ``f``) or ``ms``."""

    kind: str = "phi_p"
    p: float = 1.0
    f: Optional[Callable[[float], float]] = None
    name: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ("phi_p", "type1", "ms"):
            raise ValueError(f"unknown criterion kind {self.kind!r}")
        if self.kind == "phi_p" and not self.p >= 0:
            raise ValueError("p must be nonnegative")
        if (self.kind == "type1") != (self.f is not None):
            raise ValueError("f is required for type1 criteria and only for them")

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        if self.kind == "phi_p":
            return "phi_inf" if math.isinf(self.p) else f"phi_{self.p:g}"
        return self.kind

    def from_spectrum(self, lam: np.ndarray) -> float:
        if self.kind == "phi_p":
            return phi_p_from_spectrum(lam, self.p)
        if self.kind == "type1":
            if lam.min() <= 0:
                return math.inf
            return float(sum(self.f(float(x)) for x in lam))
        raise ValueError("ms is an ordering, not a scalar criterion")

    def __call__(self, M) -> float:
        return self.from_spectrum(eigenvalues(M))


def inverse_x(x: float) -> float:
    return 1.0 / x


def neg_log(x: float) -> float:
    return -math.log(x)


def parse_criterion(text: str) -> CriterionSpec:
    """``phi0``, ``phi1``, ``phi2.5``, ``phiinf``, ``A``, ``D``, ``E``, ``inv``, ``neglog``."""
    t = text.strip().lower()
    aliases = {"a": "phi1", "d": "phi0", "e": "phiinf"}
    t = aliases.get(t, t)
    if t in ("inv", "type1-inv"):
        return CriterionSpec("type1", f=inverse_x, name="type1_inv")
    if t in ("neglog", "type1-neglog"):
        return CriterionSpec("type1", f=neg_log, name="type1_neglog")
    if t.startswith("phi"):
        rest = t[3:].lstrip("_")
        p = math.inf if rest in ("inf", "∞") else float(rest)
        return CriterionSpec("phi_p", p=p)
    raise ValueError(f"unknown criterion {text!r}")
