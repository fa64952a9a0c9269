"""Circulant model matrices and information matrices.

Information matrices of integer-valued designs are kept as exact integers
scaled by the number of time points: ``N * M_b = N X'X - s s'`` with ``s`` the
column sums of ``X``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

import numpy as np

from .sequences import BinaryDesign

RANK_RTOL = 1e-8


def _seq(seq) -> np.ndarray:
    if isinstance(seq, BinaryDesign):
        return np.array(seq.bits, dtype=np.int64)
    a = np.asarray(seq)
    if a.ndim != 1 or a.size == 0:
        raise ValueError("design sequence must be a non-empty 1-D array")
    return a


def _check_k(K: int, N: int) -> None:
    if not 1 <= K <= N:
        raise ValueError(f"K must satisfy 1 <= K <= N (got K={K}, N={N})")


def to_signed(d, sign: int = 1) -> np.ndarray:
    """Map a 0/1 design to ``sign * (1 - 2 d)``."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    a = _seq(d).astype(np.int64)
    if np.any((a != 0) & (a != 1)):
        raise ValueError("binary design entries must be 0 or 1")
    return sign * (1 - 2 * a)


def from_signed(dt, sign: int = 1) -> np.ndarray:
    """Inverse of :func:`to_signed`."""
    a = np.asarray(dt, dtype=np.int64)
    return (1 - sign * a) // 2


def signed_from_ternary(u) -> np.ndarray:
    """0 -> 0, 1 -> 1, 2 -> -1."""
    a = _check_ternary(u)
    out = a.copy()
    out[a == 2] = -1
    return out


def ternary_from_signed(dbar) -> np.ndarray:
    a = np.asarray(dbar, dtype=np.int64)
    if np.any(np.abs(a) > 1):
        raise ValueError("signed ternary entries must be in {-1, 0, 1}")
    out = a.copy()
    out[a == -1] = 2
    return out


def lift_to_ternary(d, variant: str = "j+d") -> np.ndarray:
    """Two-stimulus design built from a binary one: ``j + d`` or ``2j - d``."""
    a = _seq(d).astype(np.int64)
    if variant == "j+d":
        return 1 + a
    if variant == "2j-d":
        return 2 - a
    raise ValueError(f"unknown lifting variant {variant!r}")


def _check_ternary(u) -> np.ndarray:
    a = _seq(u).astype(np.int64)
    if np.any((a < 0) | (a > 2)):
        raise ValueError("ternary design entries must be 0, 1 or 2")
    return a


def model_matrix(seq, K: int) -> np.ndarray:
    """``[d, U d, ..., U^(K-1) d]`` with ``U`` the downward circular shift.

    Row n, column k holds ``seq[(n - k) mod N]`` (0-based).
    """
    a = _seq(seq)
    N = a.size
    _check_k(K, N)
    idx = (np.arange(N)[:, None] - np.arange(K)[None, :]) % N
    return a[idx]


@dataclass(frozen=True)
class ScaledInfoMatrix:
    """An information matrix stored as ``scaled / divisor`` with integer ``scaled``."""

    scaled: np.ndarray
    divisor: int
    biased: bool = True

    @property
    def K(self) -> int:
        return self.scaled.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return self.scaled / self.divisor

    def __array__(self, dtype=None, copy=None):
        m = self.matrix
        return m.astype(dtype) if dtype is not None else m

    def fraction(self, i: int, j: int) -> Fraction:
        return Fraction(int(self.scaled[i, j]), self.divisor)

    def trace(self) -> Fraction:
        return Fraction(int(np.trace(self.scaled)), self.divisor)

    def trace_of_square(self) -> Fraction:
        s = self.scaled.astype(object)
        return Fraction(int((s * s).sum()), self.divisor ** 2)

    def equals(self, other: "ScaledInfoMatrix") -> bool:
        """Exact equality of the represented rational matrices."""
        if self.scaled.shape != other.scaled.shape:
            return False
        return bool(np.array_equal(self.scaled * other.divisor, other.scaled * self.divisor))

    def rescale(self, factor: Fraction) -> "ScaledInfoMatrix":
        factor = Fraction(factor)
        return ScaledInfoMatrix(self.scaled * factor.numerator, self.divisor * factor.denominator, self.biased)


def info_matrix(X: np.ndarray, biased: bool = True) -> ScaledInfoMatrix:
    """Exact ``N * M_b`` (biased) or ``N * M`` (raw) for an integer model matrix."""
    X = np.asarray(X)
    if not np.issubdtype(X.dtype, np.integer):
        if not np.all(X == np.round(X)):
            raise ValueError("exact information matrices need an integer model matrix")
        X = np.round(X).astype(np.int64)
    X = X.astype(np.int64)
    N = X.shape[0]
    gram = X.T @ X
    if biased:
        s = X.sum(axis=0)
        scaled = N * gram - np.outer(s, s)
    else:
        scaled = N * gram
    return ScaledInfoMatrix(scaled, N, biased)


def design_info(seq, K: int, biased: bool = True) -> ScaledInfoMatrix:
    return info_matrix(model_matrix(seq, K), biased)


def signed_info(d, K: int, sign: int = 1) -> ScaledInfoMatrix:
    """Exact ``M_b`` of the signed version of a binary design."""
    return design_info(to_signed(d, sign), K)


def autocorrelations(seq, K: int) -> Tuple[np.ndarray, int]:
    """Circular autocorrelations c_0..c_{K-1} and the sum of the sequence.

    ``M`` of the circulant model matrix is the symmetric Toeplitz matrix of c.
    """
    a = _seq(seq).astype(np.int64)
    c = np.array([int(a @ np.roll(a, k)) for k in range(K)], dtype=np.int64)
    return c, int(a.sum())


def ternary_components(u, K: int) -> Tuple[np.ndarray, np.ndarray]:
    """Half-sum and half-difference of the two stimulus model matrices."""
    a = _check_ternary(u)
    _check_k(K, a.size)
    x1 = model_matrix((a == 1).astype(np.int64), K)
    x2 = model_matrix((a == 2).astype(np.int64), K)
    return (x1 + x2) / 2.0, (x1 - x2) / 2.0


def column_space_projector(A: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((A.shape[0], A.shape[0]))
    r = int(np.sum(s > rtol * s[0]))
    Ur = U[:, :r]
    return Ur @ Ur.T


def contrast_info(u, K: int) -> np.ndarray:
    """Information matrix for the difference of two HRFs, ``F'(I - P)F``.

    ``P`` projects onto the span of the intercept and the half-sum matrix.
    """
    E, F = ternary_components(u, K)
    N = E.shape[0]
    A = np.column_stack([np.ones(N), E])
    P = column_space_projector(A)
    R = F - P @ F
    M = F.T @ R
    return (M + M.T) / 2


def contrast_info_batch(U: np.ndarray, K: int, rtol: float = RANK_RTOL) -> np.ndarray:
    """:func:`contrast_info` for a stack of ternary designs, shape (B, N)."""
    U = np.asarray(U, dtype=np.int64)
    B, N = U.shape
    idx = (np.arange(N)[:, None] - np.arange(K)[None, :]) % N
    x1 = (U == 1).astype(float)[:, idx]
    x2 = (U == 2).astype(float)[:, idx]
    E, F = (x1 + x2) / 2.0, (x1 - x2) / 2.0
    A = np.concatenate([np.ones((B, N, 1)), E], axis=2)
    Q, s, _ = np.linalg.svd(A, full_matrices=False)
    keep = s > rtol * s[:, :1]
    Q = Q * keep[:, None, :]
    R = F - Q @ (np.swapaxes(Q, 1, 2) @ F)
    M = np.swapaxes(F, 1, 2) @ R
    return (M + np.swapaxes(M, 1, 2)) / 2


def contrast_info_exact(u, K: int) -> ScaledInfoMatrix:
    """Exact information for the contrast when ``u`` has no zero entry."""
    a = _check_ternary(u)
    if np.any(a == 0):
        raise ValueError("exact contrast information needs a design without rest periods")
    return design_info(signed_from_ternary(a), K).rescale(Fraction(1, 4))


def contrast_upper_bound(u, K: int) -> np.ndarray:
    """``F'(I - J/N)F``, which dominates the contrast information."""
    _, F = ternary_components(u, K)
    Fc = F - F.mean(axis=0)
    return Fc.T @ Fc
