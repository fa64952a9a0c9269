"""Block matrices ``B = ⊕[(N-3)I_r + 4J_r] - J_K`` and the trace of ``(B - J/N)^-1``.

These are the candidate extremal Gram matrices for the A-criterion when
N ≡ 3 (mod 4). The all-singletons partition gives ``(N+1)I - J``, the Gram
matrix of a Hadamard sequence.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, List, Tuple

import numpy as np

from .certify import n0_cubic
from .errors import DomainError


@dataclass(frozen=True, order=True)
class BlockPartition:
    sizes: tuple

    def __post_init__(self):
        sizes = tuple(sorted((int(r) for r in self.sizes), reverse=True))
        if not sizes or any(r < 1 for r in sizes):
            raise ValueError("block sizes must be positive and non-empty")
        object.__setattr__(self, "sizes", sizes)

    @property
    def K(self) -> int:
        return sum(self.sizes)

    @property
    def m(self) -> int:
        return len(self.sizes)

    def has_two_contiguous_sizes(self) -> bool:
        """At most two distinct block sizes, differing by one."""
        distinct = set(self.sizes)
        return len(distinct) == 1 or (len(distinct) == 2 and max(distinct) - min(distinct) == 1)

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.sizes)) + ")"


def _check_n(N: int) -> None:
    if N % 4 != 3 or N < 4:
        raise DomainError(f"block matrices need N ≡ 3 (mod 4) and N >= 7 (got N={N})")


def block_matrix(N: int, partition: BlockPartition) -> np.ndarray:
    _check_n(N)
    K = partition.K
    B = -np.ones((K, K), dtype=np.int64)
    start = 0
    for r in partition.sizes:
        blk = slice(start, start + r)
        B[blk, blk] = (N - 3) * np.eye(r, dtype=np.int64) + 4 - 1
        start += r
    return B


def _trace_first(N: int, sizes) -> Fraction:
    K, m = sum(sizes), len(sizes)
    L = [N - 3 + 4 * r for r in sizes]
    denom = Fraction(N, N + 1) - sum(Fraction(r, l) for r, l in zip(sizes, L))
    if denom <= 0:
        raise DomainError("B - J/N is not positive definite for this partition")
    return (
        sum(Fraction(1, l) for l in L)
        + Fraction(K - m, N - 3)
        + sum(Fraction(r, l * l) for r, l in zip(sizes, L)) / denom
    )


def _trace_second(N: int, sizes) -> Fraction:
    K = sum(sizes)
    t = Fraction(N - 3, 4)
    s1 = sum(r / (t + r) for r in sizes)
    s2 = sum(r / (t + r) ** 2 for r in sizes)
    denom = 4 / (1 + Fraction(1, N)) - s1
    if denom <= 0:
        raise DomainError("B - J/N is not positive definite for this partition")
    return (K - s1 + t * s2 / denom) / (4 * t)


def block_trace_inverse(N: int, partition: BlockPartition, variant: str = "first", exact: bool = False):
    """Closed-form ``tr{(B - J/N)^-1}``; the two variants are algebraically equal."""
    _check_n(N)
    if variant == "first":
        value = _trace_first(N, partition.sizes)
    elif variant == "second":
        value = _trace_second(N, partition.sizes)
    else:
        raise ValueError("variant must be 'first' or 'second'")
    return value if exact else float(value)


def direct_trace_inverse(N: int, partition: BlockPartition) -> float:
    B = block_matrix(N, partition).astype(float)
    K = partition.K
    return float(np.trace(np.linalg.inv(B - np.ones((K, K)) / N)))


def enumerate_partitions(K: int) -> Iterator[BlockPartition]:
    """All integer partitions of K, each in descending order, reverse-lex order."""
    if K < 1:
        raise ValueError("K must be positive")

    def rec(remaining: int, largest: int) -> Iterator[tuple]:
        if remaining == 0:
            yield ()
            return
        for first in range(min(remaining, largest), 0, -1):
            for rest in rec(remaining - first, first):
                yield (first,) + rest

    for sizes in rec(K, K):
        yield BlockPartition(sizes)


@dataclass
class BlockRanking:
    N: int
    K: int
    best: BlockPartition
    value: float
    ranking: List[Tuple[BlockPartition, float]]
    in_bound_domain: bool
    n0: float | None
    bound_applies: bool
    two_contiguous_sizes: bool
    notes: list = field(default_factory=list)


def min_block_trace(N: int, K: int) -> BlockRanking:
    """Exhaustive minimum of the closed-form trace over all partitions of K.

    Ranking is by exact value, ties broken by the canonical partition order.
    """
    _check_n(N)
    scored = []
    for part in enumerate_partitions(K):
        try:
            scored.append((part, block_trace_inverse(N, part, exact=True)))
        except DomainError:
            continue
    scored.sort(key=lambda pv: (pv[1], pv[0].sizes))
    best, value = scored[0]
    in_domain = K >= 4
    n0 = n0_cubic(K) if in_domain else None
    bound_applies = in_domain and N >= n0
    notes = []
    if not in_domain:
        notes.append("K < 4 is outside the stated domain of the cubic bound")
    elif not bound_applies:
        notes.append("N below the cubic bound; ranking reported without an optimality claim")
    if bound_applies and best.sizes != (1,) * K:
        # would contradict the minimality of (N+1)I - J above the bound
        notes.append("minimiser differs from the all-singletons partition above the bound")
    return BlockRanking(
        N, K, best, float(value), [(p, float(v)) for p, v in scored],
        in_domain, n0, bound_applies, best.has_two_contiguous_sizes(), notes,
    )


def split_gap_bound(N: int, K: int, r: int) -> float:
    """Lower bound on the trace gap from splitting one block of size r+1.

    Diagnostic only: it is positive whenever N is at least the cubic bound
    and r > 1.
    """
    _check_n(N)
    q = Fraction(N, N + 1)  # (1 + 1/N)^-1
    L = N - 3 + 4 * r
    xi = L * q - K
    g1 = 4 * (r + 1) + (L + 4) * xi
    value = (
        Fraction(4 * r, L * (N - 3))
        + ((2 * L + 4) * q - K) / g1
        - ((2 * L + 4 - 4 * r) * q - K) / ((N + 1) * xi - 4 * (r - 1))
    )
    return float(value)


def sample_xi_min_trace(N: int, K: int, samples: int, seed: int = 0) -> float:
    """Smallest ``tr{(E - J/N)^-1}`` over random E with diagonal N and off-diagonals in {-1, 3}.

    Off-diagonals ≡ 3 (mod 4) with |e| <= 3 are the only values a Gram matrix
    of ±1 circulant columns can take near the optimum; exhaustive search over
    this set is infeasible beyond tiny K, so it is sampled.
    """
    _check_n(N)
    rng = np.random.default_rng(seed)
    best = math.inf
    iu = np.triu_indices(K, 1)
    J = np.ones((K, K)) / N
    for _ in range(samples):
        E = np.full((K, K), float(N))
        vals = rng.choice([-1.0, 3.0], size=len(iu[0]), p=[0.7, 0.3])
        E[iu] = vals
        E.T[iu] = vals
        Eb = E - J
        try:
            np.linalg.cholesky(Eb)
        except np.linalg.LinAlgError:
            continue
        best = min(best, float(np.trace(np.linalg.inv(Eb))))
    return best
