"""Exhaustive search over small design spaces.

Spaces:

``binary``
    ``{0,1}^N``; orbits are circular shifts. Criteria are evaluated on the
    signed information matrix ``M_b(X_d~) = 4 M_b(X_d)``, which ranks designs
    identically.
``signed``
    ``{-1,1}^N``; orbits are circular shifts and negation.
``ternary_two_stim``
    ``{0,1,2}^N`` with the contrast information matrix; orbits are circular
    shifts and the 1 <-> 2 label swap.

Designs are encoded as base-2/base-3 integers with the first time point most
significant, so integer order is lexicographic order of the sequences.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .criteria import CLAMP_RTOL, CriterionSpec
from .design import contrast_info, contrast_info_batch, design_info
from .errors import CapExceeded
from .sequences import BinaryDesign

DEFAULT_CAP = 2 ** 24
MAX_TERNARY_N = 15
TIE_RTOL = 1e-10
CHUNK = 1 << 14
ORBIT_SAMPLES = 100

SPACES = ("binary", "signed", "ternary_two_stim")


def default_cap() -> int:
    return int(os.environ.get("CIRCDESIGN_CAP", DEFAULT_CAP))


@dataclass
class SearchReport:
    space: str
    N: int
    K: int
    criterion: str
    best_value: float
    argmin: List[tuple]
    evaluated: int
    wall_time: float
    symmetry_reduced: bool
    orbits_checked: int = 0
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "space": self.space,
            "N": self.N,
            "K": self.K,
            "criterion": self.criterion,
            "best_value": "inf" if math.isinf(self.best_value) else self.best_value,
            "argmin": ["".join(str(x) if x >= 0 else "-" for x in a) if self.space != "signed"
                       else " ".join(f"{x:+d}" for x in a) for a in self.argmin],
            "evaluated": self.evaluated,
            "wall_time": self.wall_time,
            "symmetry_reduced": self.symmetry_reduced,
            "orbits_checked": self.orbits_checked,
            "notes": self.notes,
        }


def _base(space: str) -> int:
    if space not in SPACES:
        raise ValueError(f"unknown space {space!r}")
    return 3 if space == "ternary_two_stim" else 2


def space_size(space: str, N: int) -> int:
    return _base(space) ** N


def _decode(codes: np.ndarray, N: int, base: int) -> np.ndarray:
    """Digits of each code, most significant first, shape (len(codes), N)."""
    powers = base ** np.arange(N - 1, -1, -1, dtype=np.int64)
    return (codes[:, None] // powers[None, :]) % base


def _encode(digits: np.ndarray, base: int) -> np.ndarray:
    N = digits.shape[1]
    powers = base ** np.arange(N - 1, -1, -1, dtype=np.int64)
    return digits.astype(np.int64) @ powers


def _symbols(digits: np.ndarray, space: str) -> np.ndarray:
    """Design entries from digits; for the signed space digit 0 is -1."""
    if space == "signed":
        return 2 * digits.astype(np.int64) - 1
    return digits.astype(np.int64)


def _to_digits(design, space: str) -> np.ndarray:
    if isinstance(design, BinaryDesign):
        a = np.array(design.bits, dtype=np.int64)
    else:
        a = np.asarray(design, dtype=np.int64)
    if space == "signed":
        if np.any(np.abs(a) != 1):
            raise ValueError("signed designs have entries ±1")
        return (a + 1) // 2
    hi = _base(space) - 1
    if np.any((a < 0) | (a > hi)):
        raise ValueError(f"entries out of range for the {space} space")
    return a


def _orbit_images(digits: np.ndarray, space: str) -> List[np.ndarray]:
    """Digit arrays of the non-rotation symmetry images (including identity)."""
    images = [digits]
    if space == "signed":
        images.append(1 - digits)
    elif space == "ternary_two_stim":
        swapped = digits.copy()
        swapped[digits == 1] = 2
        swapped[digits == 2] = 1
        images.append(swapped)
    return images


def canonical_codes(digits: np.ndarray, space: str) -> np.ndarray:
    """Smallest code over each design's orbit."""
    base = _base(space)
    best = None
    for img in _orbit_images(digits, space):
        for k in range(digits.shape[1]):
            code = _encode(np.roll(img, -k, axis=1), base)
            best = code if best is None else np.minimum(best, code)
    return best


def _spectra(symbols: np.ndarray, space: str, K: int) -> np.ndarray:
    """Descending clamped spectra of the information matrices, shape (B, K)."""
    B, N = symbols.shape
    if space == "ternary_two_stim":
        mats = contrast_info_batch(symbols, K)
    else:
        x = symbols if space == "signed" else 1 - 2 * symbols
        c = np.stack([np.sum(x * np.roll(x, k, axis=1), axis=1) for k in range(K)], axis=1)
        s = x.sum(axis=1)
        lag = np.abs(np.arange(K)[:, None] - np.arange(K)[None, :])
        scaled = N * c[:, lag] - (s * s)[:, None, None]
        mats = scaled / N
    lam = np.linalg.eigvalsh(mats)[:, ::-1]
    tol = CLAMP_RTOL * np.maximum(lam[:, :1], 0.0)
    return np.where(np.abs(lam) <= tol, 0.0, lam)


def _values(lam: np.ndarray, criterion: CriterionSpec) -> np.ndarray:
    singular = lam[:, -1] <= 0
    safe = np.where(lam > 0, lam, 1.0)
    K = lam.shape[1]
    if criterion.kind == "phi_p":
        p = criterion.p
        if p == 0:
            v = np.exp(-np.mean(np.log(safe), axis=1))
        elif math.isinf(p):
            v = 1.0 / safe[:, -1]
        elif p == 1:
            v = np.sum(1.0 / safe, axis=1) / K
        else:
            v = np.mean(safe ** (-p), axis=1) ** (1.0 / p)
    elif criterion.kind == "type1":
        try:
            fv = np.asarray(criterion.f(safe), dtype=float)
            if fv.shape != safe.shape:
                raise TypeError
        except TypeError:
            fv = np.vectorize(criterion.f, otypes=[float])(safe)
        v = fv.sum(axis=1)
    else:
        raise ValueError("exhaustive search needs a scalar criterion")
    return np.where(singular, np.inf, v)


def design_value(design, space: str, K: int, criterion: CriterionSpec) -> float:
    """Criterion value of one design on the same scale as the search."""
    digits = _to_digits(design, space)[None, :]
    lam = _spectra(_symbols(digits, space), space, K)
    return float(_values(lam, criterion)[0])


def _check_budget(space: str, N: int, cap: int) -> int:
    total = space_size(space, N)
    if space == "ternary_two_stim" and N > MAX_TERNARY_N:
        raise CapExceeded(total, min(cap, 3 ** MAX_TERNARY_N))
    if total > cap:
        raise CapExceeded(total, cap)
    return total


def _within(v: np.ndarray, best: float) -> np.ndarray:
    if math.isinf(best):
        return np.isinf(v)
    return v <= best + TIE_RTOL * abs(best)


def _scan(lo: int, hi: int, space: str, N: int, K: int, criterion: CriterionSpec, reduce: bool):
    base = _base(space)
    codes = np.arange(lo, hi, dtype=np.int64)
    digits = _decode(codes, N, base)
    canon = canonical_codes(digits, space)
    if reduce:
        keep = canon == codes
        codes, digits, canon = codes[keep], digits[keep], canon[keep]
    if codes.size == 0:
        return math.inf, np.zeros(0, dtype=np.int64), 0, False
    v = _values(_spectra(_symbols(digits, space), space, K), criterion)
    best = float(v.min())
    mask = _within(v, best)
    return best, canon[mask], int(codes.size), True


def exhaustive_best(
    space: str,
    N: int,
    K: int,
    criterion: CriterionSpec,
    symmetry_reduce: bool = True,
    cap: Optional[int] = None,
    threads: int = 1,
) -> SearchReport:
    """Global minimum of ``criterion`` over the whole space by enumeration."""
    cap = default_cap() if cap is None else cap
    if not 1 <= K <= N:
        raise ValueError(f"K must satisfy 1 <= K <= N (got K={K}, N={N})")
    total = _check_budget(space, N, cap)
    t0 = time.perf_counter()
    chunk = CHUNK if space != "ternary_two_stim" else 2048
    ranges = [(lo, min(lo + chunk, total)) for lo in range(0, total, chunk)]

    def work(r):
        return _scan(r[0], r[1], space, N, K, criterion, symmetry_reduce)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, ranges))
    else:
        parts = [work(r) for r in ranges]

    best = min((p[0] for p in parts if p[3]), default=math.inf)
    evaluated = sum(p[2] for p in parts)
    winners = set()
    for pbest, pcanon, _, nonempty in parts:
        if not nonempty:
            continue
        if math.isinf(best) or pbest <= best + TIE_RTOL * abs(best):
            winners.update(int(c) for c in pcanon)
    # a chunk's candidate list is relative to its own best; re-filter globally
    base = _base(space)
    if winners:
        wc = np.array(sorted(winners), dtype=np.int64)
        wd = _decode(wc, N, base)
        wv = _values(_spectra(_symbols(wd, space), space, K), criterion)
        wc = wc[_within(wv, best)]
        argmin = [tuple(int(x) for x in row) for row in _symbols(_decode(wc, N, base), space)]
    else:
        argmin = []

    report = SearchReport(
        space, N, K, criterion.label, best, argmin, evaluated,
        time.perf_counter() - t0, symmetry_reduce,
    )
    if symmetry_reduce:
        report.orbits_checked = _spot_check_orbits(space, N, K, total)
    report.wall_time = time.perf_counter() - t0
    return report


def _orbit_members(digits: np.ndarray, space: str) -> np.ndarray:
    rows = []
    for img in _orbit_images(digits[None, :], space):
        for k in range(digits.size):
            rows.append(np.roll(img[0], k))
    return np.array(rows)


def _spot_check_orbits(space: str, N: int, K: int, total: int, samples: int = ORBIT_SAMPLES) -> int:
    """Confirm the information matrix is constant on randomly chosen orbits."""
    rng = np.random.default_rng(N * 1009 + K)
    base = _base(space)
    codes = rng.integers(0, total, size=min(samples, total))
    for code in codes:
        members = _symbols(_orbit_members(_decode(np.array([code]), N, base)[0], space), space)
        if space == "ternary_two_stim":
            mats = [contrast_info(u, K) for u in members]
            ref = mats[0]
            scale = max(np.abs(ref).max(), 1.0)
            ok = all(np.allclose(m, ref, rtol=0, atol=1e-9 * scale) for m in mats)
        else:
            seqs = members if space == "signed" else 1 - 2 * members
            ref = design_info(seqs[0], K)
            ok = all(design_info(s, K).equals(ref) for s in seqs[1:])
        if not ok:
            raise AssertionError(f"criterion not orbit-invariant for design code {int(code)}")
    return len(codes)


def verify_optimal(
    design,
    space: str,
    K: int,
    criterion: CriterionSpec,
    cap: Optional[int] = None,
    threads: int = 1,
) -> Tuple[bool, float]:
    """Whether ``design`` attains the global minimum; margin is value minus best."""
    digits = _to_digits(design, space)
    N = digits.size
    report = exhaustive_best(space, N, K, criterion, True, cap, threads)
    value = design_value(design, space, K, criterion)
    best = report.best_value
    if math.isinf(value):
        return math.isinf(best), (0.0 if math.isinf(best) else math.inf)
    margin = value - best
    return margin <= TIE_RTOL * abs(best), margin


def canonical_design(design, space: str) -> tuple:
    digits = _to_digits(design, space)[None, :]
    code = canonical_codes(digits, space)
    return tuple(int(x) for x in _symbols(_decode(code, digits.shape[1], _base(space)), space)[0])
