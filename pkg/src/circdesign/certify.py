"""Optimality certificates from the structure of the information matrix.

A design is certified by matching its signed information matrix, exactly,
against the extremal form for its residue of N mod 4:

* N = 4t - 1: ``(N+1)[I - J/N]``, Phi_p-optimal for p in [0, 1] once K >= 4
  and N is at least the largest root of the bounding cubic;
* N = 4t: ``N I``, universally optimal;
* N = 4t + 1: ``(N-1)[I + J/N]``, optimal for every type-1 criterion.

N = 4t + 2 has no known target.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .design import ScaledInfoMatrix, design_info, signed_from_ternary, signed_info, _check_ternary
from .errors import DomainError
from .sequences import BinaryDesign

N0_TOL = 1e-9

FORM_BY_RESIDUE = {3: "hadamard_4t_minus_1", 0: "circulant_oa_4t", 1: "near_oa_4t_plus_1"}


def cubic(x: float, K: int) -> float:
    """``2x^3 + (10 - 7K)x^2 + 2(2K - 5)(K - 1)x + 4K^2 - 7K``."""
    return 2 * x ** 3 + (10 - 7 * K) * x ** 2 + 2 * (2 * K - 5) * (K - 1) * x + 4 * K ** 2 - 7 * K


def _bisect(f, lo: float, hi: float, tol: float) -> float:
    """Bisect a sign change; continues past ``tol`` down to float resolution."""
    flo = f(lo)
    while True:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    assert hi - lo <= tol
    return lo if abs(flo) <= abs(f(hi)) else hi


def n0_cubic(K: int, tol: float = N0_TOL) -> float:
    """Largest real root of the cubic bound for A-optimality of Hadamard designs.

    The cubic has positive leading coefficient, so beyond its larger critical
    point it is increasing; if the cubic is negative there, the largest root
    is the unique sign change to the right, otherwise it lies left of the
    smaller critical point.
    """
    if K < 4:
        raise DomainError(f"the cubic bound is stated for K >= 4 (got K={K})")

    def f(x):
        return cubic(x, K)

    # c'(x) = 6x^2 + 2(10 - 7K)x + 2(2K - 5)(K - 1)
    a, b, c = 6.0, 2.0 * (10 - 7 * K), 2.0 * (2 * K - 5) * (K - 1)
    disc = b * b - 4 * a * c
    coeffs = [abs((10 - 7 * K) / 2), abs((2 * K - 5) * (K - 1)), abs((4 * K * K - 7 * K) / 2)]
    bound = 1.0 + max(coeffs)  # Cauchy bound on |roots|
    if disc >= 0:
        lo_crit = (-b - math.sqrt(disc)) / (2 * a)
        hi_crit = (-b + math.sqrt(disc)) / (2 * a)
        if f(hi_crit) <= 0:
            return _bisect(f, hi_crit, bound, tol)
        # local minimum above zero: the only root is left of the local maximum
        return _bisect(f, -bound, lo_crit, tol)
    return _bisect(f, -bound, bound, tol)


def target_info_matrix(N: int, K: int) -> Optional[ScaledInfoMatrix]:
    """The extremal signed ``M_b`` for this N mod 4, as ``N * M_b``; None for N = 4t + 2."""
    if not 1 <= K <= N:
        raise ValueError(f"K must satisfy 1 <= K <= N (got K={K}, N={N})")
    I = np.eye(K, dtype=np.int64)
    J = np.ones((K, K), dtype=np.int64)
    r = N % 4
    if r == 3:
        scaled = (N + 1) * (N * I - J)
    elif r == 0:
        scaled = N * N * I
    elif r == 1:
        scaled = (N - 1) * (N * I + J)
    else:
        return None
    return ScaledInfoMatrix(scaled, N)


@dataclass
class BoundCheck:
    applicable: bool
    n0: Optional[float] = None
    satisfied: Optional[bool] = None
    margin: Optional[float] = None
    note: str = ""


@dataclass
class Certificate:
    N: int
    K: int
    residue: int
    objective: str  # estimate_hrf | contrast
    form: str  # hadamard_4t_minus_1 | circulant_oa_4t | near_oa_4t_plus_1 | none
    family: str  # phi_p_range | universal | type1_all | none
    p_range: Optional[tuple] = None
    bound: Optional[BoundCheck] = None
    insertion: Optional[dict] = None
    structure: dict = field(default_factory=dict)
    label: str = "none"
    notes: list = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return self.family != "none"

    def summary(self) -> str:
        if self.family == "phi_p_range":
            lo, hi = self.p_range
            text = f"Φ_p-optimal, p∈[{lo:g},{hi:g}]; N₀={self.bound.n0:.2f}"
        elif self.family == "universal":
            text = "universally optimal"
        elif self.family == "type1_all":
            text = "optimal for all type-1 criteria"
        elif self.form != "none":
            text = "target form matched; no optimality claim"
        else:
            text = "no certificate"
        if self.objective == "contrast" and self.family != "none":
            text += " (contrast)"
        return text

    def to_dict(self) -> dict:
        d = asdict(self)
        d["certified"] = self.certified
        d["summary"] = self.summary()
        if d["p_range"] is not None:
            d["p_range"] = list(d["p_range"])
        return d


def _classify(cert: Certificate, S: ScaledInfoMatrix, p_cap: float) -> Certificate:
    N, K = cert.N, cert.K
    target = target_info_matrix(N, K)
    if target is None:
        cert.notes.append("no target form is known for N ≡ 2 (mod 4)")
        return cert
    if not S.equals(target):
        return cert
    cert.form = FORM_BY_RESIDUE[N % 4]
    if N % 4 == 3:
        if K < 4:
            cert.bound = BoundCheck(False, note="explicit bound unavailable (K<4)")
            cert.notes.append("form matched; explicit bound unavailable (K<4); optimality for large N is asymptotic (no explicit bound)")
            return cert
        n0 = n0_cubic(K)
        ok = N >= n0
        cert.bound = BoundCheck(True, n0, ok, N - n0)
        if not ok:
            cert.notes.append("form matched but N is below the explicit bound; optimality is asymptotic (no explicit bound)")
            return cert
        cert.family = "phi_p_range"
        cert.p_range = (0.0, min(float(p_cap), 1.0))
        cert.label = "hadamard_cubic_bound"
        if p_cap > 1:
            cert.notes.append(f"p in (1, {p_cap:g}]: asymptotic (no explicit bound)")
    elif N % 4 == 0:
        cert.family = "universal"
        cert.label = "completely_symmetric_max_trace"
    else:
        cert.family = "type1_all"
        cert.label = "near_oa_type1"
    return cert


def _insertion_meta(d: BinaryDesign, K: int) -> Optional[dict]:
    if d.provenance != "insertion" or "g" not in d.meta:
        return None
    g = int(d.meta["g"])
    return {"g": g, "count": d.meta.get("count"), "K_le_g_plus_1": K <= g + 1}


def certify_estimation(d: BinaryDesign, K: int, p_cap: float = 1.0) -> Certificate:
    """Certificate for estimating a single HRF with design ``d``."""
    N = d.N
    if not 1 <= K <= N:
        raise ValueError(f"K must satisfy 1 <= K <= N (got K={K}, N={N})")
    if p_cap <= 0:
        raise ValueError("p_cap must be positive")
    S = signed_info(d, K)
    cert = Certificate(N, K, N % 4, "estimate_hrf", "none", "none")
    cert.insertion = _insertion_meta(d, K)
    cert.structure = {"scaled_Mb": S.scaled.tolist(), "divisor": S.divisor}
    return _classify(cert, S, p_cap)


def certify_contrast(u, K: int, p_cap: float = 1.0) -> Certificate:
    """Certificate for the contrast of two HRFs under ternary design ``u``."""
    a = _check_ternary(u)
    N = a.size
    if not 1 <= K <= N:
        raise ValueError(f"K must satisfy 1 <= K <= N (got K={K}, N={N})")
    if p_cap <= 0:
        raise ValueError("p_cap must be positive")
    dbar = signed_from_ternary(a)
    S = design_info(dbar, K)
    zeros = int(np.sum(dbar == 0))
    total = int(dbar.sum())
    cert = Certificate(N, K, N % 4, "contrast", "none", "none")
    cert.structure = {"zeros": zeros, "signed_sum": total, "no_zero_shortcut": zeros == 0}
    cert = _classify(cert, S, p_cap)
    if cert.form == "none":
        return cert
    # Matching implies no rest periods, so the contrast information is exactly S/4.
    raw = design_info(dbar, K, biased=False)
    I = np.eye(K, dtype=np.int64)
    J = np.ones((K, K), dtype=np.int64)
    if N % 4 == 3:
        expect = ScaledInfoMatrix(N * ((N + 1) * I - J), N, False)
        checks = {"abs_sum_is_1": abs(total) == 1, "no_zeros": zeros == 0, "raw_M_matches": raw.equals(expect)}
    elif N % 4 == 1:
        expect = ScaledInfoMatrix(N * ((N - 1) * I + J), N, False)
        checks = {"abs_sum_is_1": abs(total) == 1, "no_zeros": zeros == 0, "raw_M_matches": raw.equals(expect)}
    else:
        checks = {"no_zeros": zeros == 0, "sum_is_0": total == 0}
    cert.structure["checks"] = checks
    if not all(checks.values()):
        # cannot happen for a genuine match; refuse to certify if it does
        cert.notes.append(f"structural consequences failed: {checks}")
        cert.family, cert.p_range, cert.label = "none", None, "none"
    elif cert.family != "none":
        cert.label = "contrast_" + cert.label
    return cert
