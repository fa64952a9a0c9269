"""Binary design sequences: Paley and LFSR constructions plus zero-run insertion."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, List, Sequence

from .errors import ConstructionError

PROVENANCES = ("paley", "m_sequence", "insertion", "user")


@dataclass(frozen=True)
class BinaryDesign:
    """A stimulus on/off schedule of length N, read circularly.

    ``meta`` carries construction parameters (e.g. the run length ``g`` used by
    an insertion) and is ignored by equality.
    """

    bits: tuple
    provenance: str = "user"
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if not bits:
            raise ValueError("design must have at least one time point")
        if any(b not in (0, 1) for b in bits):
            raise ValueError("binary design entries must be 0 or 1")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        object.__setattr__(self, "bits", bits)

    @property
    def N(self) -> int:
        return len(self.bits)

    def __len__(self) -> int:
        return len(self.bits)

    def __str__(self) -> str:
        return "".join(map(str, self.bits))

    @classmethod
    def from_string(cls, s: str, provenance: str = "user", **meta: Any) -> "BinaryDesign":
        s = "".join(s.split())
        return cls(tuple(int(c) for c in s), provenance, dict(meta))

    def rotate(self, shift: int) -> "BinaryDesign":
        """Circular left rotation by ``shift`` positions."""
        n = shift % self.N
        return BinaryDesign(self.bits[n:] + self.bits[:n], self.provenance, dict(self.meta))

    def canonical(self) -> "BinaryDesign":
        """Lexicographically smallest rotation."""
        return self.rotate(min_rotation(self.bits))


@dataclass(frozen=True)
class ZeroRun:
    start: int  # 1-based, circular
    length: int


def min_rotation(seq: Sequence[int]) -> int:
    """Offset of the lexicographically least rotation (Booth's algorithm)."""
    s = list(seq) * 2
    n = len(seq)
    f = [-1] * len(s)
    k = 0
    for j in range(1, len(s)):
        sj = s[j]
        i = f[j - k - 1]
        while i != -1 and sj != s[k + i + 1]:
            if sj < s[k + i + 1]:
                k = j - i - 1
            i = f[i]
        if sj != s[k + i + 1]:
            if sj < s[k]:
                k = j
            f[j - k] = -1
        else:
            f[j - k] = i + 1
    return k % n if n else 0


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    i = 3
    while i * i <= n:
        if n % i == 0:
            return False
        i += 2
    return True


def paley_hadamard_sequence(N: int) -> BinaryDesign:
    """Hadamard sequence from the Paley difference set of quadratic residues.

    ``d[n] = 0`` (1-based n) iff ``n - 1`` is a nonzero square mod N.
    """
    if not _is_prime(N):
        raise ConstructionError(f"N must be prime ≡ 3 (mod 4); {N} is not prime")
    if N % 4 != 3:
        raise ConstructionError(f"N must be prime ≡ 3 (mod 4); {N} ≡ {N % 4} (mod 4)")
    residues = {x * x % N for x in range(1, (N - 1) // 2 + 1)}
    bits = tuple(0 if n in residues else 1 for n in range(N))
    return BinaryDesign(bits, "paley", {"N": N})


def taps_from_exponents(exponents: Iterable[int]) -> int:
    """Bit mask with bit ``i`` set for each term ``x**i`` of the polynomial."""
    mask = 0
    for e in exponents:
        mask |= 1 << e
    return mask


def m_sequence(degree: int, taps: int, seed: int) -> BinaryDesign:
    """One period of a Fibonacci LFSR over GF(2).

    ``taps`` is the characteristic polynomial as a bit mask (bit i is the
    coefficient of x**i, so x^3 + x + 1 is ``0b1011``). ``seed`` holds the
    initial state, bit i being s_i. The recurrence is
    ``s[n + r] = sum(c_i * s[n + i]) mod 2`` and the output is s_0, s_1, ...

    Primitivity is checked by period: anything shorter than 2**r - 1 raises.
    """
    r = degree
    if r < 2:
        raise ConstructionError("LFSR degree must be at least 2")
    if taps >> r != 1:
        raise ConstructionError(f"taps {taps:#b} do not describe a degree-{r} polynomial")
    if not taps & 1:
        raise ConstructionError("polynomial has no constant term, so it is not primitive")
    mask = (1 << r) - 1
    seed &= mask
    if seed == 0:
        raise ConstructionError("LFSR seed must be nonzero")

    coeffs = taps & mask
    period = (1 << r) - 1
    state = seed
    out = []
    for step in range(1, period + 1):
        out.append(state & 1)
        fb = bin(state & coeffs).count("1") & 1
        state = (state >> 1) | (fb << (r - 1))
        if state == seed and step < period:
            raise ConstructionError(
                f"polynomial {taps:#b} is not primitive: period {step} < {period}"
            )
    if state != seed:
        raise ConstructionError(f"polynomial {taps:#b} is not primitive: state never returns to seed")
    return BinaryDesign(tuple(out), "m_sequence", {"degree": r, "taps": taps, "seed": seed})


# One primitive polynomial per degree, as exponent lists.
PRIMITIVE_POLYNOMIALS = {
    2: (2, 1, 0),
    3: (3, 1, 0),
    4: (4, 1, 0),
    5: (5, 2, 0),
    6: (6, 1, 0),
    7: (7, 1, 0),
    8: (8, 4, 3, 2, 0),
    9: (9, 4, 0),
    10: (10, 3, 0),
    11: (11, 2, 0),
    12: (12, 6, 4, 1, 0),
}


def default_m_sequence(degree: int) -> BinaryDesign:
    return m_sequence(degree, taps_from_exponents(PRIMITIVE_POLYNOMIALS[degree]), 1)


def zero_runs(d: BinaryDesign | Sequence[int]) -> List[ZeroRun]:
    """Maximal circular runs of zeros, longest first then by start index."""
    bits = d.bits if isinstance(d, BinaryDesign) else tuple(d)
    n = len(bits)
    if n == 0:
        raise ValueError("design must be non-empty")
    if 0 not in bits:
        return []
    if 1 not in bits:
        return [ZeroRun(1, n)]
    # start scanning just after some 1 so that no run is split by the wrap
    first_one = bits.index(1)
    runs = []
    i = 0
    while i < n:
        pos = (first_one + 1 + i) % n
        if bits[pos] == 0:
            length = 0
            while bits[(pos + length) % n] == 0:
                length += 1
            runs.append(ZeroRun(pos + 1, length))
            i += length
        else:
            i += 1
    runs.sort(key=lambda run: (-run.length, run.start))
    return runs


def insert_zeros(d: BinaryDesign, count: int) -> BinaryDesign:
    """Insert ``count`` zeros into the longest circular zero run.

    Ties go to the leftmost run; the zeros go in right after the run's first
    zero. The result's meta records the original run length ``g``.
    """
    if count not in (1, 2):
        raise ValueError("count must be 1 or 2")
    runs = zero_runs(d)
    if not runs:
        raise ConstructionError("design has no zero run to extend")
    run = runs[0]
    at = run.start  # 0-based index right after the first zero of the run
    bits = d.bits[:at] + (0,) * count + d.bits[at:]
    meta = {"g": run.length, "count": count, "source_N": d.N, "source": d.provenance, "run_start": run.start}
    return BinaryDesign(bits, "insertion", meta)
