"""Line-oriented JSON design records."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import IO, Iterable, List, Optional

import numpy as np

from .errors import DesignError
from .sequences import BinaryDesign

SCHEMA_VERSION = 1

_PROVENANCE = {"paley": "paley", "mseq": "m_sequence", "insert1": "insertion", "insert2": "insertion"}


@dataclass
class DesignRecord:
    N: int
    alphabet: str  # binary | ternary
    sequence: str
    construction: str = "user"
    params: dict = field(default_factory=dict)
    certificate: Optional[dict] = None
    schema: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.schema != SCHEMA_VERSION:
            raise DesignError(f"unsupported schema version {self.schema}")
        if self.alphabet not in ("binary", "ternary"):
            raise DesignError(f"unknown alphabet {self.alphabet!r}")
        if len(self.sequence) != self.N:
            raise DesignError(f"sequence has {len(self.sequence)} symbols but N={self.N}")
        allowed = "01" if self.alphabet == "binary" else "012"
        bad = set(self.sequence) - set(allowed)
        if bad:
            raise DesignError(f"symbols {sorted(bad)} not in the {self.alphabet} alphabet")

    def to_dict(self) -> dict:
        d = {
            "schema": self.schema,
            "N": self.N,
            "alphabet": self.alphabet,
            "sequence": self.sequence,
            "provenance": {"construction": self.construction, "params": self.params},
        }
        if self.certificate is not None:
            d["certificate"] = self.certificate
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)

    @classmethod
    def from_dict(cls, d: dict) -> "DesignRecord":
        try:
            prov = d.get("provenance", {})
            return cls(
                N=int(d["N"]),
                alphabet=d["alphabet"],
                sequence=str(d["sequence"]),
                construction=prov.get("construction", "user"),
                params=dict(prov.get("params", {})),
                certificate=d.get("certificate"),
                schema=int(d.get("schema", SCHEMA_VERSION)),
            )
        except (KeyError, TypeError, AttributeError) as exc:
            raise DesignError(f"malformed design record: {exc}") from None

    @classmethod
    def from_json(cls, line: str) -> "DesignRecord":
        try:
            return cls.from_dict(json.loads(line))
        except json.JSONDecodeError as exc:
            raise DesignError(f"malformed design record: {exc}") from None

    @classmethod
    def from_binary(cls, d: BinaryDesign, construction: str = "user", **params) -> "DesignRecord":
        params = {**{k: v for k, v in d.meta.items() if isinstance(v, (int, str, float))}, **params}
        return cls(d.N, "binary", str(d), construction, params)

    @classmethod
    def from_ternary(cls, u, construction: str = "user", **params) -> "DesignRecord":
        s = "".join(str(int(x)) for x in np.asarray(u))
        return cls(len(s), "ternary", s, construction, params)

    def values(self) -> np.ndarray:
        return np.array([int(c) for c in self.sequence], dtype=np.int64)

    def to_binary(self) -> BinaryDesign:
        if self.alphabet != "binary":
            raise DesignError("record is not a binary design")
        return BinaryDesign.from_string(self.sequence, _PROVENANCE.get(self.construction, "user"), **self.params)


def read_records(source) -> List[DesignRecord]:
    if isinstance(source, (str, Path)):
        try:
            text = Path(source).read_text(encoding="utf-8")
        except OSError as exc:
            raise DesignError(f"cannot read {source}: {exc}") from None
    else:
        text = source.read()
    records = [DesignRecord.from_json(line) for line in text.splitlines() if line.strip()]
    if not records:
        raise DesignError("no design records found")
    return records


def write_records(records: Iterable[DesignRecord], dest) -> None:
    text = "".join(r.to_json() + "\n" for r in records)
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(text, encoding="utf-8")
    else:
        dest.write(text)


def table1_records() -> List[DesignRecord]:
    """The two designs of the published table: d_H (N=151) and d_{1,g,H} (N=132)."""
    out = []
    for name in ("table1_dH_151.jsonl", "table1_d1gH_132.jsonl"):
        with resources.files("circdesign.data").joinpath(name).open("r", encoding="utf-8") as fh:
            out.extend(read_records(fh))
    return out
