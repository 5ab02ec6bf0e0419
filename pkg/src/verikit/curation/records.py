"""Dataset records and JSONL serialization.

One record per line; the top-level ``schema`` field versions the layout.
Optional fields serialize as explicit nulls so consumers can rely on key
presence. Flags only ever move from null to a boolean within a pipeline
run, and every dropped record carries the filter that dropped it plus the
evidence (score, attempt index, or verdict).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

SCHEMA_VERSION = 1

__all__ = ["DatasetRecord", "SCHEMA_VERSION", "read_jsonl", "write_jsonl"]


@dataclass
class DatasetRecord:
    id: str
    y_star: str
    x: str | None = None
    c_prime: str | None = None
    y_prime: str | None = None
    attempts: list[str] = field(default_factory=list)
    attempt_results: list[dict] = field(default_factory=list)
    flags: dict = field(default_factory=lambda: {
        "synthesizable": None,
        "roundtrip_equivalent": None,
        "difficulty_kept": None,
        "decontaminated": None,
    })
    drop_reason: dict | None = None
    provenance: str = ""

    @property
    def dropped(self) -> bool:
        return self.drop_reason is not None

    def set_flag(self, name: str, value: bool):
        if name not in self.flags:
            raise KeyError(f"unknown flag {name!r}")
        prev = self.flags[name]
        if prev is not None and prev != value:
            raise ValueError(f"flag {name!r} already set to {prev}")
        self.flags[name] = value

    def drop(self, filter_name: str, **evidence):
        if self.drop_reason is None:
            self.drop_reason = {"filter": filter_name, "evidence": evidence}

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "id": self.id,
            "x": self.x,
            "y_star": self.y_star,
            "c_prime": self.c_prime,
            "y_prime": self.y_prime,
            "attempts": list(self.attempts),
            "attempt_results": list(self.attempt_results),
            "flags": dict(self.flags),
            "drop_reason": self.drop_reason,
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetRecord":
        schema = d.get("schema", SCHEMA_VERSION)
        if schema != SCHEMA_VERSION:
            raise ValueError(f"unsupported record schema {schema}")
        rec = cls(
            id=str(d["id"]),
            y_star=d["y_star"],
            x=d.get("x"),
            c_prime=d.get("c_prime"),
            y_prime=d.get("y_prime"),
            attempts=list(d.get("attempts") or []),
            attempt_results=list(d.get("attempt_results") or []),
            provenance=d.get("provenance") or "",
        )
        flags = d.get("flags") or {}
        for k in rec.flags:
            if k in flags:
                rec.flags[k] = flags[k]
        rec.drop_reason = d.get("drop_reason")
        return rec


def read_jsonl(path: str | Path) -> Iterator[DatasetRecord]:
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                yield DatasetRecord.from_dict(json.loads(line))
            except (json.JSONDecodeError, KeyError) as e:
                raise ValueError(f"{path}:{line_no}: bad record: {e}") from e


def write_jsonl(path: str | Path, records: Iterable[DatasetRecord]):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_dict(), ensure_ascii=False) + "\n")
