"""Bundled design corpus.

Each .v file carries a ``// category:`` header (arithmetic, control,
memory, or misc); files under unsupported/ exercise refusal paths.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

__all__ = ["CorpusDesign", "load_corpus", "load_design", "load_unsupported"]

_CATEGORY_RE = re.compile(r"//\s*category:\s*(\w+)")


@dataclass(frozen=True)
class CorpusDesign:
    name: str
    category: str
    source: str


def _iter_sources():
    root = resources.files("verikit.corpus")
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".v"):
            yield entry.name[:-2], entry.read_text(encoding="utf-8")


def load_corpus() -> list[CorpusDesign]:
    designs = []
    for name, text in _iter_sources():
        if name.startswith("unsupported_"):
            continue
        m = _CATEGORY_RE.search(text)
        designs.append(CorpusDesign(name=name, category=m.group(1) if m else "misc",
                                    source=text))
    return designs


def load_unsupported() -> list[CorpusDesign]:
    out = []
    for name, text in _iter_sources():
        if name.startswith("unsupported_"):
            out.append(CorpusDesign(name=name, category="unsupported", source=text))
    return out


def load_design(name: str) -> CorpusDesign:
    for d in load_corpus() + load_unsupported():
        if d.name == name:
            return d
    raise KeyError(f"no corpus design named {name!r}")
