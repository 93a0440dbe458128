"""Loading of the word lists shipped in ``stylopair/data``."""

from __future__ import annotations

import functools
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional


def _read_lines(text: str) -> List[str]:
    out = []
    for raw in text.splitlines():
        line = raw.strip()
        if line and not line.startswith("#"):
            out.append(line)
    return out


def read_word_list(path) -> List[str]:
    return [w.lower() for w in _read_lines(Path(path).read_text(encoding="utf-8"))]


@functools.lru_cache(maxsize=None)
def packaged_text(name: str) -> str:
    return (resources.files("stylopair") / "data" / name).read_text(encoding="utf-8")


def packaged_words(name: str) -> List[str]:
    return [w.lower() for w in _read_lines(packaged_text(name))]


def read_tsv_map(text: str) -> Dict[str, str]:
    mapping = {}
    for line in _read_lines(text):
        word, _, tag = line.partition("\t")
        mapping.setdefault(word.strip().lower(), tag.strip())
    return mapping


def words_or_default(path: Optional[str], name: str) -> List[str]:
    return read_word_list(path) if path else packaged_words(name)
