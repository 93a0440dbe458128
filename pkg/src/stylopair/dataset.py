"""Labeled pair datasets: construction, cleaning and CSV persistence."""

from __future__ import annotations

import csv
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (InsufficientCorpus, ParseError, SchemaError, TooFewRows)
from .pairwise import SimilarityRecord, StyleProfile, compare_profiles, make_profile
from .romanized import RsLexicon
from .text import CleanPolicy, LanguageMode, RawDocument, chunk, clean, tokenize

log = logging.getLogger(__name__)

LABEL_COLUMN = "label"
DEFAULT_VARIANCE_THRESHOLD = 0.05
U64 = (1 << 64) - 1


@dataclass(frozen=True)
class LabeledProfile:
    doc_id: str
    author_id: str
    profile: StyleProfile


@dataclass
class PairDataset:
    feature_names: Tuple[str, ...]
    rows: List[SimilarityRecord] = field(default_factory=list)
    provenance: List[Tuple[str, str]] = field(default_factory=list)

    def __post_init__(self):
        self.feature_names = tuple(self.feature_names)
        for r in self.rows:
            if r.feature_names != self.feature_names:
                raise SchemaError("all rows must share the dataset's feature names")
            if r.label not in (0, 1):
                raise SchemaError("dataset rows need a 0/1 label")
        if self.provenance and len(self.provenance) != len(self.rows):
            raise SchemaError("provenance must have one entry per row")

    def __len__(self):
        return len(self.rows)

    def matrix(self) -> np.ndarray:
        return np.array([r.values for r in self.rows], dtype=float).reshape(len(self.rows), len(self.feature_names))

    def labels(self) -> np.ndarray:
        return np.array([r.label for r in self.rows], dtype=float)

    def subset(self, indices: Sequence[int]) -> "PairDataset":
        prov = [self.provenance[i] for i in indices] if self.provenance else []
        return PairDataset(self.feature_names, [self.rows[i] for i in indices], prov)


@dataclass(frozen=True)
class VarianceReport:
    variances: Dict[str, float]
    dropped: Tuple[str, ...]
    threshold: float

    def format(self) -> str:
        lines = [f"threshold={self.threshold!r}"]
        for name, var in self.variances.items():
            mark = "dropped" if name in self.dropped else "kept"
            lines.append(f"{name}\t{var!r}\t{mark}")
        return "\n".join(lines) + "\n"


# --- corpus ---------------------------------------------------------------

def read_corpus(root, mode=LanguageMode.ENGLISH) -> List[RawDocument]:
    """Read ``root/<author_id>/<doc>.txt`` files in sorted order."""
    mode = LanguageMode.parse(mode)
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"corpus directory not found: {root}")
    docs = []
    for author_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for path in sorted(author_dir.glob("*.txt")):
            docs.append(RawDocument(path.read_text(encoding="utf-8"), author_dir.name, mode,
                                    f"{author_dir.name}/{path.stem}"))
    return docs


def profile_documents(docs: Sequence[RawDocument], policy: CleanPolicy = CleanPolicy(),
                      chunk_words: Optional[int] = None,
                      graph_order: int = 2) -> List[LabeledProfile]:
    """Clean and profile documents.

    With ``chunk_words`` set, each document is first split into chunks and
    every chunk becomes its own unit (ids ``<doc>#<k>``), as done for chat
    exports.
    """
    out = []
    for doc in docs:
        text = clean(doc.text, policy)
        if chunk_words is None:
            units = [(doc.doc_id, text)]
        else:
            tokens = tokenize(text)
            if not tokens:
                continue
            units = [(f"{doc.doc_id}#{k}", " ".join(t.text for t in c.tokens))
                     for k, c in enumerate(chunk(tokens, chunk_words))]
        for unit_id, unit_text in units:
            out.append(LabeledProfile(unit_id, doc.author_id,
                                      make_profile(unit_text, doc.language_mode, graph_order=graph_order)))
    return out


# --- pairs ---------------------------------------------------------------

def build_pairs(corpus: Sequence[LabeledProfile], n_same: int, n_diff: int, seed: int,
                lexicon: Optional[RsLexicon] = None, n_jobs: int = 1) -> PairDataset:
    """Sample labeled document pairs without replacement.

    Same-author pairs get label 1, different-author pairs label 0. Sampling is
    uniform over the unordered pairs of distinct documents and depends only
    on ``seed``; ``n_jobs`` only parallelizes the comparisons.
    """
    authors = {d.author_id for d in corpus}
    if len(authors) < 2:
        raise InsufficientCorpus("need documents from at least two authors")
    same, diff = [], []
    for i in range(len(corpus)):
        for j in range(i + 1, len(corpus)):
            (same if corpus[i].author_id == corpus[j].author_id else diff).append((i, j))
    if n_same > len(same) or n_diff > len(diff):
        raise InsufficientCorpus(
            f"requested {n_same} same/{n_diff} different pairs, "
            f"only {len(same)}/{len(diff)} available")
    rng = np.random.default_rng(seed & U64)
    picked = [(same[k], 1) for k in rng.choice(len(same), size=n_same, replace=False)]
    picked += [(diff[k], 0) for k in rng.choice(len(diff), size=n_diff, replace=False)]

    def compare(item):
        (i, j), label = item
        return compare_profiles(corpus[i].profile, corpus[j].profile, lexicon, label)

    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            rows = list(pool.map(compare, picked))
    else:
        rows = [compare(item) for item in picked]
    if not rows:
        raise InsufficientCorpus("no pairs requested")
    provenance = [(corpus[i].doc_id, corpus[j].doc_id) for (i, j), _ in picked]
    return PairDataset(rows[0].feature_names, rows, provenance)


def dedupe(ds: PairDataset) -> PairDataset:
    """Drop rows whose (values, label) already occurred; keep first occurrences."""
    seen = set()
    labels_by_values: Dict[Tuple[float, ...], int] = {}
    keep = []
    for i, row in enumerate(ds.rows):
        key = (row.values, row.label)
        if key in seen:
            continue
        other = labels_by_values.setdefault(row.values, row.label)
        if other != row.label:
            log.warning("row %d repeats the values of an earlier row with a different label", i)
        seen.add(key)
        keep.append(i)
    return ds.subset(keep)


def column_variances(ds: PairDataset) -> Dict[str, float]:
    m = ds.matrix()
    return {name: float(np.var(m[:, k])) for k, name in enumerate(ds.feature_names)}


def variance_filter(ds: PairDataset, threshold: float = DEFAULT_VARIANCE_THRESHOLD):
    """Remove columns whose population variance is below ``threshold``."""
    if len(ds) < 2:
        raise TooFewRows("variance filtering needs at least two rows")
    variances = column_variances(ds)
    dropped = tuple(n for n in ds.feature_names if variances[n] < threshold)
    kept = [n for n in ds.feature_names if n not in dropped]
    rows = [r.project(kept) for r in ds.rows]
    filtered = PairDataset(tuple(kept), rows, list(ds.provenance))
    return filtered, VarianceReport(variances, dropped, threshold)


# --- CSV ---------------------------------------------------------------

def provenance_path(path) -> Path:
    path = Path(path)
    stem = path.name[:-4] if path.name.endswith(".csv") else path.name
    return path.with_name(stem + ".prov.tsv")


def write_csv(ds: PairDataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([*ds.feature_names, LABEL_COLUMN])
        for row in ds.rows:
            writer.writerow([repr(v) for v in row.values] + [str(row.label)])
    if ds.provenance:
        with open(provenance_path(path), "w", encoding="utf-8", newline="\n") as fh:
            for i, (a, b) in enumerate(ds.provenance):
                fh.write(f"{i}\t{a}\t{b}\n")


def read_csv(path) -> PairDataset:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        if len(header) < 2 or header[-1] != LABEL_COLUMN:
            raise SchemaError(f"{path}: header must list feature names followed by '{LABEL_COLUMN}'")
        names = tuple(h.strip() for h in header[:-1])
        if any(not n for n in names) or len(set(names)) != len(names):
            raise SchemaError(f"{path}: feature names must be non-empty and unique")
        rows = []
        for line_no, cells in enumerate(reader, start=2):
            if not cells:
                continue
            if len(cells) != len(header):
                raise ParseError(f"expected {len(header)} cells, found {len(cells)}", line_no)
            try:
                values = tuple(float(c) for c in cells[:-1])
            except ValueError:
                raise ParseError(f"non-numeric cell in {path}", line_no) from None
            if not all(math.isfinite(v) for v in values):
                raise ParseError("non-finite value", line_no)
            if cells[-1].strip() not in ("0", "1"):
                raise ParseError(f"label must be 0 or 1, got {cells[-1]!r}", line_no)
            rows.append(SimilarityRecord(names, values, int(cells[-1])))
    provenance = []
    prov = provenance_path(path)
    if os.path.exists(prov):
        for line_no, line in enumerate(prov.read_text(encoding="utf-8").splitlines(), start=1):
            parts = line.split("\t")
            if len(parts) != 3:
                raise ParseError(f"malformed provenance entry in {prov}", line_no)
            provenance.append((parts[1], parts[2]))
        if len(provenance) != len(rows):
            provenance = []
            log.warning("ignoring %s: row count does not match %s", prov, path)
    return PairDataset(names, rows, provenance)
