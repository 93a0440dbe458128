"""Turn two style profiles into a fixed-order similarity record."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .english import POS_ORDER, PUNCT_SET, EnglishProfile, TransitionGraph, english_profile
from .errors import (EmptyGraph, LengthMismatch, MissingLexicon, ModeMismatch,
                     SchemaMismatch)
from .romanized import RsLexicon, rs_pair_features
from .text import Chunk, LanguageMode, tokenize

ENGLISH_FEATURES: Tuple[str, ...] = (
    "pos_dist",
    "punct_dist",
    "sent_dist",
    "func_dist",
    "richness_dist",
    "voice_dist",
    "graph_cosine",
    "graph_jaccard",
)

# ratio_a/ratio_b are folded into their min and max so the record does not
# depend on argument order.
RS_FEATURES: Tuple[str, ...] = (
    "ratio_min",
    "ratio_max",
    "ratio_abs_diff",
    "aligned_count",
    "total_edit_distance",
    "mean_normalized_distance",
    "unaligned_fraction",
)

INJECTED_PREFIX = "injected."


@dataclass(frozen=True)
class StyleProfile:
    mode: LanguageMode
    english: Optional[EnglishProfile] = None
    chunk: Optional[Chunk] = None
    injected: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.mode is LanguageMode.ENGLISH:
            ok = self.english is not None and self.chunk is None
        else:
            ok = self.chunk is not None and self.english is None
        if not ok:
            raise ValueError(f"{self.mode.value} profile must carry exactly the matching payload")


def make_profile(text: str, mode, injected: Optional[Mapping[str, float]] = None,
                 graph_order: int = 2) -> StyleProfile:
    """Profile an already cleaned text. In RS mode the whole text is one chunk."""
    mode = LanguageMode.parse(mode)
    injected = dict(injected or {})
    if mode is LanguageMode.ENGLISH:
        return StyleProfile(mode, english=english_profile(text, graph_order), injected=injected)
    return StyleProfile(mode, chunk=Chunk(tuple(tokenize(text))), injected=injected)


@dataclass(frozen=True)
class SimilarityRecord:
    feature_names: Tuple[str, ...]
    values: Tuple[float, ...]
    label: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.values) != len(self.feature_names):
            raise LengthMismatch(
                f"{len(self.values)} values for {len(self.feature_names)} feature names")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("similarity values must be finite")
        if self.label not in (None, 0, 1):
            raise ValueError(f"label must be 0, 1 or absent, got {self.label!r}")

    def as_dict(self) -> Dict[str, float]:
        return dict(zip(self.feature_names, self.values))

    def with_label(self, label: Optional[int]) -> "SimilarityRecord":
        return SimilarityRecord(self.feature_names, self.values, label)

    def project(self, names: Sequence[str]) -> "SimilarityRecord":
        """Keep only ``names``, in that order (e.g. after variance filtering)."""
        lookup = self.as_dict()
        missing = [n for n in names if n not in lookup]
        if missing:
            raise SchemaMismatch(f"record lacks features: {', '.join(missing)}")
        return SimilarityRecord(tuple(names), tuple(lookup[n] for n in names), self.label)


def group_distance(sub_a: Sequence[float], sub_b: Sequence[float]) -> float:
    """Euclidean distance between two equally long feature groups."""
    if len(sub_a) != len(sub_b):
        raise LengthMismatch(f"group lengths differ: {len(sub_a)} vs {len(sub_b)}")
    if not sub_a:
        raise LengthMismatch("feature groups must be non-empty")
    return math.sqrt(math.fsum((x - y) ** 2 for x, y in zip(sub_a, sub_b)))


def graph_similarity(g_a: TransitionGraph, g_b: TransitionGraph) -> Tuple[float, float]:
    """Cosine of the edge-probability vectors and Jaccard index of the edge sets."""
    if not g_a.edges or not g_b.edges:
        raise EmptyGraph("graph similarity needs two non-empty graphs")
    keys = sorted(set(g_a.edges) | set(g_b.edges))
    va = [g_a.edges.get(k, 0.0) for k in keys]
    vb = [g_b.edges.get(k, 0.0) for k in keys]
    dot = math.fsum(x * y for x, y in zip(va, vb))
    norm = math.sqrt(math.fsum(x * x for x in va) * math.fsum(y * y for y in vb))
    cosine = min(1.0, dot / norm)
    shared = len(set(g_a.edges) & set(g_b.edges))
    return cosine, shared / len(keys)


def _union_vectors(a: Mapping[str, float], b: Mapping[str, float]):
    keys = sorted(set(a) | set(b))
    if not keys:
        return [0.0], [0.0]
    return [a.get(k, 0.0) for k in keys], [b.get(k, 0.0) for k in keys]


def _english_values(a: EnglishProfile, b: EnglishProfile) -> List[float]:
    cosine, jaccard = graph_similarity(a.graph, b.graph)
    return [
        group_distance([a.pos_freq[t] for t in POS_ORDER], [b.pos_freq[t] for t in POS_ORDER]),
        group_distance([a.punct_freq[m] for m in PUNCT_SET], [b.punct_freq[m] for m in PUNCT_SET]),
        group_distance(a.sent_stats.as_vector(), b.sent_stats.as_vector()),
        group_distance(*_union_vectors(a.func_freq, b.func_freq)),
        group_distance(a.richness.as_vector(), b.richness.as_vector()),
        group_distance([a.voice.passive_ratio], [b.voice.passive_ratio]),
        cosine,
        jaccard,
    ]


def feature_names_for(mode, injected_keys: Sequence[str] = ()) -> Tuple[str, ...]:
    mode = LanguageMode.parse(mode)
    base = ENGLISH_FEATURES if mode is LanguageMode.ENGLISH else RS_FEATURES
    return base + tuple(INJECTED_PREFIX + k for k in sorted(injected_keys))


def compare_profiles(p_a: StyleProfile, p_b: StyleProfile,
                     lexicon: Optional[RsLexicon] = None,
                     label: Optional[int] = None) -> SimilarityRecord:
    """Build the similarity record for a profile pair.

    English: one Euclidean distance per feature group plus graph cosine and
    Jaccard. RS: ratio and edit-distance aggregates of the two chunks. Both
    modes append ``|a - b|`` for every injected scalar (missing keys are 0).
    """
    if p_a.mode is not p_b.mode:
        raise ModeMismatch(f"cannot compare {p_a.mode.value} with {p_b.mode.value}")
    if p_a.mode is LanguageMode.ENGLISH:
        values = _english_values(p_a.english, p_b.english)
    else:
        if lexicon is None:
            raise MissingLexicon("Romanized Sinhala comparison needs a lexicon")
        f = rs_pair_features(p_a.chunk, p_b.chunk, lexicon)
        values = [min(f.ratio_a, f.ratio_b), max(f.ratio_a, f.ratio_b), f.ratio_abs_diff,
                  f.aligned_count, f.total_edit_distance, f.mean_normalized_distance,
                  f.unaligned_fraction]
    keys = sorted(set(p_a.injected) | set(p_b.injected))
    values += [abs(p_a.injected.get(k, 0.0) - p_b.injected.get(k, 0.0)) for k in keys]
    return SimilarityRecord(feature_names_for(p_a.mode, keys), tuple(values), label)
