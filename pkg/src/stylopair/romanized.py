"""Romanized Sinhala pair features.

Words are classified as English, Romanized Sinhala or unknown with a word
list plus vowel-free "consonant skeleton" matching, which absorbs the ad hoc
vowel dropping common in chat text (``warthamana`` / ``wrthmna``). Two chunks
are compared through their English/Sinhala ratios and the edit distances
between aligned similar words.
"""

from __future__ import annotations

import enum
import functools
import math
from collections import defaultdict
from dataclasses import dataclass, fields
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from . import resources
from .errors import NoClassifiableWords

VOWELS = frozenset("aeiou")

SKELETON_THRESHOLD = 1


class WordLanguage(str, enum.Enum):
    ENGLISH = "English"
    ROMANIZED_SINHALA = "RomanizedSinhala"
    UNKNOWN = "Unknown"


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance (insertions, deletions, substitutions)."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        current = [i]
        for j, cb in enumerate(b, 1):
            current.append(min(previous[j] + 1,
                               current[j - 1] + 1,
                               previous[j - 1] + (ca != cb)))
        previous = current
    return previous[-1]


def consonant_skeleton(word: str) -> str:
    return "".join(c for c in word.lower() if c not in VOWELS)


@functools.lru_cache(maxsize=65536)
def _skeleton_distance(a: str, b: str) -> int:
    if abs(len(a) - len(b)) > SKELETON_THRESHOLD:
        return SKELETON_THRESHOLD + 1
    return levenshtein(a, b)


@dataclass(frozen=True)
class RsLexicon:
    rs_words: FrozenSet[str]
    en_words: FrozenSet[str]

    def __post_init__(self):
        rs = frozenset(w.lower() for w in self.rs_words)
        en = frozenset(w.lower() for w in self.en_words)
        if not rs or not en:
            raise ValueError("lexicon word sets must be non-empty")
        if rs & en:
            raise ValueError(f"lexicon sets overlap: {sorted(rs & en)[:5]}")
        object.__setattr__(self, "rs_words", rs)
        object.__setattr__(self, "en_words", en)
        object.__setattr__(self, "_skeletons", frozenset(consonant_skeleton(w) for w in rs))

    @classmethod
    def build(cls, rs_words: Iterable[str], en_words: Iterable[str]) -> "RsLexicon":
        """Case-fold both lists; words listed as English win over Sinhala ones."""
        en = frozenset(w.lower() for w in en_words)
        rs = frozenset(w.lower() for w in rs_words) - en
        return cls(rs, en)

    def is_rs_skeleton(self, skeleton: str) -> bool:
        return skeleton in self._skeletons


def load_lexicon(rs_path: Optional[str] = None, en_path: Optional[str] = None) -> RsLexicon:
    if rs_path is None and en_path is None:
        return default_lexicon()
    return RsLexicon.build(resources.words_or_default(rs_path, "rs_lexicon.txt"),
                           resources.words_or_default(en_path, "en_common.txt"))


@functools.lru_cache(maxsize=1)
def default_lexicon() -> RsLexicon:
    return RsLexicon.build(resources.packaged_words("rs_lexicon.txt"),
                           resources.packaged_words("en_common.txt"))


def classify_word(word: str, lexicon: RsLexicon) -> WordLanguage:
    w = word.lower()
    if w in lexicon.en_words:
        return WordLanguage.ENGLISH
    if w in lexicon.rs_words or lexicon.is_rs_skeleton(consonant_skeleton(w)):
        return WordLanguage.ROMANIZED_SINHALA
    return WordLanguage.UNKNOWN


def _chunk_words(chunk) -> List[str]:
    # accepts a Chunk or a plain list of words
    words = chunk.words if hasattr(chunk, "words") else chunk
    return [w.lower() for w in words]


def language_counts(chunk, lexicon: RsLexicon) -> Dict[WordLanguage, int]:
    counts = {lang: 0 for lang in WordLanguage}
    for w in _chunk_words(chunk):
        counts[classify_word(w, lexicon)] += 1
    return counts


def en_si_ratio(chunk, lexicon: RsLexicon) -> float:
    """English words per Romanized Sinhala word.

    With no Sinhala words the ratio saturates to the English count.
    """
    counts = language_counts(chunk, lexicon)
    n_en = counts[WordLanguage.ENGLISH]
    n_rs = counts[WordLanguage.ROMANIZED_SINHALA]
    if n_en + n_rs == 0:
        raise NoClassifiableWords("no word in the chunk is English or Romanized Sinhala")
    return float(n_en) if n_rs == 0 else n_en / n_rs


def _candidates(chunk, lexicon) -> List[str]:
    return [w for w in _chunk_words(chunk)
            if classify_word(w, lexicon) is not WordLanguage.ENGLISH]


def _align_words(words_a: Sequence[str], words_b: Sequence[str]) -> List[Tuple[int, int]]:
    by_skel_a: Dict[str, List[int]] = defaultdict(list)
    by_skel_b: Dict[str, List[int]] = defaultdict(list)
    for i, w in enumerate(words_a):
        by_skel_a[consonant_skeleton(w)].append(i)
    for j, w in enumerate(words_b):
        by_skel_b[consonant_skeleton(w)].append(j)
    candidates = []
    for sa, pos_a in by_skel_a.items():
        for sb, pos_b in by_skel_b.items():
            d = _skeleton_distance(sa, sb)
            if d <= SKELETON_THRESHOLD:
                candidates.extend((d, i, j) for i in pos_a for j in pos_b)
    candidates.sort()
    used_a, used_b = set(), set()
    pairs = []
    for _, i, j in candidates:
        if i not in used_a and j not in used_b:
            used_a.add(i)
            used_b.add(j)
            pairs.append((i, j))
    pairs.sort()
    return pairs


def align_rs_words(chunk_a, chunk_b, lexicon: RsLexicon) -> List[Tuple[str, str]]:
    """Pair similar non-English words across two chunks.

    Candidates are Romanized Sinhala or unknown words. Pairs whose skeletons
    are within edit distance 1 are accepted greedily, closest skeletons first,
    ties going to the earliest position in ``chunk_a`` and then ``chunk_b``.
    Each word is used at most once. Pairs are returned in ``chunk_a`` order.
    """
    words_a = _candidates(chunk_a, lexicon)
    words_b = _candidates(chunk_b, lexicon)
    return [(words_a[i], words_b[j]) for i, j in _align_words(words_a, words_b)]


@dataclass(frozen=True)
class RsPairFeatures:
    ratio_a: float
    ratio_b: float
    ratio_abs_diff: float
    aligned_count: int
    total_edit_distance: int
    mean_normalized_distance: float
    unaligned_fraction: float
    pairs: Tuple[Tuple[str, str], ...] = ()

    @classmethod
    def field_names(cls) -> List[str]:
        return [f.name for f in fields(cls) if f.name != "pairs"]


def rs_pair_features(chunk_a, chunk_b, lexicon: RsLexicon) -> RsPairFeatures:
    """Ratios and edit-distance aggregates for a chunk pair.

    The alignment runs in a canonical orientation (lexicographically smaller
    candidate sequence first) so that swapping the chunks only swaps
    ``ratio_a`` and ``ratio_b``.
    """
    ratio_a = en_si_ratio(chunk_a, lexicon)
    ratio_b = en_si_ratio(chunk_b, lexicon)
    words_a = _candidates(chunk_a, lexicon)
    words_b = _candidates(chunk_b, lexicon)
    if words_a <= words_b:
        pairs = [(words_a[i], words_b[j]) for i, j in _align_words(words_a, words_b)]
    else:
        pairs = [(words_a[i], words_b[j]) for j, i in _align_words(words_b, words_a)]
    distances = [levenshtein(a, b) for a, b in pairs]
    normalized = [d / max(len(a), len(b)) for d, (a, b) in zip(distances, pairs)]
    n_candidates = len(words_a) + len(words_b)
    return RsPairFeatures(
        ratio_a=ratio_a,
        ratio_b=ratio_b,
        ratio_abs_diff=abs(ratio_a - ratio_b),
        aligned_count=len(pairs),
        total_edit_distance=sum(distances),
        mean_normalized_distance=math.fsum(normalized) / len(pairs) if pairs else 0.0,
        unaligned_fraction=1.0 - 2 * len(pairs) / n_candidates if n_candidates else 0.0,
        pairs=tuple(pairs),
    )
