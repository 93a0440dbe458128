"""English stylometric profile of a single text.

The profile bundles part-of-speech rates, active/passive voice counts,
punctuation and function-word rates, sentence-length statistics, lexical
richness and a word transition graph. Tagging is lexicon + suffix rules only.
"""

from __future__ import annotations

import enum
import functools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Mapping, Sequence, Tuple

from . import resources
from .errors import EmptyInput
from .text import Token, TokenKind, group_sentences, split_sentences, tokenize


class PosTag(str, enum.Enum):
    NOUN = "Noun"
    VERB = "Verb"
    ADJECTIVE = "Adjective"
    ADVERB = "Adverb"
    PRONOUN = "Pronoun"
    DETERMINER = "Determiner"
    PREPOSITION = "Preposition"
    CONJUNCTION = "Conjunction"
    MODAL = "Modal"
    PARTICIPLE = "Participle"
    INTERJECTION = "Interjection"
    OTHER = "Other"


POS_ORDER: Tuple[PosTag, ...] = tuple(PosTag)

# Marks whose frequency is reported, in export order.
PUNCT_SET: Tuple[str, ...] = (",", ".", ";", ":", "!", "?", "'", '"', "-", "(", ")")

BE_FORMS = frozenset({"am", "is", "are", "was", "were", "been", "being", "be"})

PASSIVE_WINDOW = 3

# Upper bounds of the sentence-length bins, in words; the last bin is open.
LENGTH_BINS: Tuple[Tuple[int, float], ...] = ((1, 5), (6, 10), (11, 20), (21, 40), (41, math.inf))
LENGTH_BIN_LABELS = ("1-5", "6-10", "11-20", "21-40", "41+")

_SUFFIX_RULES = (
    ("ly", PosTag.ADVERB),
    ("ing", PosTag.VERB),
    ("ed", PosTag.VERB),
    ("tion", PosTag.NOUN),
    ("ness", PosTag.NOUN),
    ("ment", PosTag.NOUN),
    ("ous", PosTag.ADJECTIVE),
    ("ful", PosTag.ADJECTIVE),
    ("ive", PosTag.ADJECTIVE),
)


@functools.lru_cache(maxsize=1)
def pos_lexicon() -> Dict[str, PosTag]:
    raw = resources.read_tsv_map(resources.packaged_text("pos_lexicon.tsv"))
    return {w: PosTag(t) for w, t in raw.items()}


@functools.lru_cache(maxsize=1)
def function_words() -> Tuple[str, ...]:
    return tuple(dict.fromkeys(resources.packaged_words("function_words.txt")))


@functools.lru_cache(maxsize=1)
def irregular_participles() -> FrozenSet[str]:
    return frozenset(resources.packaged_words("irregular_participles.txt"))


# --- data types ---------------------------------------------------------------

@dataclass(frozen=True)
class TransitionGraph:
    """Word transition probabilities ``P(to | from)``.

    With ``order`` > 2 the ``from`` side is the preceding ``order - 1`` words
    joined by single spaces.
    """

    edges: Mapping[Tuple[str, str], float]
    out_degree: Mapping[str, int]
    order: int = 2

    def __len__(self):
        return len(self.edges)

    def row(self, source: str) -> Dict[str, float]:
        return {b: p for (a, b), p in self.edges.items() if a == source}


@dataclass(frozen=True)
class VoiceStats:
    active: int
    passive: int

    @property
    def passive_ratio(self) -> float:
        total = self.active + self.passive
        return self.passive / total if total else 0.0


@dataclass(frozen=True)
class SentenceStats:
    mean: float
    std: float
    histogram: Tuple[float, ...]

    def as_vector(self) -> List[float]:
        return [self.mean, self.std, *self.histogram]


@dataclass(frozen=True)
class Richness:
    type_token_ratio: float
    hapax_ratio: float
    mean_word_length: float

    def as_vector(self) -> List[float]:
        return [self.type_token_ratio, self.hapax_ratio, self.mean_word_length]


@dataclass(frozen=True)
class EnglishProfile:
    pos_freq: Mapping[PosTag, float]
    voice: VoiceStats
    punct_freq: Mapping[str, float]
    sent_stats: SentenceStats
    func_freq: Mapping[str, float]
    richness: Richness
    graph: TransitionGraph = field(repr=False)


# --- operations ---------------------------------------------------------------

def tag_word(word: str) -> PosTag:
    w = word.lower()
    tag = pos_lexicon().get(w)
    if tag is not None:
        return tag
    for suffix, suffix_tag in _SUFFIX_RULES:
        if w.endswith(suffix) and len(w) > len(suffix):
            return suffix_tag
    return PosTag.NOUN


def pos_tag(tokens: Sequence[Token]) -> List[Tuple[Token, PosTag]]:
    """Tag every token; non-word tokens get ``PosTag.OTHER``."""
    return [(t, tag_word(t.text) if t.is_word else PosTag.OTHER) for t in tokens]


def _is_participle(word: str, tag: PosTag) -> bool:
    w = word.lower()
    if w in BE_FORMS:
        return False
    if w in irregular_participles():
        return True
    return tag in (PosTag.VERB, PosTag.PARTICIPLE) and (w.endswith("ed") or w.endswith("en"))


def sentence_voice(tagged: Sequence[Tuple[Token, PosTag]]):
    """Return ``"passive"``, ``"active"`` or ``None`` for one tagged sentence."""
    words = [(t.text, tag) for t, tag in tagged if t.is_word]
    for k, (w, _) in enumerate(words):
        if w.lower() in BE_FORMS:
            window = words[k + 1:k + 1 + PASSIVE_WINDOW]
            if any(_is_participle(v, vt) for v, vt in window):
                return "passive"
    if any(tag in (PosTag.VERB, PosTag.PARTICIPLE) for _, tag in words):
        return "active"
    return None


def voice_counts(tagged_sentences: Sequence[Sequence[Tuple[Token, PosTag]]]) -> VoiceStats:
    counts = Counter(sentence_voice(s) for s in tagged_sentences)
    return VoiceStats(counts["active"], counts["passive"])


def punct_freq(tokens: Sequence[Token]) -> Dict[str, float]:
    """Rate per 1000 tokens of each mark in :data:`PUNCT_SET`."""
    if not tokens:
        raise EmptyInput("punctuation rates need at least one token")
    counts = Counter(t.text for t in tokens if t.kind is TokenKind.PUNCT)
    total = len(tokens)
    return {m: 1000.0 * counts[m] / total for m in PUNCT_SET}


def length_stats(lengths: Sequence[int]) -> SentenceStats:
    lengths = [n for n in lengths if n > 0]
    if not lengths:
        raise EmptyInput("sentence statistics need at least one non-empty sentence")
    n = len(lengths)
    mean = sum(lengths) / n
    std = math.sqrt(sum((x - mean) ** 2 for x in lengths) / n)
    bins = [0] * len(LENGTH_BINS)
    for x in lengths:
        for i, (lo, hi) in enumerate(LENGTH_BINS):
            if lo <= x <= hi:
                bins[i] += 1
                break
    return SentenceStats(mean, std, tuple(b / n for b in bins))


def sentence_length_stats(sentences: Sequence[Sequence[Token]]) -> SentenceStats:
    """Mean, population std and binned distribution of sentence lengths in words.

    Sentences without any word token are ignored.
    """
    return length_stats([sum(t.is_word for t in s) for s in sentences])


def _words(tokens: Sequence[Token]) -> List[str]:
    return [t.text.lower() for t in tokens if t.is_word]


def function_word_freq(tokens: Sequence[Token]) -> Dict[str, float]:
    words = _words(tokens)
    if not words:
        raise EmptyInput("function-word rates need at least one word")
    listed = set(function_words())
    counts = Counter(w for w in words if w in listed)
    return {w: 1000.0 * c / len(words) for w, c in sorted(counts.items())}


def lexical_richness(tokens: Sequence[Token]) -> Richness:
    words = _words(tokens)
    if not words:
        raise EmptyInput("lexical richness needs at least one word")
    counts = Counter(words)
    hapax = sum(1 for c in counts.values() if c == 1)
    mean_len = sum(len(t.text) for t in tokens if t.is_word) / len(words)
    return Richness(len(counts) / len(words), hapax / len(counts), mean_len)


def transition_graph(tokens: Sequence[Token], order: int = 2) -> TransitionGraph:
    """Sentence-internal word n-gram transition probabilities (bigrams by default)."""
    if order < 2:
        raise ValueError("order must be >= 2")
    if sum(t.is_word for t in tokens) < 2:
        raise EmptyInput("a transition graph needs at least two words")
    counts: Dict[str, Counter] = defaultdict(Counter)
    for sentence in group_sentences(tokens):
        words = _words(sentence)
        for i in range(len(words) - order + 1):
            context = " ".join(words[i:i + order - 1])
            counts[context][words[i + order - 1]] += 1
    edges = {}
    out_degree = {}
    for src in sorted(counts):
        row = counts[src]
        total = sum(row.values())
        for dst in sorted(row):
            edges[(src, dst)] = row[dst] / total
        out_degree[src] = len(row)
    return TransitionGraph(edges, out_degree, order)


def pos_rates(tagged: Sequence[Tuple[Token, PosTag]]) -> Dict[PosTag, float]:
    word_tags = [tag for t, tag in tagged if t.is_word]
    if not word_tags:
        raise EmptyInput("POS rates need at least one word")
    counts = Counter(word_tags)
    return {tag: 1000.0 * counts[tag] / len(word_tags) for tag in POS_ORDER}


def english_profile(text: str, graph_order: int = 2) -> EnglishProfile:
    """Compute every English feature group for an already cleaned text."""
    tokens = tokenize(text)
    if not split_sentences(text):
        raise EmptyInput("text has no sentences")
    tagged = pos_tag(tokens)
    sentences = group_sentences(tokens)
    tagged_sentences = group_sentences_tagged(tagged)
    return EnglishProfile(
        pos_freq=pos_rates(tagged),
        voice=voice_counts(tagged_sentences),
        punct_freq=punct_freq(tokens),
        sent_stats=sentence_length_stats(sentences),
        func_freq=function_word_freq(tokens),
        richness=lexical_richness(tokens),
        graph=transition_graph(tokens, graph_order),
    )


def group_sentences_tagged(tagged):
    groups = []
    current = None
    for tok, tag in tagged:
        if current is None or tok.sentence_index != current:
            groups.append([])
            current = tok.sentence_index
        groups[-1].append((tok, tag))
    return groups


def format_profile(profile: EnglishProfile) -> str:
    """Render a profile as ``key=value`` lines in a fixed field order.

    Order: pos.*, voice.*, punct.*, sent.*, func.* (sorted), richness.*,
    graph summary, then one ``edge`` line per transition.
    """
    lines = [f"pos.{tag.value}={profile.pos_freq[tag]!r}" for tag in POS_ORDER]
    v = profile.voice
    lines += [f"voice.active={v.active}", f"voice.passive={v.passive}",
              f"voice.passive_ratio={v.passive_ratio!r}"]
    lines += [f"punct.{m}={profile.punct_freq[m]!r}" for m in PUNCT_SET]
    s = profile.sent_stats
    lines += [f"sent.mean={s.mean!r}", f"sent.std={s.std!r}"]
    lines += [f"sent.bin.{label}={h!r}" for label, h in zip(LENGTH_BIN_LABELS, s.histogram)]
    lines += [f"func.{w}={r!r}" for w, r in sorted(profile.func_freq.items())]
    r = profile.richness
    lines += [f"richness.type_token_ratio={r.type_token_ratio!r}",
              f"richness.hapax_ratio={r.hapax_ratio!r}",
              f"richness.mean_word_length={r.mean_word_length!r}"]
    g = profile.graph
    lines += [f"graph.order={g.order}", f"graph.nodes={len(g.out_degree)}", f"graph.edges={len(g.edges)}"]
    lines += [f"edge {a} -> {b} {p!r}" for (a, b), p in g.edges.items()]
    return "\n".join(lines) + "\n"
