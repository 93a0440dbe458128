"""Cleaning, tokenization, sentence segmentation and chunking.

Both language pipelines share this module. All functions are pure.
"""

from __future__ import annotations

import bisect
import enum
import math
import re
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence, Tuple

from .errors import EmptyInput


class LanguageMode(str, enum.Enum):
    ENGLISH = "english"
    ROMANIZED_SINHALA = "rs"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"en": cls.ENGLISH, "english": cls.ENGLISH,
                   "rs": cls.ROMANIZED_SINHALA, "romanized-sinhala": cls.ROMANIZED_SINHALA,
                   "romanizedsinhala": cls.ROMANIZED_SINHALA}
        if key not in aliases:
            raise ValueError(f"unknown language mode: {value!r}")
        return aliases[key]


class TokenKind(str, enum.Enum):
    WORD = "Word"
    PUNCT = "Punct"
    NUMBER = "Number"
    SYMBOL = "Symbol"


@dataclass(frozen=True)
class RawDocument:
    text: str
    author_id: Optional[str] = None
    language_mode: LanguageMode = LanguageMode.ENGLISH
    doc_id: Optional[str] = None


@dataclass(frozen=True)
class CleanPolicy:
    strip_emoji: bool = True
    strip_urls: bool = True
    strip_media_placeholders: bool = True
    collapse_whitespace: bool = True


@dataclass(frozen=True)
class Token:
    text: str
    kind: TokenKind
    sentence_index: int = 0

    @property
    def is_word(self):
        return self.kind is TokenKind.WORD


@dataclass(frozen=True)
class Chunk:
    tokens: Tuple[Token, ...]
    source_document: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.tokens:
            raise EmptyInput("a chunk needs at least one token")
        object.__setattr__(self, "tokens", tuple(self.tokens))

    @property
    def words(self) -> List[str]:
        return [t.text for t in self.tokens if t.is_word]

    @property
    def word_count(self) -> int:
        return sum(1 for t in self.tokens if t.is_word)


class Sentence(NamedTuple):
    start: int
    end: int
    text: str


# --- cleaning ---------------------------------------------------------------

# Emoticons, symbols & pictographs, transport, flags, supplemental pictographs,
# misc symbols and dingbats, plus the joiners/modifiers that glue emoji together.
EMOJI_RANGES = (
    (0x1F000, 0x1F02F),  # mahjong / domino tiles
    (0x1F0A0, 0x1F0FF),  # playing cards
    (0x1F100, 0x1F1FF),  # enclosed alphanumerics incl. regional-indicator flags
    (0x1F200, 0x1F2FF),
    (0x1F300, 0x1F5FF),  # symbols and pictographs
    (0x1F600, 0x1F64F),  # emoticons
    (0x1F680, 0x1F6FF),  # transport and map
    (0x1F700, 0x1F77F),
    (0x1F780, 0x1F7FF),
    (0x1F800, 0x1F8FF),
    (0x1F900, 0x1F9FF),  # supplemental symbols and pictographs
    (0x1FA00, 0x1FAFF),
    (0x2600, 0x26FF),    # misc symbols
    (0x2700, 0x27BF),    # dingbats
    (0x2B00, 0x2BFF),
    (0xFE00, 0xFE0F),    # variation selectors
    (0x200D, 0x200D),    # zero-width joiner
    (0x20E3, 0x20E3),    # combining enclosing keycap
    (0xE0020, 0xE007F),  # tag characters (subdivision flags)
)

_EMOJI_RE = re.compile(
    "[" + "".join(f"{chr(lo)}-{chr(hi)}" if lo != hi else chr(lo) for lo, hi in EMOJI_RANGES) + "]"
)
_URL_RE = re.compile(r"\S*://\S*|(?<!\S)www\.\S*", re.IGNORECASE)
_MEDIA_RE = re.compile(
    r"<\s*(?:media|image|video|audio|gif|sticker|document)\s+omitted\s*>"
    r"|\b(?:image|video|audio|gif|sticker|document)\s+omitted\b"
    r"|\bthis\s+message\s+was\s+deleted\b",
    re.IGNORECASE,
)
_WS_RE = re.compile(r"\s+")


def _clean_once(text: str, policy: CleanPolicy) -> str:
    if policy.strip_emoji:
        text = _EMOJI_RE.sub("", text)
    if policy.strip_urls:
        text = _URL_RE.sub("", text)
    if policy.strip_media_placeholders:
        text = _MEDIA_RE.sub("", text)
    if policy.collapse_whitespace:
        text = _WS_RE.sub(" ", text).strip()
    return text


def clean(text: str, policy: CleanPolicy = CleanPolicy()) -> str:
    """Strip emoji, URLs and chat media placeholders, then collapse whitespace.

    Removals can expose new matches (a placeholder sitting between ``www`` and
    a domain, say), so the passes repeat until the text stops changing. Each
    pass only deletes characters or shortens whitespace, so this terminates,
    and the fixed point makes the function idempotent.
    """
    while True:
        cleaned = _clean_once(text, policy)
        if cleaned == text:
            return cleaned
        text = cleaned


# --- tokenization ---------------------------------------------------------------

PUNCT_MARKS = frozenset(",.;:!?'\"-()[]{}…–—‘’“”/")

_TOKEN_RE = re.compile(
    r"(?P<num>\d+(?:[.,]\d+)+(?![^\W_]))"
    r"|(?P<alnum>[^\W_]+(?:['’][^\W_]+)*)"
    r"|(?P<other>\S)"
)


def _kind_of(piece: str) -> TokenKind:
    if any(c.isalpha() for c in piece):
        return TokenKind.WORD
    if piece[0].isdigit():
        return TokenKind.NUMBER
    if piece in PUNCT_MARKS:
        return TokenKind.PUNCT
    return TokenKind.SYMBOL


def tokenize(text: str) -> List[Token]:
    """Split text into Word/Punct/Number/Symbol tokens tagged with sentence indices.

    Apostrophes between letters stay inside the word (``don't``); hyphens are
    split out so that ``-`` counts as punctuation.
    """
    spans = split_sentences(text)
    starts = [s.start for s in spans]
    tokens = []
    for m in _TOKEN_RE.finditer(text):
        piece = m.group()
        idx = max(bisect.bisect_right(starts, m.start()) - 1, 0)
        tokens.append(Token(piece, _kind_of(piece), idx))
    return tokens


# --- sentences ---------------------------------------------------------------

ABBREVIATIONS = frozenset("""
mr. mrs. ms. dr. prof. sr. jr. st. mt. vs. etc. e.g. i.e. inc. ltd. co. corp.
jan. feb. mar. apr. jun. jul. aug. sep. sept. oct. nov. dec.
no. vol. fig. dept. approx. gen. col. capt. lt. sgt. rev. hon. est. al. cf. u.s.
""".split())

_TERMINATOR_RE = re.compile(r"[.!?]+[\"')\]”’]*(?=\s|$)")


def _is_abbreviation(text: str, run_start: int, run: str) -> bool:
    if run != ".":
        return False
    left = text.rfind(" ", 0, run_start)
    for ws in "\t\n\r":
        left = max(left, text.rfind(ws, 0, run_start))
    word = text[left + 1:run_start + 1].lstrip("\"'([“‘").lower()
    return word in ABBREVIATIONS


def split_sentences(text: str) -> List[Sentence]:
    """Rule-based splitter.

    A sentence ends at a run of ``.``, ``!`` or ``?`` (optionally followed by
    closing quotes/brackets) that is followed by whitespace or the end of the
    text. A lone period after a listed abbreviation (``Mr.``) does not end a
    sentence. Text without any terminator is a single sentence.
    """
    sentences = []
    start = 0
    for m in _TERMINATOR_RE.finditer(text):
        run = m.group().rstrip("\"')]”’")
        if _is_abbreviation(text, m.start(), run):
            continue
        _append_span(sentences, text, start, m.end())
        start = m.end()
    _append_span(sentences, text, start, len(text))
    return sentences


def _append_span(out, text, start, end):
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    if start < end:
        out.append(Sentence(start, end, text[start:end]))


def group_sentences(tokens: Sequence[Token]) -> List[List[Token]]:
    """Group a token stream into per-sentence token lists."""
    groups: List[List[Token]] = []
    current = None
    for tok in tokens:
        if current is None or tok.sentence_index != current:
            groups.append([])
            current = tok.sentence_index
        groups[-1].append(tok)
    return groups


# --- chunking ---------------------------------------------------------------

def chunk(tokens: Sequence[Token], target_words: int = 80,
          max_overshoot: Optional[int] = None, source: Optional[str] = None) -> List[Chunk]:
    """Split a token stream into chunks of roughly ``target_words`` words.

    A chunk closes at the first sentence end after it holds ``target_words``
    words. If that sentence end lies more than ``max_overshoot`` words further
    (default: a fifth of the target, at least 1), the chunk is cut mid-sentence
    right after its ``target_words``-th word instead.
    """
    if not tokens:
        raise EmptyInput("cannot chunk an empty token stream")
    if target_words < 1:
        raise ValueError("target_words must be >= 1")
    if max_overshoot is None:
        max_overshoot = max(1, math.ceil(target_words / 5))

    n = len(tokens)
    # words after position i in the same sentence
    words_after = [0] * n
    for i in range(n - 2, -1, -1):
        if tokens[i + 1].sentence_index == tokens[i].sentence_index:
            words_after[i] = words_after[i + 1] + tokens[i + 1].is_word
    chunks = []
    current: List[Token] = []
    words = 0
    for i, tok in enumerate(tokens):
        current.append(tok)
        words += tok.is_word
        sentence_end = i + 1 == n or tokens[i + 1].sentence_index != tok.sentence_index
        if words < target_words:
            continue
        cut_now = sentence_end or (
            tok.is_word and words == target_words and words_after[i] > max_overshoot
        )
        if cut_now:
            chunks.append(Chunk(tuple(current), source))
            current, words = [], 0
    if current:
        chunks.append(Chunk(tuple(current), source))
    return chunks
