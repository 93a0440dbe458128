"""Seeded synthetic author corpora for end-to-end testing.

Each author is a small generative process: sentence lengths follow a rounded
normal clipped at 1, words are drawn from weighted function-word and content
vocabularies, punctuation is injected at per-1000-token rates and, in
Romanized Sinhala mode, vowels are dropped and English words mixed in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from . import resources
from .english import function_words
from .errors import InvalidParams

U64 = (1 << 64) - 1
TERMINAL_MARKS = (".", "?", "!")
VOWELS = "aeiou"

DEFAULT_PUNCT_EN = {",": 55.0, ";": 5.0, ":": 4.0, "-": 8.0, '"': 6.0, "'": 3.0,
                    ".": 60.0, "?": 6.0, "!": 3.0}
DEFAULT_PUNCT_RS = {",": 20.0, "-": 3.0, ".": 60.0, "?": 15.0, "!": 6.0}


@dataclass(frozen=True)
class AuthorStyleParams:
    """Generative parameters of one synthetic author.

    ``punct_rates`` gives per-1000-token rates for in-sentence marks. The
    entries for ``.``, ``?`` and ``!`` are only relative weights: every
    sentence ends with exactly one of them, so their joint rate follows from
    the sentence length.
    """

    mean_sentence_len: float
    std_sentence_len: float
    punct_rates: Mapping[str, float]
    func_word_weights: Mapping[str, float]
    vocab: Tuple[Tuple[str, float], ...]
    rs_mode: bool = False
    rs_vowel_drop_prob: float = 0.0
    en_mix_prob: float = 0.0

    def validate(self) -> None:
        if not self.mean_sentence_len >= 1:
            raise InvalidParams("mean_sentence_len must be >= 1")
        if not self.std_sentence_len >= 0:
            raise InvalidParams("std_sentence_len must be >= 0")
        for name in ("rs_vowel_drop_prob", "en_mix_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise InvalidParams(f"{name} must lie in [0, 1], got {p!r}")
        if any(r < 0 for r in self.punct_rates.values()):
            raise InvalidParams("punctuation rates must be non-negative")
        if sum(r for m, r in self.punct_rates.items() if m not in TERMINAL_MARKS) >= 1000:
            raise InvalidParams("in-sentence punctuation rates must sum to less than 1000")
        if any(w < 0 for w in self.func_word_weights.values()) or any(w < 0 for _, w in self.vocab):
            raise InvalidParams("word weights must be non-negative")
        if self.rs_mode:
            if not self.vocab or sum(w for _, w in self.vocab) <= 0:
                raise InvalidParams("RS mode needs a weighted Sinhala vocabulary")
            if self.en_mix_prob > 0 and sum(self.func_word_weights.values()) <= 0:
                raise InvalidParams("English mixing needs English word weights")
        elif sum(self.func_word_weights.values()) + sum(w for _, w in self.vocab) <= 0:
            raise InvalidParams("no word has positive weight")


def expected_sentence_length(mean: float, std: float) -> float:
    """Mean of ``max(1, round(N(mean, std)))``."""
    if std == 0:
        return float(max(1, math.floor(mean + 0.5)))

    def cdf(x):
        return 0.5 * (1.0 + math.erf((x - mean) / (std * math.sqrt(2.0))))

    total = cdf(1.5)
    k = 2
    upper = mean + 12 * std + 2
    while k <= upper:
        total += k * (cdf(k + 0.5) - cdf(k - 0.5))
        k += 1
    return total


class _Sampler:
    def __init__(self, items: List[Tuple[str, float]]):
        self.words = [w for w, _ in items]
        weights = np.array([w for _, w in items], dtype=float)
        self.cum = np.cumsum(weights / weights.sum())
        self.cum[-1] = 1.0

    def draw(self, rng, n: int) -> List[str]:
        idx = np.searchsorted(self.cum, rng.random(n), side="right")
        return [self.words[min(i, len(self.words) - 1)] for i in idx]


def drop_vowels(word: str, prob: float, rng) -> str:
    if prob <= 0:
        return word
    keep = rng.random(len(word)) >= prob
    out = "".join(c for c, k in zip(word, keep) if k or c not in VOWELS)
    return out or word


def gen_author_docs(params: AuthorStyleParams, n_docs: int, words_per_doc: int, seed: int) -> List[str]:
    """Generate ``n_docs`` documents of at least ``words_per_doc`` words each.

    A document stops at the first sentence end that reaches the word target.
    """
    params.validate()
    if n_docs < 1 or words_per_doc < 1:
        raise InvalidParams("n_docs and words_per_doc must be >= 1")
    rng = np.random.default_rng(seed & U64)
    internal = [(m, r) for m, r in sorted(params.punct_rates.items()) if m not in TERMINAL_MARKS and r > 0]
    terminal = [(m, params.punct_rates.get(m, 0.0)) for m in TERMINAL_MARKS]
    if sum(w for _, w in terminal) <= 0:
        terminal = [(".", 1.0)]
    terminal_sampler = _Sampler([t for t in terminal if t[1] > 0])
    # A sentence of L words has L - 1 gaps and one terminator. With per-gap
    # probability p_m, mark m makes up p_m (L - 1) / (L + 1 + P (L - 1)) of the
    # tokens (P = sum of p_m); solving for the requested rates gives the scale.
    mean_len = expected_sentence_length(params.mean_sentence_len, params.std_sentence_len)
    internal_share = sum(r for _, r in internal) / 1000.0
    if internal and mean_len - 1.0 < 1e-9:
        raise InvalidParams("in-sentence punctuation needs sentences longer than one word")
    scale = (mean_len + 1.0) / ((mean_len - 1.0) * (1.0 - internal_share)) if internal else 0.0
    gap_probs = np.array([r / 1000.0 * scale for _, r in internal])
    if gap_probs.sum() > 1:
        raise InvalidParams("punctuation rates too high for the sentence length")
    gap_cum = np.cumsum(gap_probs)

    en_items = [(w, x) for w, x in sorted(params.func_word_weights.items()) if x > 0]
    vocab_items = [(w, x) for w, x in params.vocab if x > 0]
    if params.rs_mode:
        rs_sampler = _Sampler(vocab_items)
        en_sampler = _Sampler(en_items) if en_items else None
    else:
        word_sampler = _Sampler(en_items + vocab_items)

    def sentence_words(n):
        if not params.rs_mode:
            return word_sampler.draw(rng, n)
        english = rng.random(n) < params.en_mix_prob
        rs_words = rs_sampler.draw(rng, n)
        en_words = en_sampler.draw(rng, n) if en_sampler is not None else rs_words
        return [en_words[i] if english[i] else drop_vowels(rs_words[i], params.rs_vowel_drop_prob, rng)
                for i in range(n)]

    docs = []
    for _ in range(n_docs):
        sentences = []
        total = 0
        while total < words_per_doc:
            n = max(1, math.floor(rng.normal(params.mean_sentence_len, params.std_sentence_len) + 0.5))
            words = sentence_words(n)
            if not params.rs_mode:
                words[0] = words[0][:1].upper() + words[0][1:]
            parts = []
            u = rng.random(n)
            for i, w in enumerate(words):
                parts.append(w)
                if i < n - 1 and internal:
                    k = int(np.searchsorted(gap_cum, u[i], side="right"))
                    if k < len(internal):
                        mark = internal[k][0]
                        if mark in ",;:":
                            parts[-1] += mark
                        else:
                            parts.append(mark)
            parts[-1] += terminal_sampler.draw(rng, 1)[0]
            sentences.append(" ".join(parts))
            total += n
        docs.append(" ".join(sentences))
    return docs


def _zipf(words: List[str], total: float, offset: float = 3.0) -> Dict[str, float]:
    raw = [1.0 / (rank + offset) for rank in range(len(words))]
    s = sum(raw)
    return {w: total * r / s for w, r in zip(words, raw)}


def english_content_words() -> List[str]:
    listed = set(function_words())
    return [w for w in resources.packaged_words("en_common.txt") if w not in listed]


def base_params(rs_mode: bool = False) -> AuthorStyleParams:
    """The zero-spread author every synthetic author is perturbed from."""
    if rs_mode:
        rs = resources.packaged_words("rs_lexicon.txt")
        order = np.random.default_rng(7).permutation(len(rs))
        rs = [rs[i] for i in order]
        en = english_content_words() + list(function_words())
        return AuthorStyleParams(8.0, 3.0, dict(DEFAULT_PUNCT_RS), _zipf(en, 1.0),
                                 tuple(_zipf(rs, 1.0).items()), True, 0.2, 0.25)
    return AuthorStyleParams(15.0, 5.0, dict(DEFAULT_PUNCT_EN), _zipf(list(function_words()), 0.45),
                             tuple(_zipf(english_content_words(), 0.55, 5.0).items()))


def perturb_params(base: AuthorStyleParams, spread: float, rng) -> AuthorStyleParams:
    """Log-normal jitter of every parameter, scaled by ``spread`` (0 = copy)."""
    if spread < 0:
        raise InvalidParams("param_spread must be >= 0")

    def jitter(value, sigma):
        return value * math.exp(spread * sigma * rng.normal())

    punct = {m: jitter(r, 0.6) for m, r in sorted(base.punct_rates.items())}
    func = {w: jitter(x, 0.8) for w, x in sorted(base.func_word_weights.items())}
    vocab = tuple((w, jitter(x, 1.0)) for w, x in base.vocab)
    drop = base.rs_vowel_drop_prob
    mix = base.en_mix_prob
    if base.rs_mode:
        drop = min(0.8, max(0.0, drop + spread * 0.2 * rng.normal()))
        mix = min(0.8, max(0.02, mix + spread * 0.15 * rng.normal()))
    return AuthorStyleParams(
        mean_sentence_len=max(1.0, jitter(base.mean_sentence_len, 0.35)),
        std_sentence_len=jitter(base.std_sentence_len, 0.35),
        punct_rates=punct,
        func_word_weights=func,
        vocab=vocab,
        rs_mode=base.rs_mode,
        rs_vowel_drop_prob=drop,
        en_mix_prob=mix,
    )


@dataclass
class SynthCorpus:
    docs: Dict[str, List[str]]
    params: Dict[str, AuthorStyleParams] = field(repr=False)
    config: Dict[str, str] = field(default_factory=dict)


def _seed_for(seed: int, *keys: int) -> int:
    return int(np.random.SeedSequence([seed & U64, *keys]).generate_state(2, np.uint64)[0])


def gen_corpus(n_authors: int, docs_per_author: int, param_spread: float, seed: int,
               words_per_doc: int = 250, rs_mode: bool = False) -> SynthCorpus:
    """Generate ``n_authors`` authors with ``docs_per_author`` documents each."""
    if n_authors < 2:
        raise InvalidParams("need at least two authors")
    if docs_per_author < 1:
        raise InvalidParams("docs_per_author must be >= 1")
    base = base_params(rs_mode)
    width = max(2, len(str(n_authors - 1)))
    docs, params = {}, {}
    for a in range(n_authors):
        author_id = f"author{a:0{width}d}"
        p = perturb_params(base, param_spread, np.random.default_rng(_seed_for(seed, a, 0)))
        params[author_id] = p
        docs[author_id] = gen_author_docs(p, docs_per_author, words_per_doc, _seed_for(seed, a, 1))
    config = {
        "mode": "rs" if rs_mode else "english",
        "n_authors": str(n_authors),
        "docs_per_author": str(docs_per_author),
        "words_per_doc": str(words_per_doc),
        "param_spread": repr(float(param_spread)),
        "seed": str(seed),
    }
    return SynthCorpus(docs, params, config)


def write_corpus(corpus: SynthCorpus, root) -> None:
    """Write ``root/<author>/docNNN.txt`` plus a ``synth.cfg`` parameter file."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    for author_id, texts in corpus.docs.items():
        d = root / author_id
        d.mkdir(exist_ok=True)
        for k, text in enumerate(texts):
            (d / f"doc{k:03d}.txt").write_text(text + "\n", encoding="utf-8")
    lines = ["# synthetic corpus parameters"]
    lines += [f"{k}={v}" for k, v in corpus.config.items()]
    for author_id, p in corpus.params.items():
        lines.append(f"{author_id}.mean_sentence_len={p.mean_sentence_len!r}")
        lines.append(f"{author_id}.std_sentence_len={p.std_sentence_len!r}")
        if p.rs_mode:
            lines.append(f"{author_id}.rs_vowel_drop_prob={p.rs_vowel_drop_prob!r}")
            lines.append(f"{author_id}.en_mix_prob={p.en_mix_prob!r}")
    (root / "synth.cfg").write_text("\n".join(lines) + "\n", encoding="utf-8")
