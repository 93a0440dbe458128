from collections import Counter

import pytest
from hypothesis import given, strategies as st

from oracles import levenshtein_recursive, levenshtein_ref
from stylopair.errors import NoClassifiableWords
from stylopair.romanized import (RsLexicon, WordLanguage, align_rs_words, classify_word,
                                 consonant_skeleton, default_lexicon, en_si_ratio, levenshtein,
                                 load_lexicon, rs_pair_features)
from stylopair.text import Chunk, tokenize

LEX = default_lexicon()
CHUNK_1 = "warthamana janapathithuma wides sancharayak sadaha ada dina indiawa bala pitath uni"
CHUNK_2 = "wrthmna jnaphithuma widhes sncharyk sadha ada dina indiwa bala pitath wuni"


def ch(text):
    return Chunk(tuple(tokenize(text)))


# --- levenshtein ---------------------------------------------------------------

@pytest.mark.parametrize("a,b,d", [
    ("kitten", "sitting", 3),
    ("x", "x", 0),
    ("wides", "widhes", 1),
    ("", "abc", 3),
    ("saturday", "sunday", 3),
    ("warthamana", "wrthmna", 3),
])
def test_levenshtein_examples(a, b, d):
    assert levenshtein(a, b) == d == levenshtein_ref(a, b)


short = st.text(alphabet="abcd", max_size=12)


@given(short, short)
def test_levenshtein_matches_oracles(a, b):
    d = levenshtein(a, b)
    assert d == levenshtein_ref(a, b) == levenshtein_recursive(a, b)


@given(short, short, short)
def test_levenshtein_metric(a, b, c):
    assert levenshtein(a, b) == levenshtein(b, a)
    assert (levenshtein(a, b) == 0) == (a == b)
    assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)
    assert abs(len(a) - len(b)) <= levenshtein(a, b) <= max(len(a), len(b))


# --- skeleton ---------------------------------------------------------------

@pytest.mark.parametrize("word,skel", [
    ("warthamana", "wrthmn"), ("wrthmna", "wrthmn"), ("aeiou", ""), ("MaMa", "mm")])
def test_consonant_skeleton(word, skel):
    assert consonant_skeleton(word) == skel


@given(st.text())
def test_skeleton_idempotent(word):
    s = consonant_skeleton(word)
    assert consonant_skeleton(s) == s


# --- classification ---------------------------------------------------------------

def test_classify_examples():
    assert classify_word("the", LEX) is WordLanguage.ENGLISH
    assert classify_word("mama", LEX) is WordLanguage.ROMANIZED_SINHALA
    assert classify_word("Mama", LEX) is WordLanguage.ROMANIZED_SINHALA
    assert classify_word("zzzq", LEX) is WordLanguage.UNKNOWN


def test_classify_vowel_dropped_form():
    assert classify_word("gdra", LEX) is WordLanguage.ROMANIZED_SINHALA


def test_lexicon_must_be_disjoint_and_nonempty():
    with pytest.raises(ValueError):
        RsLexicon(frozenset({"mama"}), frozenset({"mama"}))
    with pytest.raises(ValueError):
        RsLexicon(frozenset(), frozenset({"the"}))


def test_lexicon_build_prefers_english():
    lex = RsLexicon.build(["mama", "the"], ["the"])
    assert classify_word("the", lex) is WordLanguage.ENGLISH


def test_lexicon_from_files(tmp_path):
    rs = tmp_path / "rs.txt"
    rs.write_text("# custom\nkoheda\n")
    lex = load_lexicon(str(rs))
    assert classify_word("koheda", lex) is WordLanguage.ROMANIZED_SINHALA
    assert classify_word("mama", lex) is WordLanguage.UNKNOWN


# --- ratio ---------------------------------------------------------------

def test_ratio_all_sinhala():
    assert en_si_ratio(ch("Mama gedara giya"), LEX) == 0.0


def test_ratio_mixed():
    assert en_si_ratio(ch("the is and of mama gedara"), LEX) == 2.0


def test_ratio_saturates():
    assert en_si_ratio(ch("the cat and the dog"), LEX) == 5.0


def test_ratio_excludes_unknown():
    assert en_si_ratio(ch("mama zzzq the"), LEX) == 1.0


def test_ratio_no_classifiable_words():
    with pytest.raises(NoClassifiableWords):
        en_si_ratio(ch("zzzq qqxz"), LEX)


# --- alignment ---------------------------------------------------------------

def test_worked_chunk_alignment():
    pairs = align_rs_words(ch(CHUNK_1), ch(CHUNK_2), LEX)
    assert len(pairs) == 11
    assert ("warthamana", "wrthmna") in pairs
    assert ("uni", "wuni") in pairs
    assert ("janapathithuma", "jnaphithuma") in pairs


def test_identical_chunks_align_to_self():
    f = rs_pair_features(ch(CHUNK_1), ch(CHUNK_1), LEX)
    assert all(a == b for a, b in f.pairs)
    assert f.aligned_count == 11
    assert (f.total_edit_distance, f.mean_normalized_distance, f.ratio_abs_diff) == (0, 0.0, 0.0)


def test_disjoint_skeletons_do_not_align():
    assert align_rs_words(ch("mama gedara"), ch("kxq zzzq"), LEX) == []


def test_tie_break_prefers_earliest_positions():
    # both "mama" in a tie with the single "mama" in b; the first one wins
    pairs = align_rs_words(ch("mama mama"), ch("mama"), LEX)
    assert pairs == [("mama", "mama")]


def test_worked_chunk_features():
    f = rs_pair_features(ch(CHUNK_1), ch(CHUNK_2), LEX)
    assert f.aligned_count == 11
    assert f.total_edit_distance == 13
    assert 11 <= f.total_edit_distance <= 14
    assert f.total_edit_distance == sum(levenshtein_ref(a, b) for a, b in f.pairs)
    assert f.unaligned_fraction == 0.0


def test_mixed_english_example():
    f = rs_pair_features(ch("mama gedara giya"), ch("mama gedara giya I agree"), LEX)
    assert f.ratio_a == 0.0
    assert f.ratio_b == pytest.approx(2 / 3)
    assert f.ratio_abs_diff == pytest.approx(2 / 3)
    assert f.total_edit_distance == 0


def test_mean_normalized_distance_definition():
    f = rs_pair_features(ch(CHUNK_1), ch(CHUNK_2), LEX)
    expected = sum(levenshtein_ref(a, b) / max(len(a), len(b)) for a, b in f.pairs) / len(f.pairs)
    assert f.mean_normalized_distance == pytest.approx(expected, abs=1e-12)


rs_vocab = ["mama", "gedara", "giya", "mma", "gdra", "gya", "ada", "dina", "bala", "bla", "the", "and",
            "uni", "wuni", "zzq", "pitath", "ptth"]
chunk_text = st.lists(st.sampled_from(rs_vocab), min_size=1, max_size=15).map(" ".join)


@given(chunk_text, chunk_text)
def test_pair_features_symmetric(a, b):
    ca, cb = ch(a), ch(b)
    try:
        f = rs_pair_features(ca, cb, LEX)
    except NoClassifiableWords:
        return
    g = rs_pair_features(cb, ca, LEX)
    assert (f.ratio_a, f.ratio_b) == (g.ratio_b, g.ratio_a)
    for name in ("ratio_abs_diff", "aligned_count", "total_edit_distance",
                 "mean_normalized_distance", "unaligned_fraction"):
        assert getattr(f, name) == getattr(g, name)
    assert 0.0 <= f.mean_normalized_distance <= 1.0
    assert 0.0 <= f.unaligned_fraction <= 1.0


@given(chunk_text, chunk_text)
def test_alignment_injective(a, b):
    words_a = [w for w in a.split() if classify_word(w, LEX) is not WordLanguage.ENGLISH]
    words_b = [w for w in b.split() if classify_word(w, LEX) is not WordLanguage.ENGLISH]
    pairs = align_rs_words(ch(a), ch(b), LEX)
    assert len(pairs) <= min(len(words_a), len(words_b))
    used_a = Counter(p[0] for p in pairs)
    used_b = Counter(p[1] for p in pairs)
    assert all(used_a[w] <= words_a.count(w) for w in used_a)
    assert all(used_b[w] <= words_b.count(w) for w in used_b)
    for x, y in pairs:
        assert levenshtein(consonant_skeleton(x), consonant_skeleton(y)) <= 1
