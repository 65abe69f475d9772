import math

import numpy as np
import pytest

from seqtag import subword as sw
from seqtag.errors import (AlignmentError, ConfigError, ParseError, UsageError,
                           ValidationError)
from seqtag.subword import (PAD, UnigramVocab, align_labels, decode,
                            load_vocab, project_predictions, save_vocab,
                            segment, train_unigram)

from oracles import all_segmentations, best_segmentation


def make_vocab(items):
    """Vocab from {piece: weight}; weights normalized to probabilities."""
    total = sum(items.values())
    return UnigramVocab({p: math.log(w / total) for p, w in items.items()})


# ---------------------------------------------------------------------------
# training


def test_train_two_symbol_corpus_promotes_multichar_piece():
    v = train_unigram("ababab", vocab_size=3, seed=0)
    assert len(v) == 3
    assert "a" in v.pieces and "b" in v.pieces
    (multi,) = [p for p in v.pieces if len(p) > 1]
    assert set(multi) <= {"a", "b"}
    # the learned multi-char piece absorbs nearly all probability mass
    assert math.exp(v.logprob(multi)) > 0.9
    assert math.exp(v.logprob(multi)) > math.exp(v.logprob("a"))
    total = sum(math.exp(lp) for lp in v.pieces.values())
    assert abs(total - 1.0) <= 1e-9


def test_train_vocab_size_equal_alphabet_gives_character_tokenizer():
    v = train_unigram("abc cab bca", vocab_size=3, seed=0)
    assert sorted(v.pieces) == ["a", "b", "c"]
    assert segment(v, "cab") == [sw.MARKER + "c", "a", "b"]


def test_train_vocab_size_below_alphabet_rejected():
    with pytest.raises(ConfigError):
        train_unigram("abcdef", vocab_size=3)
    with pytest.raises(UsageError):
        train_unigram("   \n  ", vocab_size=5)


def test_train_is_deterministic():
    corpus = "evler evlerde evde kedi kediler kedilere sular sulara"
    a = train_unigram(corpus, vocab_size=15, seed=1)
    b = train_unigram(corpus, vocab_size=15, seed=1)
    assert a.pieces == b.pieces
    assert list(a.pieces) == list(b.pieces)


def test_train_covers_every_observed_character():
    rng = np.random.default_rng(80)
    alphabet = "abcdefg"
    words = ["".join(alphabet[i] for i in rng.integers(0, 7, size=rng.integers(1, 9)))
             for _ in range(30)]
    corpus = " ".join(words)
    v = train_unigram(corpus, vocab_size=12, seed=0)
    observed = set("".join(words))
    assert observed <= set(v.pieces)
    assert len(v) <= 12


def test_trained_probabilities_are_normalized():
    for size in (9, 12, 16):
        v = train_unigram("paris parte partizan pazar pazartesi", size, seed=0)
        total = sum(math.exp(lp) for lp in v.pieces.values())
        assert abs(total - 1.0) <= 1e-9
        assert v.target_size == size


def test_frequent_word_becomes_single_piece():
    corpus = ("istanbul " * 50) + "is tan bul dag"
    v = train_unigram(corpus, vocab_size=12, seed=0)
    assert "istanbul" in v.pieces
    assert segment(v, "istanbul") == [sw.MARKER + "istanbul"]


# ---------------------------------------------------------------------------
# segmentation


def test_segment_dominant_whole_word_piece_wins():
    v = make_vocab({"kedi": 100, "k": 1, "e": 1, "d": 1, "i": 1})
    assert segment(v, "kedi") == [sw.MARKER + "kedi"]


def test_segment_round_trip_random_text():
    rng = np.random.default_rng(81)
    v = make_vocab({"a": 4, "b": 3, "c": 2, "ab": 5, "bc": 4, "abc": 6})
    letters = "abcq"  # q is not in the inventory
    for _ in range(100):
        words = []
        for _ in range(int(rng.integers(1, 5))):
            n = int(rng.integers(1, 8))
            words.append("".join(letters[i] for i in rng.integers(0, 4, size=n)))
        text = "  ".join(words)
        pieces = segment(v, text)
        assert decode(v, pieces) == " ".join(text.split())


def test_segment_matches_enumeration_on_small_vocabs():
    rng = np.random.default_rng(82)
    for _ in range(50):
        alphabet = "abc"
        # random inventory of at most 8 pieces, singles always present
        candidates = ["ab", "bc", "ca", "abc", "bca", "aa", "bb", "cab", "abca"]
        chosen = [c for c in candidates if rng.random() < 0.5][:5]
        weights = {ch: float(rng.integers(1, 10)) for ch in alphabet}
        for c in chosen:
            weights[c] = float(rng.integers(1, 20))
        v = make_vocab(weights)
        assert len(v) <= 8
        word = "".join(alphabet[i] for i in rng.integers(0, 3, size=rng.integers(1, 9)))
        pieces = segment(v, word)
        stripped = [p[len(sw.MARKER):] if p.startswith(sw.MARKER) else p
                    for p in pieces]
        got = sum(v.logprob(p) for p in stripped)
        _, want = best_segmentation(word, v.pieces)
        assert abs(got - want) <= 1e-12


def test_segment_marks_exactly_word_initial_pieces():
    v = make_vocab({"an": 3, "kara": 3, "a": 1, "n": 1, "k": 1, "r": 1})
    pieces = segment(v, "ankara kara")
    marked = [p for p in pieces if p.startswith(sw.MARKER)]
    assert len(marked) == 2
    assert pieces[0].startswith(sw.MARKER)


def test_segment_unknown_characters_become_single_pieces():
    v = make_vocab({"ab": 2, "a": 1, "b": 1})
    pieces = segment(v, "aqb")
    stripped = [p.replace(sw.MARKER, "") for p in pieces]
    assert "q" in stripped
    assert "".join(stripped) == "aqb"
    assert decode(v, pieces) == "aqb"


def test_segment_empty_text():
    v = make_vocab({"a": 1})
    assert segment(v, "") == []
    assert segment(v, "   ") == []
    assert decode(v, []) == ""


def test_decode_rejects_unanchored_pieces():
    v = make_vocab({"a": 1})
    with pytest.raises(AlignmentError):
        decode(v, ["a"])


# ---------------------------------------------------------------------------
# label alignment


def test_align_first_piece_takes_tag_rest_pad():
    pieces = [sw.MARKER + "Melih", "a", sw.MARKER + "geldi"]
    out = align_labels(["Meliha", "geldi"], ["B-PERSON", "O"], pieces)
    assert out.labels == ["B-PERSON", PAD, "O"]
    assert out.word_index == [0, 0, 1]
    assert out.is_word_initial == [True, False, True]


def test_align_single_piece_words_copy_tags():
    pieces = [sw.MARKER + "ev", sw.MARKER + "su"]
    out = align_labels(["ev", "su"], ["O", "B-LOC"], pieces)
    assert out.labels == ["O", "B-LOC"]
    assert all(out.is_word_initial)


def test_align_pad_count_is_piece_count_minus_word_count():
    rng = np.random.default_rng(83)
    v = make_vocab({"a": 3, "b": 3, "ab": 4, "ba": 2, "aab": 5})
    for _ in range(50):
        words = ["".join("ab"[i] for i in rng.integers(0, 2, size=rng.integers(1, 7)))
                 for _ in range(int(rng.integers(1, 5)))]
        tags = [f"B-T{k}" for k in range(len(words))]
        pieces = segment(v, " ".join(words))
        out = align_labels(words, tags, pieces)
        assert out.labels.count(PAD) == len(pieces) - len(words)
        # exactly one word-initial piece per word
        for w in range(len(words)):
            initials = [out.is_word_initial[k] for k in range(len(pieces))
                        if out.word_index[k] == w]
            assert initials.count(True) == 1


def test_align_rejects_partition_mismatches():
    words, tags = ["ab"], ["O"]
    with pytest.raises(AlignmentError):
        align_labels(words, tags, ["ab"])  # missing marker on first piece
    with pytest.raises(AlignmentError):
        align_labels(words, tags, [sw.MARKER + "ax"])  # wrong text
    with pytest.raises(AlignmentError):
        align_labels(words, tags, [sw.MARKER + "a"])  # word incomplete
    with pytest.raises(AlignmentError):
        align_labels(words, tags, [sw.MARKER + "ab", sw.MARKER + "c"])  # extra word
    with pytest.raises(AlignmentError):
        align_labels(words, ["O", "O"], [sw.MARKER + "ab"])  # tag count
    with pytest.raises(AlignmentError):
        align_labels(["ab", "c"], ["O", "O"], [sw.MARKER + "ab"])  # word missing
    with pytest.raises(AlignmentError):
        align_labels(words, tags, [sw.MARKER + "ab", sw.MARKER])  # empty piece


def test_project_takes_initial_piece_predictions():
    pieces = [sw.MARKER + "Melih", "a", sw.MARKER + "geldi"]
    aligned = align_labels(["Meliha", "geldi"], ["B-PERSON", "O"], pieces)
    assert project_predictions(aligned, ["B-PER", "I-ORG", "O"]) == ["B-PER", "O"]
    with pytest.raises(AlignmentError):
        project_predictions(aligned, ["O"])


def test_align_then_project_is_identity_on_word_tags():
    rng = np.random.default_rng(84)
    v = make_vocab({"a": 3, "b": 3, "c": 2, "ab": 4, "bc": 3, "abc": 5})
    tag_pool = ["O", "B-PER", "I-PER", "B-LOC"]
    for _ in range(50):
        words = ["".join("abc"[i] for i in rng.integers(0, 3, size=rng.integers(1, 7)))
                 for _ in range(int(rng.integers(1, 6)))]
        tags = [tag_pool[i] for i in rng.integers(0, len(tag_pool), size=len(words))]
        pieces = segment(v, " ".join(words))
        aligned = align_labels(words, tags, pieces)
        filled = [lab if lab is not PAD else "O" for lab in aligned.labels]
        # project from the aligned gold labels themselves
        assert project_predictions(aligned, filled) == tags


# ---------------------------------------------------------------------------
# vocabulary files


def test_vocab_file_round_trip_is_exact(tmp_path):
    v = train_unigram("evler evlerde evde kedi kediler", vocab_size=10, seed=0)
    path = tmp_path / "pieces.vocab"
    save_vocab(v, path)
    loaded = load_vocab(path)
    assert loaded.pieces == v.pieces
    assert list(loaded.pieces) == list(v.pieces)


def test_vocab_file_parse_errors(tmp_path):
    path = tmp_path / "bad.vocab"
    path.write_text("a\t-0.5\nnot a line\n", encoding="utf-8")
    with pytest.raises(ParseError) as err:
        load_vocab(path)
    assert err.value.line == 2
    path.write_text("a\tNOPE\n", encoding="utf-8")
    with pytest.raises(ParseError):
        load_vocab(path)
    path.write_text(f"a\t{math.log(0.5)!r}\na\t{math.log(0.5)!r}\n", encoding="utf-8")
    with pytest.raises(ParseError):
        load_vocab(path)


def test_vocab_rejects_unnormalized_probabilities(tmp_path):
    with pytest.raises(ValidationError):
        UnigramVocab({"a": math.log(0.5), "b": math.log(0.4)})
    with pytest.raises(ValidationError):
        UnigramVocab({})
    path = tmp_path / "unnorm.vocab"
    path.write_text("a\t-0.1\nb\t-0.1\n", encoding="utf-8")
    with pytest.raises(ValidationError):
        load_vocab(path)


def test_enumeration_oracle_spot_check():
    # tiny fixture where the best segmentation is known in closed form
    vocab = {"a": math.log(0.3), "b": math.log(0.2), "ab": math.log(0.5)}
    segs = dict((tuple(p), lp) for p, lp in all_segmentations("ab", vocab))
    assert set(segs) == {("a", "b"), ("ab",)}
    assert abs(segs[("ab",)] - math.log(0.5)) <= 1e-12
    pieces, lp = best_segmentation("ab", vocab)
    assert pieces == ["ab"]
    assert abs(lp - math.log(0.5)) <= 1e-12
