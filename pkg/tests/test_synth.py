import pytest

from seqtag.data import parse_conll, serialize_conll, validate_bio2
from seqtag.errors import ConfigError
from seqtag.synth import generate_corpus

from oracles import naive_spans


def test_generation_is_deterministic_under_a_seed():
    a = generate_corpus(50, seed=7)
    b = generate_corpus(50, seed=7)
    assert [s.surfaces for s in a] == [s.surfaces for s in b]
    assert [s.tags for s in a] == [s.tags for s in b]
    assert [s.morphs for s in a] == [s.morphs for s in b]


def test_different_seeds_give_different_corpora():
    a = generate_corpus(50, seed=1)
    b = generate_corpus(50, seed=2)
    assert [s.surfaces for s in a] != [s.surfaces for s in b]


def test_requested_size_is_honored():
    for n in (1, 17, 500):
        assert len(generate_corpus(n, seed=0)) == n
    with pytest.raises(ConfigError):
        generate_corpus(0, seed=0)


def test_every_sentence_is_valid_bio2():
    for sentence in generate_corpus(300, seed=3):
        validate_bio2(sentence, mode="strict")


def test_entity_types_are_the_expected_three():
    types = set()
    for sentence in generate_corpus(400, seed=5):
        for etype, _, _ in naive_spans(sentence.tags):
            types.add(etype)
    assert types == {"PERSON", "LOCATION", "ORGANIZATION"}


def test_every_token_carries_a_morph_analysis():
    for sentence in generate_corpus(40, seed=9):
        for token in sentence.tokens:
            assert token.morph_analysis


def test_proper_noun_marking_separates_entities_from_fillers():
    for sentence in generate_corpus(200, seed=11):
        for token in sentence.tokens:
            if token.gold_tag == "O":
                assert "+Prop" not in token.morph_analysis
            else:
                assert "+Prop" in token.morph_analysis


def test_sentences_end_with_a_period():
    for sentence in generate_corpus(60, seed=13):
        assert sentence.surfaces[-1] == "."


def test_corpus_round_trips_through_conll_text():
    corpus = generate_corpus(30, seed=4)
    back = parse_conll(serialize_conll(corpus))
    assert [s.surfaces for s in back] == [s.surfaces for s in corpus]
    assert [s.tags for s in back] == [s.tags for s in corpus]
    assert [s.morphs for s in back] == [s.morphs for s in corpus]


def test_corpus_mixes_entity_bearing_and_plain_sentences():
    corpus = generate_corpus(300, seed=8)
    with_entities = sum(1 for s in corpus if any(t != "O" for t in s.tags))
    assert 0 < with_entities < len(corpus)
