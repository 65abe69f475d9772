"""CoNLL-style corpus reading, BIO2 validation and repair, vocabulary
construction, and deterministic corpus splitting.

File layout: one token per line with whitespace-separated columns
(surface, optional morphological analysis, tag); a blank line ends a
sentence.  Whether the analysis column is present is decided by the first
data row and must then hold for the whole file.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ParseError, UsageError, ValidationError


def tag_is_wellformed(tag: str) -> bool:
    return tag == "O" or (len(tag) >= 3 and tag[0] in "BI" and tag[1] == "-")


@dataclass(frozen=True)
class Token:
    surface: str
    gold_tag: str
    morph_analysis: str | None = None

    def __post_init__(self):
        if not self.surface:
            raise ValidationError("token surface must be non-empty")
        if not tag_is_wellformed(self.gold_tag):
            raise ValidationError(f"malformed tag {self.gold_tag!r}")


@dataclass(frozen=True)
class LabeledSentence:
    tokens: tuple[Token, ...]

    def __post_init__(self):
        if not self.tokens:
            raise ValidationError("sentence must be non-empty")
        object.__setattr__(self, "tokens", tuple(self.tokens))

    def __len__(self):
        return len(self.tokens)

    @property
    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]

    @property
    def tags(self) -> list[str]:
        return [t.gold_tag for t in self.tokens]

    @property
    def morphs(self) -> list[str | None]:
        return [t.morph_analysis for t in self.tokens]

    def with_tags(self, tags: list[str]) -> "LabeledSentence":
        if len(tags) != len(self.tokens):
            raise UsageError(f"{len(tags)} tags for {len(self.tokens)} tokens")
        return LabeledSentence(tuple(
            Token(t.surface, tag, t.morph_analysis)
            for t, tag in zip(self.tokens, tags)))


class TagSet:
    """Closed, ordered tag inventory; every I-X needs a matching B-X."""

    def __init__(self, tags: list[str]):
        if len(set(tags)) != len(tags):
            raise ValidationError("duplicate tags")
        if "O" not in tags:
            raise ValidationError("tag set must contain O")
        for tag in tags:
            if not tag_is_wellformed(tag):
                raise ValidationError(f"malformed tag {tag!r}")
            if tag.startswith("I-") and f"B-{tag[2:]}" not in tags:
                raise ValidationError(f"{tag} has no matching B-{tag[2:]}")
        self.tags = list(tags)
        self._index = {t: i for i, t in enumerate(tags)}

    def __len__(self):
        return len(self.tags)

    def __iter__(self):
        return iter(self.tags)

    def __contains__(self, tag):
        return tag in self._index

    def __eq__(self, other):
        return isinstance(other, TagSet) and self.tags == other.tags

    def id_of(self, tag: str) -> int:
        if tag not in self._index:
            raise UsageError(f"tag {tag!r} not in tag set")
        return self._index[tag]

    def tag_of(self, idx: int) -> str:
        if not 0 <= idx < len(self.tags):
            raise UsageError(f"tag id {idx} out of range")
        return self.tags[idx]


# ---------------------------------------------------------------------------
# parsing and serialization


def parse_conll(lines) -> list[LabeledSentence]:
    """Parse an iterable of text lines; raises ParseError with the offending
    line number on malformed input."""
    if isinstance(lines, str):
        lines = lines.splitlines()
    sentences: list[LabeledSentence] = []
    current: list[Token] = []
    has_morph: bool | None = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            if current:
                sentences.append(LabeledSentence(tuple(current)))
                current = []
            continue
        fields = line.split()
        if len(fields) < 2:
            raise ParseError(f"expected at least 2 columns, "
                             f"got {len(fields)}", line=lineno)
        if len(fields) > 3:
            raise ParseError(f"expected at most 3 columns, "
                             f"got {len(fields)}", line=lineno)
        if has_morph is None:
            has_morph = len(fields) == 3
        if (len(fields) == 3) != has_morph:
            raise ParseError(f"inconsistent column count "
                             f"(file uses {3 if has_morph else 2} columns)",
                             line=lineno)
        tag = fields[-1]
        if not tag_is_wellformed(tag):
            raise ParseError(f"unknown tag {tag!r}", line=lineno)
        morph = fields[1] if has_morph else None
        current.append(Token(fields[0], tag, morph))
    if current:
        sentences.append(LabeledSentence(tuple(current)))
    return sentences


def load_conll(path) -> list[LabeledSentence]:
    with open(path, encoding="utf-8") as fh:
        return parse_conll(fh)


def serialize_conll(sentences: list[LabeledSentence]) -> str:
    """Inverse of parse_conll (tab-separated; blank line between sentences)."""
    has_morph = {t.morph_analysis is not None
                 for s in sentences for t in s.tokens}
    if len(has_morph) > 1:
        raise UsageError("cannot serialize a corpus that mixes rows with and "
                         "without morphological analyses")
    blocks = []
    for s in sentences:
        rows = []
        for t in s.tokens:
            if t.morph_analysis is None:
                rows.append(f"{t.surface}\t{t.gold_tag}")
            else:
                rows.append(f"{t.surface}\t{t.morph_analysis}\t{t.gold_tag}")
        blocks.append("\n".join(rows))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


# ---------------------------------------------------------------------------
# BIO2 validation


def validate_bio2(sentence: LabeledSentence, mode: str = "strict") -> LabeledSentence:
    """Check the I-follows-same-type rule; repair mode rewrites bad I-X to B-X."""
    if mode not in ("strict", "repair"):
        raise ConfigError(f"unknown validation mode {mode!r}")
    fixed = []
    prev = "O"
    for i, tag in enumerate(sentence.tags):
        if tag.startswith("I-"):
            kind = tag[2:]
            if prev not in (f"B-{kind}", f"I-{kind}"):
                if mode == "strict":
                    raise ValidationError(
                        f"orphan {tag} at token index {i} (follows {prev})")
                tag = f"B-{kind}"
        fixed.append(tag)
        prev = tag
    return sentence.with_tags(fixed)


def split_long_sentence(sentence: LabeledSentence, max_len: int = 512) -> list[LabeledSentence]:
    """Split an over-long sentence into pieces of at most max_len tokens.

    The cut lands on the O tag nearest the limit; failing that, on an entity
    boundary; failing that, hard at the limit.
    """
    if max_len < 1:
        raise ConfigError("max_len must be positive")
    out = []
    rest = list(sentence.tokens)
    while len(rest) > max_len:
        cut = None
        for i in range(max_len - 1, -1, -1):
            if rest[i].gold_tag == "O":
                cut = i + 1
                break
        if cut is None:
            for i in range(max_len - 1, 0, -1):
                if not rest[i].gold_tag.startswith("I-"):
                    cut = i
                    break
        if cut is None:
            cut = max_len
        out.append(LabeledSentence(tuple(rest[:cut])))
        rest = rest[cut:]
    if rest:
        out.append(LabeledSentence(tuple(rest)))
    return out


# ---------------------------------------------------------------------------
# splitting and vocabularies


@dataclass
class CorpusSplit:
    train: list[LabeledSentence]
    valid: list[LabeledSentence]
    test: list[LabeledSentence]
    seed: int


def split_corpus(sentences: list[LabeledSentence], valid_fraction: float = 0.2,
                 seed: int = 0, test: list[LabeledSentence] = ()) -> CorpusSplit:
    """Deterministic shuffle split of sentences into train and valid parts."""
    if not 0.0 < valid_fraction < 1.0:
        raise ConfigError(f"valid fraction {valid_fraction} outside (0, 1)")
    n = len(sentences)
    n_valid = int(round(n * valid_fraction))
    if n_valid == 0 or n - n_valid == 0:
        raise UsageError(f"{n} sentences cannot produce non-empty splits "
                         f"at fraction {valid_fraction}")
    order = np.random.default_rng(seed).permutation(n)
    valid = [sentences[i] for i in order[:n_valid]]
    train = [sentences[i] for i in order[n_valid:]]
    return CorpusSplit(train=train, valid=valid, test=list(test), seed=seed)


def _frequency_order(counts: dict, first_seen: dict) -> list:
    return sorted(counts, key=lambda k: (-counts[k], first_seen[k]))


@dataclass
class Vocabulary:
    word: dict[str, int]
    char: dict[str, int]
    morph_char: dict[str, int]
    tags: TagSet
    word_counts: dict[str, int] = field(default_factory=dict)


def build_vocab(sentences: list[LabeledSentence], min_count: int = 1) -> Vocabulary:
    """Frequency-ordered vocabularies with pad=0 / unk=1 reserved, plus the
    tag inventory.  min_count filters word types only."""
    if not sentences:
        raise UsageError("cannot build vocabulary from an empty corpus")
    word_counts, char_counts, morph_counts, tag_counts = {}, {}, {}, {}
    word_first, char_first, morph_first, tag_first = {}, {}, {}, {}
    pos = 0
    for s in sentences:
        for t in s.tokens:
            pos += 1
            word_counts[t.surface] = word_counts.get(t.surface, 0) + 1
            word_first.setdefault(t.surface, pos)
            for ch in t.surface:
                char_counts[ch] = char_counts.get(ch, 0) + 1
                char_first.setdefault(ch, pos)
            if t.morph_analysis:
                for ch in t.morph_analysis:
                    morph_counts[ch] = morph_counts.get(ch, 0) + 1
                    morph_first.setdefault(ch, pos)
            tag_counts[t.gold_tag] = tag_counts.get(t.gold_tag, 0) + 1
            tag_first.setdefault(t.gold_tag, pos)

    def reserved_map(counts, first, minimum=1):
        vocab = {"<pad>": 0, "<unk>": 1}
        for key in _frequency_order(counts, first):
            if counts[key] >= minimum:
                vocab[key] = len(vocab)
        return vocab

    tag_list = _frequency_order(tag_counts, tag_first)
    if "O" not in tag_list:
        tag_list.append("O")
    # a missing B-X for a seen I-X means the data is BIO2-invalid; TagSet
    # surfaces that here
    tags = TagSet(tag_list)
    return Vocabulary(word=reserved_map(word_counts, word_first, min_count),
                      char=reserved_map(char_counts, char_first),
                      morph_char=reserved_map(morph_counts, morph_first),
                      tags=tags,
                      word_counts=dict(word_counts))
