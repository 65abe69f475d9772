"""Sequence tagging models and their on-disk artifact format.

Four model kinds share one interface: a recurrent or attention encoder over
composed token inputs feeds a per-position linear projection to tag scores,
decoded either jointly (structured transition layer) or independently
(per-position argmax).  Trained models round-trip through a versioned zip
artifact with named float64 tensors and UTF-8 vocabulary tables.
"""

from __future__ import annotations

import io
import json
import zipfile
from dataclasses import dataclass, field, asdict

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .crf import (CRFParams, constrained_decode, crf_nll, illegal_mask,
                  linear_decode, linear_nll, viterbi_decode)
from .data import LabeledSentence, TagSet, Vocabulary
from .encoders import (BiLSTM, ComposerConfig, EmbeddingTable, InputComposer,
                       ToyTransformerConfig, TransformerLayer,
                       TransformerParams, transformer_encode, xavier_uniform)
from .errors import ArtifactError, ConfigError, UsageError
from .subword import UnigramVocab, segment, vocab_from_text, vocab_to_text

MODEL_KINDS = ("bilstm-crf", "bilstm-linear", "transformer-crf",
               "transformer-linear")
OPTIMIZER_KINDS = ("sgd-momentum", "adam-decoupled-decay")
ARTIFACT_VERSION = 1


@dataclass
class TrainConfig:
    """Everything a training run needs beyond the corpus itself."""

    model_kind: str = "bilstm-crf"
    composer: ComposerConfig = field(default_factory=ComposerConfig)
    optimizer: str = "sgd-momentum"
    lr: float | None = None  # None: 0.05 for sgd-momentum, 5e-5 for adam
    momentum: float = 0.9
    clip_norm: float = 5.0
    dropout_p: float = 0.5
    epochs: int = 30
    lambda_l2: float = 1e-8
    seed: int = 0
    batch_size: int | None = None  # None: 1 for bilstm kinds, 32 for transformer
    hidden_dim: int = 256  # sentence encoder units per direction
    transformer: ToyTransformerConfig = field(default_factory=ToyTransformerConfig)
    subword_vocab_size: int = 200
    min_count: int = 1
    mask_illegal: bool = False

    def __post_init__(self):
        if self.model_kind not in MODEL_KINDS:
            raise ConfigError(f"unknown model kind {self.model_kind!r}; "
                              f"expected one of {', '.join(MODEL_KINDS)}")
        if self.optimizer not in OPTIMIZER_KINDS:
            raise ConfigError(f"unknown optimizer {self.optimizer!r}; "
                              f"expected one of {', '.join(OPTIMIZER_KINDS)}")
        if self.lr is None:
            self.lr = 0.05 if self.optimizer == "sgd-momentum" else 5e-5
        if self.batch_size is None:
            self.batch_size = 1 if self.model_kind.startswith("bilstm") else 32
        if not self.lr > 0:
            raise ConfigError("lr must be positive")
        if not 0.0 <= self.dropout_p < 1.0:
            raise ConfigError("dropout_p must lie in [0, 1)")
        if self.epochs < 1:
            raise ConfigError("epochs must be at least 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be at least 1")
        if self.clip_norm <= 0:
            raise ConfigError("clip_norm must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise ConfigError("momentum must lie in [0, 1)")
        if self.lambda_l2 < 0:
            raise ConfigError("lambda_l2 must be non-negative")
        if self.hidden_dim < 1:
            raise ConfigError("hidden_dim must be positive")


class SequenceTagger:
    """One trained (or trainable) tagging model.

    BiLSTM kinds run the input composer over every token and encode the
    sentence with a bidirectional recurrent pass; transformer kinds segment
    each word into subword pieces, encode the piece sequence with
    self-attention, and read word features off each word's first piece.
    """

    def __init__(self, kind: str, tags: TagSet, dropout_p: float,
                 mask_illegal: bool, w_out: Tensor, b_out: Tensor,
                 composer: InputComposer | None = None,
                 encoder: BiLSTM | None = None,
                 crf: CRFParams | None = None,
                 tokenizer: UnigramVocab | None = None,
                 transformer_cfg: ToyTransformerConfig | None = None,
                 transformer: TransformerParams | None = None,
                 hidden_dim: int = 0):
        self.kind = kind
        self.tags = tags
        self.dropout_p = dropout_p
        self.mask_illegal = mask_illegal
        self.w_out = w_out
        self.b_out = b_out
        self.composer = composer
        self.encoder = encoder
        self.crf = crf
        self.tokenizer = tokenizer
        self.transformer_cfg = transformer_cfg
        self.transformer = transformer
        self.hidden_dim = hidden_dim
        self._mask = illegal_mask(list(tags)) if mask_illegal else None

    # ------------------------------------------------------------------
    # parameters

    def named_parameters(self) -> dict[str, Tensor]:
        out: dict[str, Tensor] = {}
        if self.composer is not None:
            out.update(self.composer.named_parameters("composer."))
        if self.encoder is not None:
            out.update(self.encoder.named_parameters("encoder."))
        if self.transformer is not None:
            out.update(self.transformer.named_parameters("transformer."))
        out["w_out"] = self.w_out
        out["b_out"] = self.b_out
        if self.crf is not None:
            out.update(self.crf.named_parameters("crf."))
        return out

    def parameters(self) -> list[Tensor]:
        return list(self.named_parameters().values())

    # ------------------------------------------------------------------
    # forward

    def _project(self, h: Tensor) -> Tensor:
        return ad.add(ad.matmul(self.w_out, h), self.b_out)

    def _bilstm_rows(self, words, morphs, training, rng):
        xs = []
        for i, word in enumerate(words):
            analysis = morphs[i] if morphs else None
            pieces = None
            if self.composer.cfg.use_subword:
                pieces = segment(self.tokenizer, word)
            xs.append(self.composer.compose_input(word, analysis, pieces))
        if training and self.dropout_p > 0.0:
            xs = [ad.dropout(x, self.dropout_p, True, rng) for x in xs]
        hs = self.encoder.encode(xs)
        return [self._project(h) for h in hs], list(range(len(words)))

    def _transformer_rows(self, words, training, rng):
        pieces: list[str] = []
        initial: list[int] = []
        for word in words:
            initial.append(len(pieces))
            pieces.extend(segment(self.tokenizer, word))
        table = self.transformer.piece_table
        ids = [table.id_of(p) for p in pieces]
        hidden = transformer_encode(self.transformer_cfg, self.transformer,
                                    ids, training, rng)
        # words whose first piece fell past the length limit get no emissions
        covered = [w for w, pos in enumerate(initial) if pos < len(hidden)]
        rows = [self._project(hidden[initial[w]]) for w in covered]
        return rows, covered

    def emission_rows(self, words: list[str], morphs=None, training: bool = False,
                      rng: np.random.Generator | None = None):
        """Per-word tag score rows plus the word indices they cover."""
        if not words:
            raise UsageError("cannot compute emissions for an empty sentence")
        if training and rng is None:
            raise UsageError("training mode requires an rng for dropout")
        if self.kind.startswith("bilstm"):
            return self._bilstm_rows(words, morphs, training, rng)
        return self._transformer_rows(words, training, rng)

    # ------------------------------------------------------------------
    # loss and decoding

    def loss(self, sentence: LabeledSentence, training: bool = True,
             rng: np.random.Generator | None = None) -> Tensor:
        """Negative log-likelihood of the sentence's gold labeling."""
        rows, covered = self.emission_rows(sentence.surfaces, sentence.morphs,
                                           training, rng)
        emissions = ad.stack(rows)
        tags = sentence.tags
        labels = [self.tags.id_of(tags[w]) for w in covered]
        if self.crf is not None:
            return crf_nll(self.crf, emissions, labels, self._mask)
        return linear_nll(emissions, labels)

    def predict(self, words: list[str], morphs=None,
                mask_illegal: bool | None = None) -> list[str]:
        """Tag strings for one sentence, in word order."""
        if not words:
            return []
        rows, covered = self.emission_rows(words, morphs, training=False)
        emissions = ad.stack(rows)
        if mask_illegal is None:
            mask = self._mask
        else:
            mask = illegal_mask(list(self.tags)) if mask_illegal else None
        if self.crf is not None:
            ids = viterbi_decode(self.crf, emissions, mask)
        elif mask is not None:
            ids = constrained_decode(emissions, mask)
        else:
            ids = linear_decode(emissions)
        out = ["O"] * len(words)
        for w, idx in zip(covered, ids):
            out[w] = self.tags.tag_of(idx)
        return out


def tag_corpus(model: SequenceTagger, sentences: list[LabeledSentence],
               mask_illegal: bool | None = None) -> list[LabeledSentence]:
    return [s.with_tags(model.predict(s.surfaces, s.morphs, mask_illegal))
            for s in sentences]


def _marked_piece_tokens(tokenizer: UnigramVocab) -> list[str]:
    """Embedding entries for every piece in both word-initial and inner form."""
    out = []
    for piece in tokenizer.pieces:
        out.append(tokenizer.marker + piece)
        out.append(piece)
    return out


def build_model(cfg: TrainConfig, vocab: Vocabulary,
                rng: np.random.Generator,
                tokenizer: UnigramVocab | None = None) -> SequenceTagger:
    """Freshly initialized model of the configured kind."""
    tags = vocab.tags
    T = len(tags)
    kind = cfg.model_kind
    needs_tokenizer = kind.startswith("transformer") or cfg.composer.use_subword
    if needs_tokenizer and tokenizer is None:
        raise UsageError(f"model kind {kind!r} with this composer needs a "
                         "subword tokenizer")
    kw = {}
    if kind.startswith("bilstm"):
        piece_tokens = _marked_piece_tokens(tokenizer) if cfg.composer.use_subword else ()
        composer = InputComposer.build(cfg.composer, rng,
                                       word_vocab=vocab.word,
                                       char_vocab=vocab.char,
                                       morph_char_vocab=vocab.morph_char,
                                       piece_vocab=piece_tokens)
        encoder = BiLSTM.init(cfg.composer.output_dim, cfg.hidden_dim, rng)
        feature_dim = 2 * cfg.hidden_dim
        kw.update(composer=composer, encoder=encoder,
                  tokenizer=tokenizer if cfg.composer.use_subword else None)
    else:
        transformer = TransformerParams.init(cfg.transformer,
                                             _marked_piece_tokens(tokenizer), rng)
        feature_dim = cfg.transformer.hidden_units
        kw.update(transformer_cfg=cfg.transformer, transformer=transformer,
                  tokenizer=tokenizer)
    w_out = Tensor(xavier_uniform(rng, T, feature_dim), requires_grad=True)
    b_out = Tensor(np.zeros(T), requires_grad=True)
    crf = CRFParams.init(T, rng) if kind.endswith("-crf") else None
    return SequenceTagger(kind, tags, cfg.dropout_p, cfg.mask_illegal,
                          w_out, b_out, crf=crf, hidden_dim=cfg.hidden_dim, **kw)


# ---------------------------------------------------------------------------
# artifact persistence


def _table_entry(table: EmbeddingTable | None):
    if table is None:
        return None
    return {"vocab": table.vocab, "dim": table.dim,
            "pad_id": table.pad_id, "unk_id": table.unk_id}


def _table_from_entry(entry) -> EmbeddingTable | None:
    if entry is None:
        return None
    return EmbeddingTable({k: int(v) for k, v in entry["vocab"].items()},
                          int(entry["dim"]), int(entry["pad_id"]),
                          int(entry["unk_id"]))


def save_model(model: SequenceTagger, path) -> None:
    """Write the model to a zip artifact at path."""
    named = model.named_parameters()
    manifest = {
        "format_version": ARTIFACT_VERSION,
        "kind": model.kind,
        "tags": list(model.tags),
        "dropout_p": model.dropout_p,
        "mask_illegal": model.mask_illegal,
        "hidden_dim": model.hidden_dim,
        "composer": asdict(model.composer.cfg) if model.composer else None,
        "transformer": asdict(model.transformer_cfg) if model.transformer_cfg else None,
        "tables": {
            "word": _table_entry(model.composer.word_table) if model.composer else None,
            "char": _table_entry(model.composer.char_table) if model.composer else None,
            "morph": _table_entry(model.composer.morph_table) if model.composer else None,
            "piece": _table_entry(model.composer.piece_table) if model.composer else None,
            "transformer_piece": _table_entry(model.transformer.piece_table)
                                 if model.transformer else None,
        },
        "tensors": sorted(named),
    }
    buf = io.BytesIO()
    np.savez(buf, **{name: t.data for name, t in named.items()})
    with zipfile.ZipFile(path, "w", zipfile.ZIP_DEFLATED) as zf:
        zf.writestr("manifest.json",
                    json.dumps(manifest, ensure_ascii=False, indent=1))
        if model.tokenizer is not None:
            zf.writestr("tokenizer.tsv", vocab_to_text(model.tokenizer))
        zf.writestr("tensors.npz", buf.getvalue())


def _skeleton_from_manifest(manifest, tokenizer) -> SequenceTagger:
    rng = np.random.default_rng(0)  # placeholder values, overwritten below
    tags = TagSet(list(manifest["tags"]))
    kind = manifest["kind"]
    tables = manifest["tables"]
    kw = {}
    if kind.startswith("bilstm"):
        ccfg = ComposerConfig(**manifest["composer"])
        composer = InputComposer(
            ccfg,
            word_table=_table_from_entry(tables["word"]),
            char_table=_table_from_entry(tables["char"]),
            morph_table=_table_from_entry(tables["morph"]),
            piece_table=_table_from_entry(tables["piece"]),
            char_bilstm=BiLSTM.init(ccfg.char_dim, ccfg.char_hidden, rng)
                        if ccfg.use_char else None,
            morph_bilstm=BiLSTM.init(ccfg.morph_dim, ccfg.morph_hidden, rng)
                         if ccfg.use_morph else None,
            subword_bilstm=BiLSTM.init(ccfg.subword_dim, ccfg.subword_hidden, rng)
                           if ccfg.use_subword else None)
        hidden_dim = int(manifest["hidden_dim"])
        encoder = BiLSTM.init(ccfg.output_dim, hidden_dim, rng)
        feature_dim = 2 * hidden_dim
        kw.update(composer=composer, encoder=encoder, hidden_dim=hidden_dim,
                  tokenizer=tokenizer if ccfg.use_subword else None)
    else:
        tcfg = ToyTransformerConfig(**manifest["transformer"])
        transformer = TransformerParams(
            piece_table=_table_from_entry(tables["transformer_piece"]),
            positions=Tensor(np.zeros((tcfg.max_len, tcfg.hidden_units)),
                             requires_grad=True),
            layers=[TransformerLayer.init(tcfg, rng)
                    for _ in range(tcfg.num_layers)])
        feature_dim = tcfg.hidden_units
        kw.update(transformer_cfg=tcfg, transformer=transformer,
                  tokenizer=tokenizer)
    T = len(tags)
    w_out = Tensor(np.zeros((T, feature_dim)), requires_grad=True)
    b_out = Tensor(np.zeros(T), requires_grad=True)
    crf = CRFParams.init(T, rng) if kind.endswith("-crf") else None
    return SequenceTagger(kind, tags, float(manifest["dropout_p"]),
                          bool(manifest["mask_illegal"]), w_out, b_out,
                          crf=crf, **kw)


def load_model(path) -> SequenceTagger:
    """Read a model artifact; raises ArtifactError on anything malformed."""
    try:
        with zipfile.ZipFile(path) as zf:
            names = set(zf.namelist())
            if "manifest.json" not in names or "tensors.npz" not in names:
                raise ArtifactError("artifact is missing manifest.json or "
                                    "tensors.npz")
            manifest = json.loads(zf.read("manifest.json").decode("utf-8"))
            tokenizer = None
            if "tokenizer.tsv" in names:
                tokenizer = vocab_from_text(zf.read("tokenizer.tsv").decode("utf-8"))
            npz_bytes = zf.read("tensors.npz")
    except zipfile.BadZipFile as exc:
        raise ArtifactError(f"not a model artifact: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ArtifactError(f"corrupt artifact manifest: {exc}") from exc
    version = manifest.get("format_version")
    if version != ARTIFACT_VERSION:
        raise ArtifactError(f"artifact format version {version!r} is not "
                            f"supported; this build reads version "
                            f"{ARTIFACT_VERSION}")
    try:
        model = _skeleton_from_manifest(manifest, tokenizer)
    except (KeyError, TypeError) as exc:
        raise ArtifactError(f"corrupt artifact manifest: {exc}") from exc
    named = model.named_parameters()
    with np.load(io.BytesIO(npz_bytes)) as arrays:
        stored = set(arrays.files)
        expected = set(named)
        if stored != expected:
            missing = sorted(expected - stored)
            extra = sorted(stored - expected)
            raise ArtifactError(f"artifact tensors do not match the manifest "
                                f"(missing {missing}, unexpected {extra})")
        for name, tensor in named.items():
            arr = arrays[name]
            if arr.shape != tensor.data.shape:
                raise ArtifactError(f"tensor {name!r} has shape {arr.shape}, "
                                    f"expected {tensor.data.shape}")
            tensor.data = arr.astype(np.float64, copy=False)
    return model
