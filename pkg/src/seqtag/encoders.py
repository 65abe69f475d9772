"""Embedding composition and sequence encoders.

A token can be represented by up to four concatenated sources: a word vector,
a character-BiLSTM summary, a morphological-analysis-BiLSTM summary, and a
subword-piece-BiLSTM summary.  Sentences are then encoded either by a
bidirectional LSTM or by a small trainable transformer encoder.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import ConfigError, ShapeError, UsageError

log = logging.getLogger(__name__)


def xavier_uniform(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    limit = math.sqrt(6.0 / (rows + cols))
    return rng.uniform(-limit, limit, size=(rows, cols))


# ---------------------------------------------------------------------------
# embedding tables


class EmbeddingTable:
    """Token-to-vector map with reserved padding and unknown entries."""

    def __init__(self, vocab: dict[str, int], dim: int, pad_id: int, unk_id: int):
        size = max(vocab.values()) + 1 if vocab else 0
        size = max(size, pad_id + 1, unk_id + 1)
        if pad_id == unk_id:
            raise ConfigError("pad and unk ids must be distinct")
        self.vocab = vocab
        self.dim = dim
        self.pad_id = pad_id
        self.unk_id = unk_id
        self.matrix = Tensor(np.zeros((size, dim)), requires_grad=True)

    @classmethod
    def from_tokens(cls, tokens, dim: int) -> "EmbeddingTable":
        """Table over the given token iterable; ids 0/1 reserved for pad/unk."""
        vocab = {"<pad>": 0, "<unk>": 1}
        for tok in tokens:
            if tok not in vocab:
                vocab[tok] = len(vocab)
        return cls(vocab, dim, pad_id=0, unk_id=1)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def id_of(self, token: str) -> int:
        return self.vocab.get(token, self.unk_id)

    def embed(self, token: str) -> Tensor:
        return ad.lookup(self.matrix, self.id_of(token))


def load_pretrained_vectors(table: EmbeddingTable, lines, rng: np.random.Generator) -> float:
    """Copy vectors for vocabulary hits from a word2vec-style text stream.

    The stream holds an optional "V d" header line, then one token per line
    followed by its components.  Misses keep their random initialization.
    Returns the fraction of vocabulary entries found in the file.
    """
    hits = 0
    lookup_total = len(table.vocab)
    first = True
    for raw in lines:
        parts = raw.rstrip("\n").split(" ")
        if first:
            first = False
            if len(parts) == 2:
                try:
                    int(parts[0]), int(parts[1])
                    if int(parts[1]) != table.dim:
                        raise ConfigError(
                            f"pretrained dimension {parts[1]} != table dimension {table.dim}")
                    continue
                except ValueError:
                    pass
        if not parts or parts == [""]:
            continue
        token, comps = parts[0], parts[1:]
        if len(comps) != table.dim:
            raise ConfigError(
                f"pretrained vector for {token!r} has {len(comps)} components, "
                f"table dimension is {table.dim}")
        idx = table.vocab.get(token)
        if idx is not None:
            table.matrix.data[idx] = np.array([float(c) for c in comps])
            hits += 1
    return hits / lookup_total if lookup_total else 0.0


def init_embeddings(table: EmbeddingTable, source: str, rng: np.random.Generator,
                    path=None) -> EmbeddingTable:
    """Initialize the table in place: uniform [-0.1, 0.1], optionally
    overwritten by pretrained vectors for vocabulary hits."""
    table.matrix.data[...] = rng.uniform(-0.1, 0.1, size=table.matrix.shape)
    if source == "random":
        return table
    if source == "pretrained-file":
        if path is None:
            raise ConfigError("pretrained-file init requires a path")
        with open(path, encoding="utf-8") as fh:
            rate = load_pretrained_vectors(table, fh, rng)
        log.info("pretrained embeddings: %.1f%% vocabulary hit rate", 100.0 * rate)
        return table
    raise ConfigError(f"unknown embedding source {source!r}")


# ---------------------------------------------------------------------------
# LSTM


@dataclass
class LSTMCellParams:
    """Gate weights of one LSTM direction.

    The forget gate keeps both an input-side and a hidden-side bias so all four
    gates share the same shape, with the hidden-side one carrying the usual
    init of 1.
    """

    W_ii: Tensor
    W_hi: Tensor
    W_if: Tensor
    W_hf: Tensor
    W_ig: Tensor
    W_hg: Tensor
    W_io: Tensor
    W_ho: Tensor
    b_ii: Tensor
    b_hi: Tensor
    b_if: Tensor
    b_hf: Tensor
    b_ig: Tensor
    b_hg: Tensor
    b_io: Tensor
    b_ho: Tensor
    hidden_dim: int

    @classmethod
    def init(cls, input_dim: int, hidden_dim: int, rng: np.random.Generator) -> "LSTMCellParams":
        def w_in():
            return Tensor(xavier_uniform(rng, hidden_dim, input_dim), requires_grad=True)

        def w_hid():
            return Tensor(xavier_uniform(rng, hidden_dim, hidden_dim), requires_grad=True)

        def b(value=0.0):
            return Tensor(np.full(hidden_dim, value), requires_grad=True)

        return cls(W_ii=w_in(), W_hi=w_hid(), W_if=w_in(), W_hf=w_hid(),
                   W_ig=w_in(), W_hg=w_hid(), W_io=w_in(), W_ho=w_hid(),
                   b_ii=b(), b_hi=b(), b_if=b(), b_hf=b(1.0),
                   b_ig=b(), b_hg=b(), b_io=b(), b_ho=b(),
                   hidden_dim=hidden_dim)

    def named_parameters(self, prefix: str = "") -> dict[str, Tensor]:
        names = ("W_ii", "W_hi", "W_if", "W_hf", "W_ig", "W_hg", "W_io", "W_ho",
                 "b_ii", "b_hi", "b_if", "b_hf", "b_ig", "b_hg", "b_io", "b_ho")
        return {prefix + n: getattr(self, n) for n in names}


def lstm_step(p: LSTMCellParams, x_t: Tensor, h_prev: Tensor, c_prev: Tensor):
    """One LSTM cell update; returns (h_t, c_t)."""
    if x_t.shape != (p.W_ii.shape[1],):
        raise ShapeError(f"lstm_step input has shape {x_t.shape}, "
                         f"cell expects ({p.W_ii.shape[1]},)")
    if h_prev.shape != (p.hidden_dim,) or c_prev.shape != (p.hidden_dim,):
        raise ShapeError(f"lstm_step state shapes {h_prev.shape}/{c_prev.shape} "
                         f"do not match hidden dim {p.hidden_dim}")
    i = ad.sigmoid(p.W_ii @ x_t + p.b_ii + p.W_hi @ h_prev + p.b_hi)
    f = ad.sigmoid(p.W_if @ x_t + p.b_if + p.W_hf @ h_prev + p.b_hf)
    g = ad.tanh(p.W_ig @ x_t + p.b_ig + p.W_hg @ h_prev + p.b_hg)
    o = ad.sigmoid(p.W_io @ x_t + p.b_io + p.W_ho @ h_prev + p.b_ho)
    c_t = f * c_prev + i * g
    h_t = o * ad.tanh(c_t)
    return h_t, c_t


def lstm_run(p: LSTMCellParams, xs: list[Tensor]) -> list[Tensor]:
    """Hidden states over the sequence, zero initial state."""
    h = Tensor(np.zeros(p.hidden_dim))
    c = Tensor(np.zeros(p.hidden_dim))
    out = []
    for x in xs:
        h, c = lstm_step(p, x, h, c)
        out.append(h)
    return out


def bilstm_encode(fwd: LSTMCellParams, bwd: LSTMCellParams, xs: list[Tensor]) -> list[Tensor]:
    """Per-position concatenation of forward and backward hidden states."""
    if not xs:
        raise UsageError("bilstm_encode requires a non-empty sequence")
    hs_f = lstm_run(fwd, xs)
    hs_b = lstm_run(bwd, xs[::-1])[::-1]
    return [ad.concat([hf, hb]) for hf, hb in zip(hs_f, hs_b)]


@dataclass
class BiLSTM:
    fwd: LSTMCellParams
    bwd: LSTMCellParams

    @classmethod
    def init(cls, input_dim: int, hidden_dim: int, rng: np.random.Generator) -> "BiLSTM":
        return cls(fwd=LSTMCellParams.init(input_dim, hidden_dim, rng),
                   bwd=LSTMCellParams.init(input_dim, hidden_dim, rng))

    def encode(self, xs: list[Tensor]) -> list[Tensor]:
        return bilstm_encode(self.fwd, self.bwd, xs)

    def final_states(self, xs: list[Tensor]) -> Tensor:
        """concat(last forward hidden, last backward hidden)."""
        if not xs:
            raise UsageError("empty sequence")
        h_f = lstm_run(self.fwd, xs)[-1]
        h_b = lstm_run(self.bwd, xs[::-1])[-1]
        return ad.concat([h_f, h_b])

    def named_parameters(self, prefix: str = "") -> dict[str, Tensor]:
        out = self.fwd.named_parameters(prefix + "fwd.")
        out.update(self.bwd.named_parameters(prefix + "bwd."))
        return out


# ---------------------------------------------------------------------------
# per-token composers


def char_compose(char_table: EmbeddingTable, char_bilstm: BiLSTM, word: str) -> Tensor:
    """Word vector from its characters: BiLSTM final states over char embeddings."""
    if not word:
        raise UsageError("char_compose requires a non-empty word")
    return char_bilstm.final_states([char_table.embed(ch) for ch in word])


def morph_compose(char_table: EmbeddingTable, morph_bilstm: BiLSTM, analysis: str) -> Tensor:
    """Same shape as char_compose, run over the full morphological analysis string."""
    if not analysis:
        raise UsageError("morph_compose requires a non-empty analysis")
    return morph_bilstm.final_states([char_table.embed(ch) for ch in analysis])


def subword_compose(piece_table: EmbeddingTable, sw_bilstm: BiLSTM,
                    pieces: list[str]) -> Tensor:
    """Word vector from its subword pieces."""
    if not pieces:
        raise UsageError("subword_compose requires a non-empty piece list")
    return sw_bilstm.final_states([piece_table.embed(p) for p in pieces])


@dataclass
class ComposerConfig:
    use_word: bool = True
    use_char: bool = True
    use_morph: bool = False
    use_subword: bool = False
    word_dim: int = 300
    subword_dim: int = 300
    char_dim: int = 200
    morph_dim: int = 200
    char_hidden: int = 100
    morph_hidden: int = 100
    subword_hidden: int = 150

    def __post_init__(self):
        if not (self.use_word or self.use_char or self.use_morph or self.use_subword):
            raise ConfigError("at least one embedding source must be enabled")

    @property
    def output_dim(self) -> int:
        total = 0
        if self.use_word:
            total += self.word_dim
        if self.use_char:
            total += 2 * self.char_hidden
        if self.use_morph:
            total += 2 * self.morph_hidden
        if self.use_subword:
            total += 2 * self.subword_hidden
        return total


class InputComposer:
    """Bundles the embedding tables and composer BiLSTMs for one model.

    compose_input concatenates the enabled sources in the fixed order
    word, char, morph, subword.
    """

    def __init__(self, cfg: ComposerConfig, word_table=None, char_table=None,
                 morph_table=None, piece_table=None, char_bilstm=None,
                 morph_bilstm=None, subword_bilstm=None):
        self.cfg = cfg
        self.word_table = word_table
        self.char_table = char_table
        self.morph_table = morph_table
        self.piece_table = piece_table
        self.char_bilstm = char_bilstm
        self.morph_bilstm = morph_bilstm
        self.subword_bilstm = subword_bilstm

    @classmethod
    def build(cls, cfg: ComposerConfig, rng: np.random.Generator, word_vocab=(),
              char_vocab=(), morph_char_vocab=(), piece_vocab=()) -> "InputComposer":
        kw = {}
        if cfg.use_word:
            kw["word_table"] = EmbeddingTable.from_tokens(word_vocab, cfg.word_dim)
            init_embeddings(kw["word_table"], "random", rng)
        if cfg.use_char:
            kw["char_table"] = EmbeddingTable.from_tokens(char_vocab, cfg.char_dim)
            init_embeddings(kw["char_table"], "random", rng)
            kw["char_bilstm"] = BiLSTM.init(cfg.char_dim, cfg.char_hidden, rng)
        if cfg.use_morph:
            kw["morph_table"] = EmbeddingTable.from_tokens(morph_char_vocab, cfg.morph_dim)
            init_embeddings(kw["morph_table"], "random", rng)
            kw["morph_bilstm"] = BiLSTM.init(cfg.morph_dim, cfg.morph_hidden, rng)
        if cfg.use_subword:
            kw["piece_table"] = EmbeddingTable.from_tokens(piece_vocab, cfg.subword_dim)
            init_embeddings(kw["piece_table"], "random", rng)
            kw["subword_bilstm"] = BiLSTM.init(cfg.subword_dim, cfg.subword_hidden, rng)
        return cls(cfg, **kw)

    def compose_input(self, word: str, analysis: str | None = None,
                      pieces: list[str] | None = None) -> Tensor:
        parts = []
        if self.cfg.use_word:
            parts.append(self.word_table.embed(word))
        if self.cfg.use_char:
            parts.append(char_compose(self.char_table, self.char_bilstm, word))
        if self.cfg.use_morph:
            # tokens without an analysis fall back to their surface string
            parts.append(morph_compose(self.morph_table, self.morph_bilstm,
                                       analysis or word))
        if self.cfg.use_subword:
            if not pieces:
                raise UsageError("subword source enabled but no pieces supplied")
            parts.append(subword_compose(self.piece_table, self.subword_bilstm, pieces))
        return parts[0] if len(parts) == 1 else ad.concat(parts)

    def named_parameters(self, prefix: str = "") -> dict[str, Tensor]:
        out = {}
        if self.cfg.use_word:
            out[prefix + "word_table"] = self.word_table.matrix
        if self.cfg.use_char:
            out[prefix + "char_table"] = self.char_table.matrix
            out.update(self.char_bilstm.named_parameters(prefix + "char_bilstm."))
        if self.cfg.use_morph:
            out[prefix + "morph_table"] = self.morph_table.matrix
            out.update(self.morph_bilstm.named_parameters(prefix + "morph_bilstm."))
        if self.cfg.use_subword:
            out[prefix + "piece_table"] = self.piece_table.matrix
            out.update(self.subword_bilstm.named_parameters(prefix + "subword_bilstm."))
        return out


# ---------------------------------------------------------------------------
# toy transformer encoder


@dataclass
class ToyTransformerConfig:
    num_layers: int = 2
    num_heads: int = 2
    hidden_units: int = 64
    ff_units: int = 256
    max_len: int = 128
    dropout_p: float = 0.1

    def __post_init__(self):
        if self.hidden_units % self.num_heads != 0:
            raise ConfigError(
                f"hidden_units {self.hidden_units} not divisible by "
                f"num_heads {self.num_heads}")


@dataclass
class TransformerLayer:
    Wq: list  # one (head_dim, hidden) matrix per head
    Wk: list
    Wv: list
    Wo: Tensor
    ln1_gain: Tensor
    ln1_bias: Tensor
    W_ff1: Tensor
    b_ff1: Tensor
    W_ff2: Tensor
    b_ff2: Tensor
    ln2_gain: Tensor
    ln2_bias: Tensor

    @classmethod
    def init(cls, cfg: ToyTransformerConfig, rng: np.random.Generator) -> "TransformerLayer":
        d, heads = cfg.hidden_units, cfg.num_heads
        dk = d // heads

        def mat(rows, cols):
            return Tensor(xavier_uniform(rng, rows, cols), requires_grad=True)

        return cls(
            Wq=[mat(dk, d) for _ in range(heads)],
            Wk=[mat(dk, d) for _ in range(heads)],
            Wv=[mat(dk, d) for _ in range(heads)],
            Wo=mat(d, d),
            ln1_gain=Tensor(np.ones(d), requires_grad=True),
            ln1_bias=Tensor(np.zeros(d), requires_grad=True),
            W_ff1=mat(cfg.ff_units, d),
            b_ff1=Tensor(np.zeros(cfg.ff_units), requires_grad=True),
            W_ff2=mat(d, cfg.ff_units),
            b_ff2=Tensor(np.zeros(d), requires_grad=True),
            ln2_gain=Tensor(np.ones(d), requires_grad=True),
            ln2_bias=Tensor(np.zeros(d), requires_grad=True),
        )

    def named_parameters(self, prefix: str = "") -> dict[str, Tensor]:
        out = {}
        for h in range(len(self.Wq)):
            out[f"{prefix}Wq.{h}"] = self.Wq[h]
            out[f"{prefix}Wk.{h}"] = self.Wk[h]
            out[f"{prefix}Wv.{h}"] = self.Wv[h]
        for name in ("Wo", "ln1_gain", "ln1_bias", "W_ff1", "b_ff1",
                     "W_ff2", "b_ff2", "ln2_gain", "ln2_bias"):
            out[prefix + name] = getattr(self, name)
        return out


@dataclass
class TransformerParams:
    piece_table: EmbeddingTable
    positions: Tensor  # (max_len, hidden) learned positional embeddings
    layers: list = field(default_factory=list)

    @classmethod
    def init(cls, cfg: ToyTransformerConfig, piece_vocab, rng: np.random.Generator) -> "TransformerParams":
        table = EmbeddingTable.from_tokens(piece_vocab, cfg.hidden_units)
        init_embeddings(table, "random", rng)
        positions = Tensor(rng.uniform(-0.1, 0.1, size=(cfg.max_len, cfg.hidden_units)),
                           requires_grad=True)
        layers = [TransformerLayer.init(cfg, rng) for _ in range(cfg.num_layers)]
        return cls(piece_table=table, positions=positions, layers=layers)

    def named_parameters(self, prefix: str = "") -> dict[str, Tensor]:
        out = {prefix + "piece_table": self.piece_table.matrix,
               prefix + "positions": self.positions}
        for i, layer in enumerate(self.layers):
            out.update(layer.named_parameters(f"{prefix}layer{i}."))
        return out


def softmax_rows(x: Tensor) -> Tensor:
    """Row-wise softmax of a matrix via the stable log-sum-exp primitive."""
    n = x.shape[0]
    lse = ad.log_sum_exp(x, axis=1)
    shifted = x - ad.broadcast_to(ad.reshape(lse, (n, 1)), x.shape)
    return ad.exp(shifted)


def gelu(x: Tensor) -> Tensor:
    """tanh approximation of the Gaussian error linear unit."""
    cubed = x * x * x
    inner = ad.scale(x + ad.scale(cubed, 0.044715), math.sqrt(2.0 / math.pi))
    one = Tensor(np.ones(x.shape))
    return ad.scale(x * (ad.tanh(inner) + one), 0.5)


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    """Row-wise layer normalization of an (n, d) matrix."""
    n, d = x.shape
    mean = ad.scale(ad.tensor_sum(x, axis=1), 1.0 / d)
    centered = x - ad.broadcast_to(ad.reshape(mean, (n, 1)), (n, d))
    var = ad.scale(ad.tensor_sum(centered * centered, axis=1), 1.0 / d)
    var_eps = var + Tensor(np.full(n, eps))
    inv_std = ad.exp(ad.scale(ad.log(var_eps), -0.5))
    normed = centered * ad.broadcast_to(ad.reshape(inv_std, (n, 1)), (n, d))
    gain_b = ad.broadcast_to(ad.reshape(gain, (1, d)), (n, d))
    bias_b = ad.broadcast_to(ad.reshape(bias, (1, d)), (n, d))
    return normed * gain_b + bias_b


def multi_head_attention(layer: TransformerLayer, x: Tensor):
    """Scaled dot-product self-attention over the rows of x.

    Returns the projected output and one (n, n) attention-weight matrix per
    head; weight rows sum to one.
    """
    n = x.shape[0]
    heads_out, weights = [], []
    for Wq, Wk, Wv in zip(layer.Wq, layer.Wk, layer.Wv):
        q = x @ ad.transpose(Wq)  # (n, dk)
        k = x @ ad.transpose(Wk)
        v = x @ ad.transpose(Wv)
        dk = q.shape[1]
        scores = ad.scale(q @ ad.transpose(k), 1.0 / math.sqrt(dk))
        attn = softmax_rows(scores)
        heads_out.append(attn @ v)
        weights.append(attn)
    combined = heads_out[0] if len(heads_out) == 1 else ad.concat(heads_out, axis=1)
    return combined @ ad.transpose(layer.Wo), weights


def transformer_block(layer: TransformerLayer, x: Tensor, dropout_p: float,
                      training: bool, rng) -> Tensor:
    attn_out, _ = multi_head_attention(layer, x)
    attn_out = ad.dropout(attn_out, dropout_p, training, rng)
    x = layer_norm(x + attn_out, layer.ln1_gain, layer.ln1_bias)
    n = x.shape[0]
    b1 = ad.broadcast_to(ad.reshape(layer.b_ff1, (1, layer.b_ff1.size)), (n, layer.b_ff1.size))
    b2 = ad.broadcast_to(ad.reshape(layer.b_ff2, (1, layer.b_ff2.size)), (n, layer.b_ff2.size))
    ff = gelu(x @ ad.transpose(layer.W_ff1) + b1) @ ad.transpose(layer.W_ff2) + b2
    ff = ad.dropout(ff, dropout_p, training, rng)
    return layer_norm(x + ff, layer.ln2_gain, layer.ln2_bias)


def transformer_encode(cfg: ToyTransformerConfig, params: TransformerParams,
                       piece_ids: list[int], training: bool = False,
                       rng: np.random.Generator | None = None) -> list[Tensor]:
    """Encode a piece-id sequence; returns one hidden vector per piece.

    Sequences longer than max_len are truncated with a warning.
    """
    if not piece_ids:
        raise UsageError("transformer_encode requires a non-empty sequence")
    if len(piece_ids) > cfg.max_len:
        log.warning("sequence of %d pieces truncated to max_len %d",
                    len(piece_ids), cfg.max_len)
        piece_ids = piece_ids[:cfg.max_len]
    if training and rng is None:
        raise UsageError("training mode requires an rng for dropout")
    rows = [ad.lookup(params.piece_table.matrix, pid) + ad.lookup(params.positions, t)
            for t, pid in enumerate(piece_ids)]
    x = ad.stack(rows)
    x = ad.dropout(x, cfg.dropout_p, training, rng)
    for layer in params.layers:
        x = transformer_block(layer, x, cfg.dropout_p, training, rng)
    return [ad.lookup(x, t) for t in range(len(piece_ids))]
