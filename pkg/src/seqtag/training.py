"""Training loop, evaluation helpers, and the multi-seed benchmark harness."""

from __future__ import annotations

import dataclasses
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .crf import l2_penalty
from .data import CorpusSplit, LabeledSentence, build_vocab
from .errors import DivergenceError, UsageError
from .evaluation import EvalReport, score
from .models import SequenceTagger, TrainConfig, build_model, tag_corpus
from .optim import AdamDecoupled, SGDMomentum, clip_gradients
from .subword import UnigramVocab, train_unigram

log = logging.getLogger(__name__)

METRICS_HEADER = "epoch\ttrain_loss\tvalid_f1\tvalid_p\tvalid_r\tlr"


@dataclass
class EpochMetrics:
    epoch: int
    train_loss: float
    valid_f1: float
    valid_p: float
    valid_r: float
    lr: float

    def log_line(self) -> str:
        return (f"{self.epoch}\t{self.train_loss!r}\t{self.valid_f1!r}"
                f"\t{self.valid_p!r}\t{self.valid_r!r}\t{self.lr!r}")


@dataclass
class TrainResult:
    model: SequenceTagger
    history: list[EpochMetrics]
    best_epoch: int
    best_f1: float
    tokenizer: UnigramVocab | None = None

    def metrics_log(self) -> str:
        lines = [METRICS_HEADER] + [m.log_line() for m in self.history]
        return "\n".join(lines) + "\n"


def evaluate_model(model: SequenceTagger, sentences: list[LabeledSentence],
                   mask_illegal: bool | None = None) -> EvalReport:
    predicted = tag_corpus(model, sentences, mask_illegal)
    return score([s.tags for s in sentences], [s.tags for s in predicted])


def _needs_tokenizer(cfg: TrainConfig) -> bool:
    return cfg.model_kind.startswith("transformer") or cfg.composer.use_subword


def _batches(order, size):
    for start in range(0, len(order), size):
        yield order[start:start + size]


def train(cfg: TrainConfig, split: CorpusSplit,
          tokenizer: UnigramVocab | None = None,
          on_epoch=None, target_f1: float | None = None) -> TrainResult:
    """Fit a model on split.train, tracking entity F1 on split.valid.

    Each epoch visits the training sentences in a fresh seeded shuffle;
    sentence losses accumulate over a mini-batch before one clipped update.
    The parameters kept at the end are those of the best-validation epoch.
    A non-finite loss aborts with DivergenceError.  target_f1, when given,
    stops early once validation F1 reaches it.
    """
    if not split.train or not split.valid:
        raise UsageError("training needs non-empty train and valid splits")
    rng = np.random.default_rng(cfg.seed)
    vocab = build_vocab(split.train, cfg.min_count)
    if tokenizer is None and _needs_tokenizer(cfg):
        text = [" ".join(s.surfaces) for s in split.train]
        tokenizer = train_unigram(text, cfg.subword_vocab_size, seed=cfg.seed)
    model = build_model(cfg, vocab, rng, tokenizer)
    params = model.parameters()
    named = model.named_parameters()
    if cfg.optimizer == "sgd-momentum":
        opt = SGDMomentum(params, cfg.momentum)
    else:
        opt = AdamDecoupled(params)
    lr = cfg.lr
    best_f1 = -1.0
    best_epoch = 0
    best_state = {name: t.data.copy() for name, t in named.items()}
    history: list[EpochMetrics] = []
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(len(split.train))
        total = 0.0
        for batch in _batches(order, cfg.batch_size):
            opt.zero_grad()
            loss = None
            for i in batch:
                nll = model.loss(split.train[int(i)], training=True, rng=rng)
                loss = nll if loss is None else loss + nll
            if cfg.lambda_l2 > 0:
                loss = loss + l2_penalty(params, cfg.lambda_l2)
            value = float(loss.data)
            if not np.isfinite(value):
                raise DivergenceError(f"non-finite loss at epoch {epoch}")
            ad.backward(loss)
            clip_gradients(params, cfg.clip_norm)
            opt.step(lr)
            total += value
        train_loss = total / len(split.train)
        report = evaluate_model(model, split.valid)
        metrics = EpochMetrics(epoch, train_loss, report.f1,
                               report.precision, report.recall, lr)
        history.append(metrics)
        if on_epoch is not None:
            on_epoch(metrics)
        if report.f1 > best_f1:
            best_f1 = report.f1
            best_epoch = epoch
            best_state = {name: t.data.copy() for name, t in named.items()}
        if target_f1 is not None and report.f1 >= target_f1:
            break
        if cfg.optimizer == "sgd-momentum":
            lr = lr / (1.0 + 0.05 * epoch)
    for name, tensor in named.items():
        tensor.data = best_state[name]
    return TrainResult(model, history, best_epoch, best_f1, tokenizer)


# ---------------------------------------------------------------------------
# multi-seed benchmark


@dataclass
class BenchResult:
    label: str
    seeds: list[int]
    f1s: list[float] = field(default_factory=list)
    precisions: list[float] = field(default_factory=list)
    recalls: list[float] = field(default_factory=list)
    accuracies: list[float] = field(default_factory=list)
    elapsed_seconds: float = 0.0

    @property
    def mean_f1(self) -> float:
        return float(np.mean(self.f1s))


def bench(configs, split: CorpusSplit, seeds=(0, 1, 2, 3, 4),
          tokenizer: UnigramVocab | None = None,
          target_f1: float | None = None) -> list[BenchResult]:
    """Train every labeled config under every seed; score the held-out split.

    configs is an iterable of (label, TrainConfig) pairs.  Evaluation uses
    split.test when present, split.valid otherwise.  Row metrics depend only
    on config and seed, so reruns of identical configs reproduce them.
    """
    held_out = list(split.test) if split.test else list(split.valid)
    results = []
    for label, cfg in configs:
        result = BenchResult(label=label, seeds=list(seeds))
        start = time.perf_counter()
        for seed in seeds:
            run_cfg = dataclasses.replace(cfg, seed=int(seed))
            trained = train(run_cfg, split, tokenizer, target_f1=target_f1)
            report = evaluate_model(trained.model, held_out)
            result.f1s.append(report.f1)
            result.precisions.append(report.precision)
            result.recalls.append(report.recall)
            result.accuracies.append(report.token_accuracy)
            log.info("bench %s seed %d: f1 %.2f", label, seed, report.f1)
        result.elapsed_seconds = time.perf_counter() - start
        results.append(result)
    return results


def bench_table(results: list[BenchResult]) -> str:
    """Comparison table: one row per config and seed, then per-config means."""
    header = f"{'config':<28}{'seed':>6}{'P':>9}{'R':>9}{'F1':>9}{'acc':>9}"
    lines = [header, "-" * len(header)]
    for r in results:
        for i, seed in enumerate(r.seeds):
            lines.append(f"{r.label:<28}{seed:>6}{r.precisions[i]:>9.2f}"
                         f"{r.recalls[i]:>9.2f}{r.f1s[i]:>9.2f}"
                         f"{r.accuracies[i]:>9.2f}")
    lines.append("-" * len(header))
    for r in results:
        lines.append(f"{r.label:<28}{'mean':>6}{np.mean(r.precisions):>9.2f}"
                     f"{np.mean(r.recalls):>9.2f}{r.mean_f1:>9.2f}"
                     f"{np.mean(r.accuracies):>9.2f}")
    return "\n".join(lines) + "\n"
