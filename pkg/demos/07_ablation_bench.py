"""Comparing model variants across seeds.

bench() retrains each configuration with several seeds and reports
per-seed and mean precision, recall, F1, and token accuracy on the
held-out split, so that a one-line table answers "did that change help".
"""

from seqtag.data import split_corpus
from seqtag.encoders import ComposerConfig
from seqtag.models import TrainConfig
from seqtag.synth import generate_corpus
from seqtag.training import bench, bench_table

split = split_corpus(generate_corpus(300, seed=1), valid_fraction=0.2, seed=0)

full = TrainConfig(
    model_kind="bilstm-crf",
    composer=ComposerConfig(use_word=True, use_char=True, word_dim=24,
                            char_dim=8, char_hidden=8),
    lr=0.1, dropout_p=0.0, epochs=2, batch_size=4, hidden_dim=16, seed=0)
lean = TrainConfig(
    model_kind="bilstm-linear",
    composer=ComposerConfig(use_word=True, use_char=False, word_dim=24),
    lr=0.1, dropout_p=0.0, epochs=2, batch_size=4, hidden_dim=16, seed=0)

results = bench([("word+char bilstm-crf", full),
                 ("word-only bilstm-linear", lean)],
                split, seeds=(0, 1))
print(bench_table(results))
for r in results:
    print(f"{r.label}: mean F1 {r.mean_f1:.2f}  ({r.elapsed_seconds:.1f}s)")
