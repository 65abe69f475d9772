"""Linear-chain CRF scoring, partition, decoding, and the per-token
softmax head that replaces it in the non-structured model variants.

Conventions: for T tags the transition matrix is (T+1) x (T+1) with row T
holding begin-of-sentence transitions and column T end-of-sentence
transitions.  Probabilities are normalized over the full augmented space, so
every path implicitly starts at BOS and ends at EOS.  Ties in decoding are
broken toward the lowest tag index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import ShapeError, UsageError

NEG_INF = float("-inf")


@dataclass
class CRFParams:
    transition: Tensor
    num_tags: int

    @classmethod
    def init(cls, num_tags: int, rng: np.random.Generator) -> "CRFParams":
        if num_tags < 1:
            raise UsageError("CRF needs at least one tag")
        data = rng.uniform(-0.1, 0.1, size=(num_tags + 1, num_tags + 1))
        return cls(transition=Tensor(data, requires_grad=True), num_tags=num_tags)

    def named_parameters(self, prefix: str = "") -> dict[str, Tensor]:
        return {prefix + "transition": self.transition}


def _check_emissions(crf: CRFParams, emissions: Tensor) -> int:
    if emissions.data.ndim != 2 or emissions.shape[1] != crf.num_tags:
        raise ShapeError(f"emissions shape {emissions.shape} does not match "
                         f"(n, {crf.num_tags})")
    n = emissions.shape[0]
    if n == 0:
        raise UsageError("empty emission sequence")
    return n


def _check_labels(crf: CRFParams, labels, n: int):
    if len(labels) != n:
        raise ShapeError(f"{len(labels)} labels for {n} positions")
    for lab in labels:
        if not 0 <= lab < crf.num_tags:
            raise UsageError(f"label {lab} outside [0, {crf.num_tags})")


def _split_transition(crf: CRFParams, mask: np.ndarray | None):
    """Transition pieces as graph tensors: (bos_row, inner (T, T), eos_col).

    The optional additive mask (0 or -inf per cell) is applied after the
    selection products so no -inf ever passes through a matmul.
    """
    T = crf.num_tags
    sel = np.zeros((T, T + 1))
    sel[:, :T] = np.eye(T)
    sel_t = Tensor(sel)
    e_eos = Tensor(np.eye(T + 1)[T])
    left = ad.matmul(sel_t, crf.transition)              # (T, T+1): drop BOS row
    inner = ad.matmul(left, ad.transpose(sel_t))         # (T, T)
    eos_col = ad.matmul(left, e_eos)                     # (T,)
    bos_row = ad.matmul(sel_t, ad.lookup(crf.transition, T))  # (T,)
    if mask is not None:
        if mask.shape != (T + 1, T + 1):
            raise ShapeError(f"mask shape {mask.shape} does not match "
                             f"({T + 1}, {T + 1})")
        bos_row = bos_row + Tensor(mask[T, :T])
        inner = inner + Tensor(mask[:T, :T])
        eos_col = eos_col + Tensor(mask[:T, T])
    return bos_row, inner, eos_col


def score_sequence(crf: CRFParams, emissions: Tensor, labels,
                   mask: np.ndarray | None = None) -> Tensor:
    """Unnormalized path score of one labeling."""
    n = _check_emissions(crf, emissions)
    _check_labels(crf, labels, n)
    T = crf.num_tags
    pick = np.zeros((n, T))
    pick[np.arange(n), labels] = 1.0
    emit = ad.tensor_sum(ad.mul(emissions, Tensor(pick)))
    counts = np.zeros((T + 1, T + 1))
    prev = T
    penalty = 0.0
    for lab in labels:
        counts[prev, lab] += 1.0
        if mask is not None:
            penalty += mask[prev, lab]
        prev = lab
    counts[prev, T] += 1.0
    if mask is not None:
        penalty += mask[prev, T]
    trans = ad.tensor_sum(ad.mul(crf.transition, Tensor(counts)))
    total = emit + trans
    if penalty != 0.0:
        total = total + Tensor(np.float64(penalty))
    return total


def log_partition(crf: CRFParams, emissions: Tensor,
                  mask: np.ndarray | None = None) -> Tensor:
    """Log of the summed exp-scores of all labelings (forward algorithm)."""
    n = _check_emissions(crf, emissions)
    T = crf.num_tags
    bos_row, inner, eos_col = _split_transition(crf, mask)
    alpha = bos_row + ad.lookup(emissions, 0)
    for t in range(1, n):
        prev = ad.broadcast_to(ad.reshape(alpha, (T, 1)), (T, T))
        alpha = ad.log_sum_exp(prev + inner, axis=0) + ad.lookup(emissions, t)
    return ad.log_sum_exp(alpha + eos_col, axis=0)


def log_prob(crf: CRFParams, emissions: Tensor, labels,
             mask: np.ndarray | None = None) -> Tensor:
    return score_sequence(crf, emissions, labels, mask) - log_partition(crf, emissions, mask)


def crf_nll(crf: CRFParams, emissions: Tensor, labels,
            mask: np.ndarray | None = None) -> Tensor:
    """Negative log-likelihood of one labeled sequence."""
    return -log_prob(crf, emissions, labels, mask)


def viterbi_decode(crf: CRFParams, emissions: Tensor,
                   mask: np.ndarray | None = None) -> list[int]:
    """Highest-scoring labeling; pure array math, no gradient graph."""
    n = _check_emissions(crf, emissions)
    T = crf.num_tags
    e = emissions.data
    trans = crf.transition.data + (mask if mask is not None else 0.0)
    delta = trans[T, :T] + e[0]
    back = np.zeros((n, T), dtype=int)
    for t in range(1, n):
        cand = delta[:, None] + trans[:T, :T]  # cand[i, j]: best-so-far i -> j
        back[t] = np.argmax(cand, axis=0)
        delta = cand[back[t], np.arange(T)] + e[t]
    final = delta + trans[:T, T]
    best = int(np.argmax(final))
    path = [best]
    for t in range(n - 1, 0, -1):
        best = int(back[t, best])
        path.append(best)
    return path[::-1]


def illegal_mask(tags: list[str]) -> np.ndarray:
    """Additive mask forbidding transitions that can never occur in BIO2.

    An I-X tag may only follow B-X or I-X of the same type; everything else
    stays 0.  Shape (T+1, T+1) with the BOS row last and EOS column last.
    """
    T = len(tags)
    mask = np.zeros((T + 1, T + 1))
    for j, to_tag in enumerate(tags):
        if not to_tag.startswith("I-"):
            continue
        kind = to_tag[2:]
        for i, from_tag in enumerate(tags):
            if from_tag not in (f"B-{kind}", f"I-{kind}"):
                mask[i, j] = NEG_INF
        mask[T, j] = NEG_INF  # sentence cannot open inside an entity
    return mask


# ---------------------------------------------------------------------------
# per-token softmax head


def linear_nll(emissions: Tensor, labels) -> Tensor:
    """Summed softmax cross-entropy of independent per-token predictions."""
    if emissions.data.ndim != 2:
        raise ShapeError(f"emissions must be 2-D, got {emissions.shape}")
    n, T = emissions.shape
    if n == 0:
        raise UsageError("empty emission sequence")
    if len(labels) != n:
        raise ShapeError(f"{len(labels)} labels for {n} positions")
    for lab in labels:
        if not 0 <= lab < T:
            raise UsageError(f"label {lab} outside [0, {T})")
    pick = np.zeros((n, T))
    pick[np.arange(n), labels] = 1.0
    picked = ad.tensor_sum(ad.mul(emissions, Tensor(pick)))
    return ad.tensor_sum(ad.log_sum_exp(emissions, axis=1)) - picked


def linear_decode(emissions: Tensor) -> list[int]:
    """Per-token argmax; ties go to the lowest tag index."""
    if emissions.data.ndim != 2 or emissions.shape[0] == 0:
        raise ShapeError(f"emissions must be non-empty 2-D, got {emissions.shape}")
    return [int(i) for i in np.argmax(emissions.data, axis=1)]


def constrained_decode(emissions: Tensor, mask: np.ndarray) -> list[int]:
    """Greedy left-to-right argmax restricted to transitions the mask allows.

    For heads without a transition table this is how an additive 0/-inf
    mask is honored; an all-zero mask reduces to linear_decode.
    """
    if emissions.data.ndim != 2 or emissions.shape[0] == 0:
        raise ShapeError(f"emissions must be non-empty 2-D, got {emissions.shape}")
    T = emissions.shape[1]
    if mask.shape != (T + 1, T + 1):
        raise ShapeError(f"mask must be {(T + 1, T + 1)}, got {mask.shape}")
    prev = T  # start-of-sequence row
    path = []
    for row in emissions.data:
        best = int(np.argmax(row + mask[prev, :T]))
        path.append(best)
        prev = best
    return path


def l2_penalty(tensors, lam: float) -> Tensor:
    """(lam / 2) * sum of squared entries over all given tensors."""
    if lam < 0:
        raise UsageError("l2 strength must be non-negative")
    total = Tensor(np.float64(0.0))
    if lam == 0.0:
        return total
    for t in tensors:
        total = total + ad.tensor_sum(ad.mul(t, t))
    return ad.scale(total, 0.5 * lam)
