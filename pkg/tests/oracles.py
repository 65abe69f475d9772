"""Independent oracles the test suite checks the library against.

Everything here is deliberately written the slow, obvious way (finite
differences, exhaustive enumeration, direct counting) and shares no code with
the implementation under test.
"""

import itertools

import numpy as np


def finite_diff(f, arrays, step=1e-5):
    """Central finite-difference gradients of scalar f w.r.t. each array.

    f is called with the arrays as positional arguments and must return a
    float.  Returns one gradient array per input.
    """
    grads = []
    for k, a in enumerate(arrays):
        g = np.zeros_like(a, dtype=np.float64)
        flat = a.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            up = f(*arrays)
            flat[i] = orig - step
            down = f(*arrays)
            flat[i] = orig
            gflat[i] = (up - down) / (2.0 * step)
        grads.append(g)
    return grads


def max_rel_error(analytic, numeric):
    """Largest elementwise |a - n| / max(1, |a|, |n|)."""
    a = np.asarray(analytic, dtype=np.float64).reshape(-1)
    n = np.asarray(numeric, dtype=np.float64).reshape(-1)
    denom = np.maximum(1.0, np.maximum(np.abs(a), np.abs(n)))
    return float(np.max(np.abs(a - n) / denom)) if a.size else 0.0


# ---------------------------------------------------------------------------
# linear-chain CRF oracles: plain-float path scoring and exhaustive sums


def crf_path_score(emissions, transition, labels):
    """Score of one labeling: emissions[i][l_i] + transitions, BOS row / EOS col last."""
    num_tags = emissions.shape[1]
    bos, eos = num_tags, num_tags
    total = 0.0
    prev = bos
    for i, lab in enumerate(labels):
        total += emissions[i, lab] + transition[prev, lab]
        prev = lab
    total += transition[prev, eos]
    return total


def crf_enumerate(emissions, transition):
    """All (labels, score) pairs by brute force over num_tags^n labelings."""
    n, num_tags = emissions.shape
    out = []
    for labels in itertools.product(range(num_tags), repeat=n):
        out.append((labels, crf_path_score(emissions, transition, labels)))
    return out


def crf_brute_log_partition(emissions, transition):
    scores = np.array([s for _, s in crf_enumerate(emissions, transition)])
    m = scores.max()
    return float(m + np.log(np.sum(np.exp(scores - m))))


def crf_brute_argmax(emissions, transition):
    """Best labeling; ties broken toward the lexicographically smallest labels."""
    best_labels, best_score = None, -np.inf
    for labels, s in crf_enumerate(emissions, transition):
        if s > best_score:
            best_labels, best_score = labels, s
    return list(best_labels), best_score


# ---------------------------------------------------------------------------
# unigram segmentation oracle: enumerate every segmentation of a word


def all_segmentations(word, vocab):
    """Yield (pieces, logprob) for every way to cover word with vocab pieces."""
    n = len(word)

    def rec(start):
        if start == n:
            yield [], 0.0
            return
        for end in range(start + 1, n + 1):
            piece = word[start:end]
            if piece in vocab:
                for rest, lp in rec(end):
                    yield [piece] + rest, vocab[piece] + lp

    yield from rec(0)


def best_segmentation(word, vocab):
    best, best_lp = None, -np.inf
    for pieces, lp in all_segmentations(word, vocab):
        if lp > best_lp:
            best, best_lp = pieces, lp
    return best, best_lp


# ---------------------------------------------------------------------------
# entity scoring oracle: direct span counting


def naive_spans(tags):
    """Entity spans as (type, start, end) via a direct scan, I-orphans repaired."""
    spans = set()
    i = 0
    while i < len(tags):
        tag = tags[i]
        if tag == "O":
            i += 1
            continue
        etype = tag[2:]
        j = i + 1
        while j < len(tags) and tags[j] == f"I-{etype}":
            j += 1
        spans.add((etype, i, j))
        i = j
    return spans


def naive_entity_scores(gold_corpus, pred_corpus):
    """(precision, recall, f1, token_accuracy) in percent by direct counting."""
    n_gold = n_pred = n_hit = n_tok = n_tok_hit = 0
    per_type = {}
    for gold, pred in zip(gold_corpus, pred_corpus):
        gspans, pspans = naive_spans(gold), naive_spans(pred)
        n_gold += len(gspans)
        n_pred += len(pspans)
        n_hit += len(gspans & pspans)
        for etype, _, _ in gspans:
            d = per_type.setdefault(etype, [0, 0, 0])
            d[0] += 1
        for span in pspans:
            d = per_type.setdefault(span[0], [0, 0, 0])
            d[1] += 1
            if span in gspans:
                d[2] += 1
        n_tok += len(gold)
        n_tok_hit += sum(g == p for g, p in zip(gold, pred))
    p = 100.0 * n_hit / n_pred if n_pred else 0.0
    r = 100.0 * n_hit / n_gold if n_gold else 0.0
    f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
    acc = 100.0 * n_tok_hit / n_tok if n_tok else 0.0
    per_type_scores = {}
    for etype, (g, pr, hit) in per_type.items():
        tp = 100.0 * hit / pr if pr else 0.0
        tr = 100.0 * hit / g if g else 0.0
        tf = 2 * tp * tr / (tp + tr) if tp + tr > 0 else 0.0
        per_type_scores[etype] = (tp, tr, tf, g)
    return p, r, f1, acc, per_type_scores
