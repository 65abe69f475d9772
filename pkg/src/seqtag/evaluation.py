"""Entity-level precision/recall/F1 and token accuracy.

A predicted entity counts only if its type and both boundaries exactly match
a gold entity.  All ratios use the 0/0 -> 0 convention.  Model output that
violates BIO2 is interpreted leniently: an I-X with no live X entity opens a
new span, exactly as the repair rule would rewrite it to B-X.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import UsageError


@dataclass(frozen=True)
class EntitySpan:
    type: str
    start: int  # inclusive
    end: int    # exclusive

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise UsageError(f"bad span bounds [{self.start}, {self.end})")


@dataclass(frozen=True)
class TypeScore:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class EvalReport:
    precision: float
    recall: float
    f1: float
    token_accuracy: float
    per_type: dict[str, TypeScore] = field(default_factory=dict)


def _f1(p: float, r: float) -> float:
    return 2.0 * p * r / (p + r) if p + r > 0 else 0.0


def _ratio(hit: int, total: int) -> float:
    return 100.0 * hit / total if total else 0.0


def extract_spans(tags: list[str]) -> list[EntitySpan]:
    """Maximal B-X (I-X)* runs, reading orphan I-X as a span start."""
    spans = []
    i = 0
    n = len(tags)
    while i < n:
        tag = tags[i]
        if tag == "O":
            i += 1
            continue
        etype = tag[2:]
        j = i + 1
        while j < n and tags[j] == f"I-{etype}":
            j += 1
        spans.append(EntitySpan(etype, i, j))
        i = j
    return spans


def score(gold: list[list[str]], pred: list[list[str]]) -> EvalReport:
    """Entity-level report over parallel corpora of tag sequences."""
    if len(gold) != len(pred):
        raise UsageError(f"{len(gold)} gold sentences vs {len(pred)} predicted")
    n_gold = n_pred = n_hit = n_tok = n_tok_hit = 0
    counts: dict[str, list[int]] = {}  # type -> [gold, pred, hit]
    for k, (g_tags, p_tags) in enumerate(zip(gold, pred)):
        if len(g_tags) != len(p_tags):
            raise UsageError(f"sentence {k}: {len(g_tags)} gold tags vs "
                             f"{len(p_tags)} predicted")
        g_spans = set((s.type, s.start, s.end) for s in extract_spans(g_tags))
        p_spans = set((s.type, s.start, s.end) for s in extract_spans(p_tags))
        n_gold += len(g_spans)
        n_pred += len(p_spans)
        n_hit += len(g_spans & p_spans)
        for span in g_spans:
            counts.setdefault(span[0], [0, 0, 0])[0] += 1
        for span in p_spans:
            c = counts.setdefault(span[0], [0, 0, 0])
            c[1] += 1
            if span in g_spans:
                c[2] += 1
        n_tok += len(g_tags)
        n_tok_hit += sum(a == b for a, b in zip(g_tags, p_tags))
    p = _ratio(n_hit, n_pred)
    r = _ratio(n_hit, n_gold)
    per_type = {}
    for etype in sorted(counts):
        g, pr, hit = counts[etype]
        tp, tr = _ratio(hit, pr), _ratio(hit, g)
        per_type[etype] = TypeScore(tp, tr, _f1(tp, tr), g)
    return EvalReport(precision=p, recall=r, f1=_f1(p, r),
                      token_accuracy=_ratio(n_tok_hit, n_tok),
                      per_type=per_type)


def report_keyvalues(report: EvalReport) -> str:
    """Machine-readable form: one key=value line per metric."""
    lines = [f"precision={report.precision:.4f}",
             f"recall={report.recall:.4f}",
             f"f1={report.f1:.4f}",
             f"token_accuracy={report.token_accuracy:.4f}"]
    for etype, ts in report.per_type.items():
        lines.append(f"{etype}.precision={ts.precision:.4f}")
        lines.append(f"{etype}.recall={ts.recall:.4f}")
        lines.append(f"{etype}.f1={ts.f1:.4f}")
        lines.append(f"{etype}.support={ts.support}")
    return "\n".join(lines)


def report_table(report: EvalReport) -> str:
    """Human-readable table with one row per entity type plus the overall row."""
    header = f"{'type':<16}{'P':>8}{'R':>8}{'F1':>8}{'support':>9}"
    rows = [header, "-" * len(header)]
    for etype, ts in report.per_type.items():
        rows.append(f"{etype:<16}{ts.precision:>8.2f}{ts.recall:>8.2f}"
                    f"{ts.f1:>8.2f}{ts.support:>9d}")
    rows.append("-" * len(header))
    rows.append(f"{'overall':<16}{report.precision:>8.2f}{report.recall:>8.2f}"
                f"{report.f1:>8.2f}{'':>9}")
    rows.append(f"token accuracy {report.token_accuracy:.2f}")
    return "\n".join(rows)
