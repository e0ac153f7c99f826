"""Attachment scores (UAS / LAS)."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction

from .treebank import Treebank

PUNCT_LABEL = "PUNCT"


class AlignmentError(ValueError):
    """Gold and predicted treebanks do not line up token for token."""


def percent(correct: int, total: int) -> float:
    return 100.0 * correct / total if total else float("nan")


def round_half_up(value, places: int = 2) -> Decimal:
    """Half-up rounding of an exact value (int, Fraction) or a float taken at its repr."""
    if isinstance(value, Fraction):
        d = Decimal(value.numerator) / Decimal(value.denominator)
    else:
        d = Decimal(repr(value)) if isinstance(value, float) else Decimal(value)
    return d.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP)


def format_percent(correct: int, total: int, places: int = 2) -> str:
    if not total:
        return "N/A"
    return str(round_half_up(Fraction(100 * correct, total), places))


def check_aligned(gold: Treebank, pred: Treebank) -> None:
    if len(gold) != len(pred):
        raise AlignmentError(f"gold has {len(gold)} sentences, prediction has {len(pred)}")
    for i, (g, p) in enumerate(zip(gold, pred)):
        if len(g) != len(p):
            raise AlignmentError(f"sentence {i}: gold length {len(g)}, predicted length {len(p)}")
        for tg, tp in zip(g, p):
            if tg.form != tp.form:
                raise AlignmentError(f"sentence {i}, token {tg.index}: form {tg.form!r} != {tp.form!r}")


def is_punct(token, punct_label: str = PUNCT_LABEL, punct_pos=None) -> bool:
    """Punctuation by gold deprel, or by POS tag when ``punct_pos`` is given."""
    if token.deprel == punct_label:
        return True
    return punct_pos is not None and token.pos in punct_pos


@dataclass
class EvalResult:
    uas: float
    las: float
    label_accuracy: float
    token_count: int
    correct_heads: int
    correct_labeled: int
    correct_labels: int
    per_sentence: list[tuple[float, float]] | None = field(default=None, repr=False)

    def to_text(self) -> str:
        """Flat ``key=value`` block with percentages rounded half-up to two places."""
        n = self.token_count
        lines = [
            f"uas={format_percent(self.correct_heads, n)}",
            f"las={format_percent(self.correct_labeled, n)}",
            f"label_accuracy={format_percent(self.correct_labels, n)}",
            f"tokens={n}",
            f"correct_heads={self.correct_heads}",
            f"correct_labeled={self.correct_labeled}",
        ]
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        d = asdict(self)
        d.pop("per_sentence")
        return json.dumps(d, indent=2, sort_keys=True) + "\n"


def evaluate(gold: Treebank, pred: Treebank, include_punct: bool = True,
             punct_label: str = PUNCT_LABEL, punct_pos=None, per_sentence: bool = False) -> EvalResult:
    """Micro-averaged UAS, LAS and label accuracy over all scored tokens.

    Punctuation is scored by default; with ``include_punct=False`` tokens whose
    gold deprel is ``punct_label`` (or whose gold POS is in ``punct_pos``) are
    left out entirely.
    """
    check_aligned(gold, pred)
    total = heads = labeled = labels = 0
    rows = [] if per_sentence else None
    for g, p in zip(gold, pred):
        s_total = s_heads = s_labeled = 0
        for tg, tp in zip(g, p):
            if not include_punct and is_punct(tg, punct_label, punct_pos):
                continue
            s_total += 1
            head_ok = tg.head == tp.head
            label_ok = tg.deprel == tp.deprel
            s_heads += head_ok
            s_labeled += head_ok and label_ok
            labels += label_ok
        total += s_total
        heads += s_heads
        labeled += s_labeled
        if rows is not None:
            rows.append((percent(s_heads, s_total), percent(s_labeled, s_total)))
    return EvalResult(percent(heads, total), percent(labeled, total), percent(labels, total),
                      total, heads, labeled, labels, rows)
