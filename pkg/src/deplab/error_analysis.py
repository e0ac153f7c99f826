"""Factor-based error analysis over aligned gold / predicted treebanks.

Every report bins arcs (or sentences) by one factor and reports, per bin, the
share of the gold mass and labeled accuracy or precision/recall for one or two
systems. With two systems a delta column (first minus second) is added.
Counts are kept exact; rounding happens only when rendering.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence, Union

import numpy as np

from .evaluation import PUNCT_LABEL, check_aligned, format_percent, is_punct, round_half_up
from .factors import FACTOR_FUNCTIONS, root_distances
from .treebank import ROOT, Treebank

NA = "N/A"
Systems = Union[Mapping[str, Treebank], Sequence[tuple[str, Treebank]]]

ARC_FACTORS = ("dependency_length", "root_distance", "sibling_count", "degree")


# -- bins ------------------------------------------------------------------------

@dataclass(frozen=True)
class BinSpec:
    """Ascending lower bounds; bin ``i`` covers ``[edges[i], edges[i+1])``.

    The last bin is ``[edges[-1], inf)`` when ``overflow`` is set and the single
    value ``edges[-1]`` otherwise. Values outside every bin are counted as
    unbinned by the reports.
    """

    factor: str
    edges: tuple[int, ...]
    overflow: bool = True

    def index(self, value: int) -> int | None:
        e = self.edges
        if value < e[0]:
            return None
        i = int(np.searchsorted(e, value, side="right")) - 1
        if i == len(e) - 1 and not self.overflow and value != e[-1]:
            return None
        return i

    def labels(self) -> list[str]:
        e = self.edges
        out = []
        for i, lo in enumerate(e):
            if i + 1 < len(e):
                hi = e[i + 1] - 1
                out.append(str(lo) if hi == lo else f"{lo}-{hi}")
            elif self.overflow:
                prev_is_range = i > 0 and e[i] - e[i - 1] > 1
                out.append(f">{lo - 1}" if prev_is_range else f"≥{lo}")
            else:
                out.append(str(lo))
        return out


DEFAULT_BINS = {
    "sentence_length": BinSpec("sentence_length", (1, 11, 21, 31, 41, 51), overflow=True),
    "dependency_length": BinSpec("dependency_length", tuple(range(1, 17)), overflow=True),
    "root_distance": BinSpec("root_distance", tuple(range(1, 8)), overflow=True),
    "sibling_count": BinSpec("sibling_count", tuple(range(0, 11)), overflow=True),
    "degree": BinSpec("degree", (0, 1, 2, 3), overflow=True),
}


# -- report containers -----------------------------------------------------------

@dataclass
class Cell:
    correct: int = 0
    total: int = 0

    @property
    def value(self) -> float | None:
        return 100.0 * self.correct / self.total if self.total else None

    def text(self) -> str:
        return format_percent(self.correct, self.total)


@dataclass
class ReportRow:
    label: str
    mass: int = 0                                    # gold items in this bin
    cells: dict[tuple[str, str], Cell] = field(default_factory=dict)  # (metric, system)
    extra: dict[str, tuple[int, int]] = field(default_factory=dict)   # name -> (numerator, denominator)

    def cell(self, metric: str, system: str) -> Cell:
        return self.cells.setdefault((metric, system), Cell())


@dataclass
class FactorReport:
    factor: str
    title: str
    metrics: tuple[str, ...]
    systems: tuple[str, ...]
    rows: list[ReportRow]
    mass_unit: str = "arcs"
    extra_columns: tuple[str, ...] = ()
    unbinned: int = 0
    scheme: str = "labeled"

    @property
    def mass_total(self) -> int:
        return sum(r.mass for r in self.rows)

    def mass(self, row: ReportRow) -> float:
        t = self.mass_total
        return 100.0 * row.mass / t if t else float("nan")

    def value(self, row: ReportRow, metric: str, system: str) -> float | None:
        return row.cell(metric, system).value

    def delta(self, row: ReportRow, metric: str) -> float | None:
        if len(self.systems) != 2:
            return None
        a, b = (self.value(row, metric, s) for s in self.systems)
        if a is None or b is None:
            return None
        return a - b

    def _delta_text(self, row: ReportRow, metric: str) -> str:
        a, b = (row.cell(metric, s) for s in self.systems)
        if not a.total or not b.total:
            return NA
        da = round_half_up(Fraction(100 * a.correct, a.total))
        db = round_half_up(Fraction(100 * b.correct, b.total))
        return str(da - db)

    def _extra_text(self, row: ReportRow, name: str) -> str:
        num, den = row.extra.get(name, (0, 0))
        return str(round_half_up(Fraction(num, den))) if den else NA

    def header(self) -> list[str]:
        cols = [self.factor, "Percentage", *self.extra_columns]
        for m in self.metrics:
            for s in self.systems:
                cols.append(f"{m}:{s}" if len(self.metrics) > 1 else s)
            if len(self.systems) == 2:
                cols.append(f"{m}:Δ" if len(self.metrics) > 1 else "Δ")
        return cols

    def text_rows(self) -> list[list[str]]:
        out = []
        t = self.mass_total
        for r in self.rows:
            cols = [r.label, format_percent(r.mass, t), *(self._extra_text(r, e) for e in self.extra_columns)]
            for m in self.metrics:
                cols.extend(r.cell(m, s).text() for s in self.systems)
                if len(self.systems) == 2:
                    cols.append(self._delta_text(r, m))
            out.append(cols)
        return out

    def to_text(self) -> str:
        """Aligned plain-text table, percentages rounded half-up to two places."""
        table = [self.header()] + self.text_rows()
        widths = [max(len(row[i]) for row in table) for i in range(len(table[0]))]
        lines = [self.title, f"({self.scheme} scheme, mass unit: {self.mass_unit})"]
        for k, row in enumerate(table):
            first = row[0].ljust(widths[0])
            rest = [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
            lines.append("  ".join([first, *rest]).rstrip())
            if k == 0:
                lines.append("  ".join("-" * w for w in widths))
        if self.unbinned:
            lines.append(f"unbinned {self.mass_unit}: {self.unbinned}")
        return "\n".join(lines) + "\n"

    def to_records(self) -> list[dict]:
        """One dict per bin with unrounded values (``None`` where undefined)."""
        recs = []
        for r in self.rows:
            rec = {"bin": r.label, "mass": self.mass(r), "mass_count": r.mass}
            for e in self.extra_columns:
                num, den = r.extra.get(e, (0, 0))
                rec[e] = num / den if den else None
            for m in self.metrics:
                for s in self.systems:
                    c = r.cell(m, s)
                    rec[f"{m}:{s}"] = c.value
                    rec[f"{m}:{s}:correct"] = c.correct
                    rec[f"{m}:{s}:total"] = c.total
                if len(self.systems) == 2:
                    rec[f"{m}:delta"] = self.delta(r, m)
            recs.append(rec)
        return recs

    def to_json(self) -> str:
        doc = {
            "factor": self.factor,
            "title": self.title,
            "scheme": self.scheme,
            "metrics": list(self.metrics),
            "systems": list(self.systems),
            "mass_unit": self.mass_unit,
            "unbinned": self.unbinned,
            "rows": self.to_records(),
        }
        return json.dumps(doc, indent=2, ensure_ascii=False, sort_keys=True) + "\n"


# -- helpers ---------------------------------------------------------------------

def _systems(preds: Systems) -> list[tuple[str, Treebank]]:
    if isinstance(preds, Treebank):
        return [("system", preds)]
    items = list(preds.items()) if isinstance(preds, Mapping) else list(preds)
    if not items:
        raise ValueError("at least one predicted treebank is required")
    return items


def _check(gold: Treebank, systems) -> None:
    for _, p in systems:
        check_aligned(gold, p)


def _scored(tok, include_punct, punct_label) -> bool:
    return include_punct or not is_punct(tok, punct_label)


def _numeric_rows(spec: BinSpec) -> list[ReportRow]:
    return [ReportRow(lbl) for lbl in spec.labels()]


# -- reports ---------------------------------------------------------------------

def accuracy_by_sentence_length(gold: Treebank, preds: Systems, bins: BinSpec | None = None,
                                include_punct: bool = True, punct_label: str = PUNCT_LABEL) -> FactorReport:
    """Share of sentences per length bin and LAS over the tokens of those sentences."""
    systems = _systems(preds)
    _check(gold, systems)
    spec = bins or DEFAULT_BINS["sentence_length"]
    rows = _numeric_rows(spec)
    unbinned = 0
    for i, g in enumerate(gold):
        b = spec.index(len(g))
        if b is None:
            unbinned += 1
            continue
        rows[b].mass += 1
        for name, p in systems:
            cell = rows[b].cell("accuracy", name)
            for tg, tp in zip(g, p[i]):
                if _scored(tg, include_punct, punct_label):
                    cell.total += 1
                    cell.correct += tg.head == tp.head and tg.deprel == tp.deprel
    return FactorReport("sentence_length", "Accuracy relative to sentence length", ("accuracy",),
                        tuple(n for n, _ in systems), rows, "sentences", unbinned=unbinned)


def precision_recall_by_arc_factor(gold: Treebank, preds: Systems, factor: str, bins: BinSpec | None = None,
                                   include_punct: bool = True, punct_label: str = PUNCT_LABEL) -> FactorReport:
    """Precision binned by the predicted graph's factor value, recall by the gold graph's.

    An arc is correct when both its head and its label match gold.
    """
    if factor not in ARC_FACTORS:
        raise ValueError(f"unknown arc factor {factor!r}; expected one of {ARC_FACTORS}")
    systems = _systems(preds)
    _check(gold, systems)
    spec = bins or DEFAULT_BINS[factor]
    fn = FACTOR_FUNCTIONS[factor]
    rows = _numeric_rows(spec)
    unbinned = 0
    for i, g in enumerate(gold):
        fg = fn(g)
        scored = [d for d in range(1, len(g) + 1) if _scored(g[d], include_punct, punct_label)]
        gold_bin = {d: spec.index(int(fg[d])) for d in scored}
        for d in scored:
            if gold_bin[d] is None:
                unbinned += 1
            else:
                rows[gold_bin[d]].mass += 1
        for name, ptb in systems:
            p = ptb[i]
            # predictions from outside tools may be malformed; unreachable nodes stay unbinned
            fp = root_distances(p, strict=False) if factor == "root_distance" else fn(p)
            for d in scored:
                ok = g[d].head == p[d].head and g[d].deprel == p[d].deprel
                if gold_bin[d] is not None:
                    c = rows[gold_bin[d]].cell("recall", name)
                    c.total += 1
                    c.correct += ok
                pb = spec.index(int(fp[d]))
                if pb is not None:
                    c = rows[pb].cell("precision", name)
                    c.total += 1
                    c.correct += ok
    titles = {
        "dependency_length": "Dependency arc precision/recall relative to predicted/gold dependency length",
        "root_distance": "Dependency arc precision/recall relative to predicted/gold distance to root",
        "sibling_count": "Dependency arc precision/recall relative to predicted/gold number of modifier siblings",
        "degree": "Dependency arc precision/recall relative to predicted/gold degree of non-projectivity",
    }
    return FactorReport(factor, titles[factor], ("precision", "recall"), tuple(n for n, _ in systems),
                        rows, "arcs", unbinned=unbinned)


def _categorical_rows(counts: Counter) -> dict[str, ReportRow]:
    order = sorted(counts, key=lambda k: (-counts[k], k))
    return {k: ReportRow(k, counts[k]) for k in order}


def accuracy_by_dependent_pos(gold: Treebank, preds: Systems, include_punct: bool = True,
                              punct_label: str = PUNCT_LABEL, pos_field: str = "cpos") -> FactorReport:
    """Labeled accuracy per gold POS of the dependent."""
    systems = _systems(preds)
    _check(gold, systems)
    counts = Counter(getattr(t, pos_field) for g in gold for t in g if _scored(t, include_punct, punct_label))
    rows = _categorical_rows(counts)
    for i, g in enumerate(gold):
        for name, ptb in systems:
            p = ptb[i]
            for tg, tp in zip(g, p):
                if _scored(tg, include_punct, punct_label):
                    c = rows[getattr(tg, pos_field)].cell("accuracy", name)
                    c.total += 1
                    c.correct += tg.head == tp.head and tg.deprel == tp.deprel
    return FactorReport("dependent_pos", "Labeled accuracy relative to dependent part-of-speech", ("accuracy",),
                        tuple(n for n, _ in systems), list(rows.values()), "tokens")


def precision_recall_by_deptype(gold: Treebank, preds: Systems, include_punct: bool = True,
                                punct_label: str = PUNCT_LABEL) -> FactorReport:
    """Per label: gold share, mean gold dependency length (DLA), precision and recall."""
    systems = _systems(preds)
    _check(gold, systems)
    counts = Counter(t.deprel for g in gold for t in g if _scored(t, include_punct, punct_label))
    for _, ptb in systems:
        for i, g in enumerate(gold):
            for tg, tp in zip(g, ptb[i]):
                if _scored(tg, include_punct, punct_label) and tp.deprel not in counts:
                    counts[tp.deprel] = 0
    rows = _categorical_rows(counts)
    length_sum = defaultdict(int)
    for g in gold:
        for t in g:
            if _scored(t, include_punct, punct_label):
                length_sum[t.deprel] += abs(t.head - t.index)
    for lbl, row in rows.items():
        row.extra["DLA"] = (length_sum[lbl], row.mass)
    for name, ptb in systems:
        for i, g in enumerate(gold):
            for tg, tp in zip(g, ptb[i]):
                if not _scored(tg, include_punct, punct_label):
                    continue
                ok = tg.head == tp.head and tg.deprel == tp.deprel
                c = rows[tg.deprel].cell("recall", name)
                c.total += 1
                c.correct += ok
                c = rows[tp.deprel].cell("precision", name)
                c.total += 1
                c.correct += ok
    return FactorReport("dependency_type", "Precision/recall for different dependency types", ("precision", "recall"),
                        tuple(n for n, _ in systems), list(rows.values()), "arcs", extra_columns=("DLA",))


def root_relation_accuracy(gold: Treebank, preds: Systems, pos_field: str = "cpos") -> FactorReport:
    """Gold root arcs grouped by the root child's POS; correct = head 0 and gold label reproduced."""
    systems = _systems(preds)
    _check(gold, systems)
    counts = Counter(getattr(t, pos_field) for g in gold for t in g if t.head == ROOT)
    rows = _categorical_rows(counts)
    for row in rows.values():
        row.label = f"Root - {row.label}"
    for i, g in enumerate(gold):
        for name, ptb in systems:
            p = ptb[i]
            for tg, tp in zip(g, p):
                if tg.head != ROOT:
                    continue
                c = rows[getattr(tg, pos_field)].cell("accuracy", name)
                c.total += 1
                c.correct += tp.head == ROOT and tp.deprel == tg.deprel
    return FactorReport("root_relation", "Accuracy of root relation", ("accuracy",),
                        tuple(n for n, _ in systems), list(rows.values()), "root arcs")


# -- POS / dependency type distribution -----------------------------------------

@dataclass
class DistributionEntry:
    label: str
    count: int

    def share(self, total: int) -> float:
        return 100.0 * self.count / total


@dataclass
class PosDistribution:
    pos: str
    total: int
    entries: list[DistributionEntry]   # descending; a trailing "others" entry may fold minor labels

    def shares(self) -> list[tuple[str, float]]:
        return [(e.label, e.share(self.total)) for e in self.entries]


@dataclass
class DistributionReport:
    rows: list[PosDistribution]

    def to_text(self) -> str:
        lines = ["Dependent POS and a list of its dependency types"]
        width = max((len(r.pos) for r in self.rows), default=0)
        for r in self.rows:
            items = ", ".join(f"{e.label} ({format_percent(e.count, r.total)}%)" for e in r.entries)
            lines.append(f"{r.pos.ljust(width)}  {items}.")
        return "\n".join(lines) + "\n"

    def to_records(self) -> list[dict]:
        return [{"pos": r.pos, "count": r.total,
                 "types": [{"label": e.label, "count": e.count, "share": e.share(r.total)} for e in r.entries]}
                for r in self.rows]

    def to_json(self) -> str:
        return json.dumps({"rows": self.to_records()}, indent=2, ensure_ascii=False, sort_keys=True) + "\n"


def pos_deptype_distribution(treebank: Treebank, pos_field: str = "cpos", min_share: float = 1.0,
                             max_items: int | None = None, lowercase: bool = True) -> DistributionReport:
    """For each dependent POS, its dependency types by descending share.

    Labels under ``min_share`` percent, or beyond the first ``max_items``, are
    folded into a final ``others`` entry.
    """
    by_pos: dict[str, Counter] = defaultdict(Counter)
    for s in treebank:
        for t in s:
            by_pos[getattr(t, pos_field)][t.deprel.lower() if lowercase else t.deprel] += 1
    rows = []
    for pos in sorted(by_pos, key=lambda p: (-sum(by_pos[p].values()), p)):
        c = by_pos[pos]
        total = sum(c.values())
        ranked = sorted(c.items(), key=lambda kv: (-kv[1], kv[0]))
        kept, folded = [], 0
        for lbl, n in ranked:
            if 100.0 * n / total >= min_share and (max_items is None or len(kept) < max_items):
                kept.append(DistributionEntry(lbl, n))
            else:
                folded += n
        if folded:
            kept.append(DistributionEntry("others", folded))
        rows.append(PosDistribution(pos, total, kept))
    return DistributionReport(rows)


# -- everything at once ----------------------------------------------------------

def run_all_reports(gold: Treebank, preds: Systems, include_punct: bool = True,
                    bins: Mapping[str, BinSpec] | None = None) -> dict[str, Union[FactorReport, DistributionReport]]:
    bins = {**DEFAULT_BINS, **(bins or {})}
    out: dict = {
        "sentence_length": accuracy_by_sentence_length(gold, preds, bins["sentence_length"], include_punct),
    }
    for f in ARC_FACTORS:
        out[f] = precision_recall_by_arc_factor(gold, preds, f, bins[f], include_punct)
    out["dependent_pos"] = accuracy_by_dependent_pos(gold, preds, include_punct)
    out["dependency_type"] = precision_recall_by_deptype(gold, preds, include_punct)
    out["root_relation"] = root_relation_accuracy(gold, preds)
    out["pos_deptype_distribution"] = pos_deptype_distribution(gold)
    return out


def parse_bins(text: str) -> BinSpec:
    """``factor=e1,e2,...[+]``; a trailing ``+`` makes the last bin open-ended."""
    factor, _, rest = text.partition("=")
    overflow = rest.endswith("+")
    edges = tuple(int(x) for x in rest.rstrip("+").split(",") if x)
    if not edges or list(edges) != sorted(set(edges)):
        raise ValueError(f"bin edges must be strictly ascending integers: {text!r}")
    return BinSpec(factor.strip(), edges, overflow)
