"""Arc-factored graph-based parsing: features, scoring, MST decoding, perceptron training."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .hashing import AveragedPerceptron, FeatureIndex, conjoin, feature_id, feature_ids
from .treebank import DependencyGraph, Sentence, Treebank, validate_graph

log = logging.getLogger(__name__)

TEMPLATE_VERSION = "graph-arc-v1"
ROOT_TOKEN = "<root>"
BOS = "<s>"
EOS = "</s>"

# Frozen template list. Every template is conjoined with the attachment
# direction and emitted with and without the arc label.
TEMPLATES = (
    "hw",       # head form
    "hp",       # head POS
    "dw",       # dependent form
    "dp",       # dependent POS
    "hw.dw",
    "hp.dp",
    "hw.dp",
    "hp.dw",
    "hp.bp.dp",  # once per token strictly between head and dependent
    "hp.hp+1.dp-1.dp",
    "hp-1.hp.dp.dp+1",
    "dist",     # signed binned distance
)

FeatureVector = Counter  # feature id -> fire count


def distance_bin(head: int, dependent: int) -> str:
    d = dependent - head
    a = abs(d)
    if a <= 5:
        b = str(a)
    elif a <= 10:
        b = "6-10"
    else:
        b = "11+"
    return ("+" if d > 0 else "-") + b


def _columns(sentence: Sentence) -> tuple[list[str], list[str]]:
    forms = [ROOT_TOKEN] + [t.form for t in sentence]
    pos = [ROOT_TOKEN] + [t.pos for t in sentence]
    return forms, pos


def _arc_strings(forms, pos, h, d) -> list[str]:
    n_nodes = len(forms)
    direction = "R" if d > h else "L"
    hp, dp = pos[h], pos[d]
    hw, dw = forms[h], forms[d]
    hpl = pos[h - 1] if h > 0 else BOS
    hpr = pos[h + 1] if h + 1 < n_nodes else EOS
    dpl = pos[d - 1] if d > 0 else BOS
    dpr = pos[d + 1] if d + 1 < n_nodes else EOS
    out = [
        f"hw={hw}",
        f"hp={hp}",
        f"dw={dw}",
        f"dp={dp}",
        f"hw.dw={hw}\x1f{dw}",
        f"hp.dp={hp}\x1f{dp}",
        f"hw.dp={hw}\x1f{dp}",
        f"hp.dw={hp}\x1f{dw}",
        f"hp.hp+1.dp-1.dp={hp}\x1f{hpr}\x1f{dpl}\x1f{dp}",
        f"hp-1.hp.dp.dp+1={hpl}\x1f{hp}\x1f{dp}\x1f{dpr}",
        f"dist={distance_bin(h, d)}",
    ]
    for b in range(min(h, d) + 1, max(h, d)):
        out.append(f"hp.bp.dp={hp}\x1f{pos[b]}\x1f{dp}")
    return [f"{s}\x1e{direction}" for s in out]


def arc_feature_strings(sentence: Sentence, head: int, dependent: int, label: str | None = None) -> list[str]:
    """Template instantiations for one arc; with ``label``, the labeled copies follow."""
    forms, pos = _columns(sentence)
    base = _arc_strings(forms, pos, head, dependent)
    if label is None:
        return base
    return base + [f"{s}\x1dL={label}" for s in base]


def label_id(label: str) -> int:
    return feature_id(f"label={label}")


def extract_arc_features(sentence: Sentence, head: int, dependent: int, label: str) -> FeatureVector:
    """Sparse counts over hashed ids: unlabeled templates plus their labeled copies.

    The labeled id of a template is ``conjoin(template id, label_id(label))``.
    """
    n = len(sentence)
    if not (0 <= head <= n and 1 <= dependent <= n) or head == dependent:
        raise ValueError(f"invalid arc {head}->{dependent} for a sentence of length {n}")
    forms, pos = _columns(sentence)
    uid = feature_ids(_arc_strings(forms, pos, head, dependent))
    lid = conjoin(uid, label_id(label))
    return Counter(int(x) for x in np.concatenate([uid, lid]))


@dataclass
class SentenceArcFeatures:
    """All candidate-arc features of one sentence, grouped by arc.

    Entries are ordered by flat arc index ``h * (n + 1) + d``; ``offsets`` has
    one more entry than there are flat arc slots.
    """

    n_nodes: int
    arc: np.ndarray        # (E,) flat arc index per entry
    uid: np.ndarray        # (E,) unlabeled feature id
    lid: np.ndarray        # (E, L) labeled feature ids
    offsets: np.ndarray    # (n_nodes**2 + 1,)

    @classmethod
    def build(cls, sentence: Sentence, label_ids: np.ndarray) -> "SentenceArcFeatures":
        forms, pos = _columns(sentence)
        n_nodes = len(forms)
        strings, arcs = [], []
        for h in range(n_nodes):
            for d in range(1, n_nodes):
                if h == d:
                    continue
                s = _arc_strings(forms, pos, h, d)
                strings.extend(s)
                arcs.extend([h * n_nodes + d] * len(s))
        arc = np.array(arcs, dtype=np.int64)
        uid = feature_ids(strings)
        lid = np.stack([conjoin(uid, int(l)) for l in label_ids], axis=1) if len(label_ids) else np.empty((len(uid), 0), np.int64)
        offsets = np.searchsorted(arc, np.arange(n_nodes * n_nodes + 1))
        return cls(n_nodes, arc, uid, lid, offsets)

    def entries(self, h: int, d: int) -> slice:
        a = h * self.n_nodes + d
        return slice(self.offsets[a], self.offsets[a + 1])


@dataclass
class ScoreMatrix:
    """Best labeled score and its label for every candidate arc ``[h, d]``.

    Impossible arcs (``h == d`` or ``d == 0``) hold ``-inf``.
    """

    scores: np.ndarray
    best_label: np.ndarray
    label_names: tuple[str, ...] = ("_",)

    @classmethod
    def from_scores(cls, scores, label_names=("_",)) -> "ScoreMatrix":
        s = np.array(scores, dtype=np.float64, copy=True)
        np.fill_diagonal(s, -np.inf)
        s[:, 0] = -np.inf
        return cls(s, np.zeros(s.shape, dtype=np.int64), tuple(label_names))

    @property
    def n(self) -> int:
        return self.scores.shape[0] - 1


@dataclass
class ArcFactorModel:
    labels: tuple[str, ...]
    index: FeatureIndex
    weights: np.ndarray                      # (len(index) + 1,), last entry is the zero sentinel
    strict_root: bool = True
    template_version: str = TEMPLATE_VERSION
    _label_ids: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self._label_ids = np.array([label_id(l) for l in self.labels], dtype=np.int64)

    @classmethod
    def zeros(cls, labels, keys=(), strict_root: bool = True) -> "ArcFactorModel":
        index = FeatureIndex(np.asarray(keys, dtype=np.int64))
        return cls(tuple(labels), index, np.zeros(len(index) + 1), strict_root)

    @property
    def label_ids(self) -> np.ndarray:
        return self._label_ids

    def weight(self, fid: int) -> float:
        return float(self.weights[self.index.lookup(np.array([fid]))[0]])

    def as_dict(self) -> dict[int, float]:
        """Nonzero weights keyed by feature id."""
        nz = np.flatnonzero(self.weights[:-1])
        return {int(self.index.keys[i]): float(self.weights[i]) for i in nz}

    def featurize(self, sentence: Sentence) -> SentenceArcFeatures:
        return SentenceArcFeatures.build(sentence, self._label_ids)


def _score_features(feats: SentenceArcFeatures, index: FeatureIndex, weights: np.ndarray,
                    label_names: tuple[str, ...], uidx=None, lidx=None) -> ScoreMatrix:
    n_nodes = feats.n_nodes
    n_labels = feats.lid.shape[1]
    if uidx is None:
        uidx = index.lookup(feats.uid)
        lidx = index.lookup(feats.lid)
    slots = n_nodes * n_nodes
    su = np.bincount(feats.arc, weights=weights[uidx], minlength=slots)
    flat = (feats.arc[:, None] * n_labels + np.arange(n_labels)[None, :]).ravel()
    sl = np.bincount(flat, weights=weights[lidx].ravel(), minlength=slots * n_labels).reshape(slots, n_labels)
    total = su[:, None] + sl
    best = np.argmax(total, axis=1)
    scores = total[np.arange(slots), best].reshape(n_nodes, n_nodes)
    np.fill_diagonal(scores, -np.inf)
    scores[:, 0] = -np.inf
    return ScoreMatrix(scores, best.reshape(n_nodes, n_nodes), label_names)


def score_arcs(model: ArcFactorModel, sentence: Sentence, feats: SentenceArcFeatures | None = None) -> ScoreMatrix:
    if feats is None:
        feats = model.featurize(sentence)
    return _score_features(feats, model.index, model.weights, model.labels)


# -- decoding --------------------------------------------------------------------

def tree_score(scores: np.ndarray, heads: np.ndarray) -> float:
    d = np.arange(1, len(heads))
    return float(scores[heads[1:], d].sum())


def decode_heads(scores: np.ndarray, strict_single_root: bool = True) -> np.ndarray:
    """Maximum spanning arborescence rooted at 0 as a head array.

    In strict mode the root gets exactly one child: the unconstrained tree is
    kept if it already satisfies that, otherwise every root child is tried.
    """
    scores = np.asarray(scores, dtype=np.float64)
    heads = _kernels.chu_liu_edmonds(scores)
    n = scores.shape[0] - 1
    if not strict_single_root or n <= 1 or np.count_nonzero(heads[1:] == 0) == 1:
        return heads
    best, best_total = None, -np.inf
    for r in range(1, n + 1):
        s = scores.copy()
        s[0, :] = -np.inf
        s[0, r] = scores[0, r]
        h = _kernels.chu_liu_edmonds(s)
        total = tree_score(scores, h)
        if best is None or total > best_total:
            best, best_total = h, total
    return best


def decode_mst(score_matrix: ScoreMatrix, strict_single_root: bool = True) -> DependencyGraph:
    heads = decode_heads(score_matrix.scores, strict_single_root)
    names = score_matrix.label_names
    labels = [None] + [names[score_matrix.best_label[heads[d], d]] for d in range(1, len(heads))]
    return DependencyGraph.from_heads(heads, labels)


# -- training --------------------------------------------------------------------

def train_graph_model(treebank: Treebank, epochs: int = 10, seed: int = 0,
                      strict_root: bool = True, labels=None) -> ArcFactorModel:
    """Averaged structured perceptron over labeled arc-factored trees.

    Sentences are visited in a fresh ``default_rng(seed)`` permutation every
    epoch. A sentence whose decoded tree (arcs and labels) differs from gold
    moves weights toward the gold arcs and away from the predicted ones.
    """
    if len(treebank) == 0:
        raise ValueError("cannot train on an empty treebank")
    for i, s in enumerate(treebank):
        if not validate_graph(s, strict=strict_root).ok:
            raise ValueError(f"training sentence {i} is not a valid tree")
    labels = tuple(sorted(treebank.label_inventory)) if labels is None else tuple(labels)
    lab_ix = {l: i for i, l in enumerate(labels)}
    label_ids = np.array([label_id(l) for l in labels], dtype=np.int64)

    feats = [SentenceArcFeatures.build(s, label_ids) for s in treebank]
    index = FeatureIndex(np.concatenate([np.concatenate([f.uid, f.lid.ravel()]) for f in feats]))
    idx = [(index.lookup(f.uid), index.lookup(f.lid)) for f in feats]
    gold = [(s.heads(), np.array([-1] + [lab_ix[t.deprel] for t in s], dtype=np.int64)) for s in treebank]
    perc = AveragedPerceptron(len(index))
    rng = np.random.default_rng(seed)

    for epoch in range(epochs):
        mistakes = 0
        for i in rng.permutation(len(treebank)):
            f = feats[i]
            uidx, lidx = idx[i]
            sm = _score_features(f, index, perc.w, labels, uidx, lidx)
            ph = decode_heads(sm.scores, strict_root)
            gh, gl = gold[i]
            pl = sm.best_label[ph, np.arange(len(ph))]
            wrong = [d for d in range(1, len(ph)) if ph[d] != gh[d] or pl[d] != gl[d]]
            if wrong:
                mistakes += 1
                for d in wrong:
                    sl = f.entries(gh[d], d)
                    perc.update(uidx[sl], 1.0)
                    perc.update(lidx[sl, gl[d]], 1.0)
                    sl = f.entries(ph[d], d)
                    perc.update(uidx[sl], -1.0)
                    perc.update(lidx[sl, pl[d]], -1.0)
            perc.tick()
        log.info("graph epoch %d: %d/%d sentences mispredicted", epoch + 1, mistakes, len(treebank))

    return ArcFactorModel(labels, index, perc.averaged(), strict_root)


def parse_graph(model: ArcFactorModel, sentence: Sentence) -> DependencyGraph:
    return decode_mst(score_arcs(model, sentence), model.strict_root)


def parse_treebank(model: ArcFactorModel, treebank: Treebank) -> Treebank:
    return Treebank(tuple(s.with_graph(parse_graph(model, s)) for s in treebank))
