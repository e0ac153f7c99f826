"""Greedy arc-standard parsing with SWAP for non-projective trees."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .graph_parser import distance_bin
from .hashing import AveragedPerceptron, FeatureIndex, feature_ids
from .treebank import ROOT, Arc, DependencyGraph, Sentence, Treebank, validate_graph

log = logging.getLogger(__name__)

TEMPLATE_VERSION = "transition-swap-v1"
SHIFT, SWAP, LEFT_ARC, RIGHT_ARC = "SHIFT", "SWAP", "LEFT_ARC", "RIGHT_ARC"
KIND_ORDER = (SHIFT, SWAP, LEFT_ARC, RIGHT_ARC)
NULL = "<null>"
ROOT_TOKEN = "<root>"


class Transition(NamedTuple):
    kind: str
    label: Optional[str] = None

    def __str__(self) -> str:
        return self.kind if self.label is None else f"{self.kind}({self.label})"

    @classmethod
    def parse(cls, s: str) -> "Transition":
        if "(" in s:
            kind, label = s[:-1].split("(", 1)
            return cls(kind, label)
        return cls(s)


def transition_inventory(labels) -> list[Transition]:
    """SHIFT, SWAP, then LEFT_ARC and RIGHT_ARC per label; this is also the tie order."""
    return ([Transition(SHIFT), Transition(SWAP)]
            + [Transition(LEFT_ARC, l) for l in labels]
            + [Transition(RIGHT_ARC, l) for l in labels])


@dataclass
class Configuration:
    stack: list[int]
    buffer: list[int]
    arcs: dict[int, tuple[int, str]] = field(default_factory=dict)  # dependent -> (head, label)

    def copy(self) -> "Configuration":
        return Configuration(list(self.stack), list(self.buffer), dict(self.arcs))

    @property
    def terminal(self) -> bool:
        return not self.buffer and self.stack == [ROOT]

    def arc_set(self) -> frozenset[Arc]:
        return frozenset(Arc(h, d, l) for d, (h, l) in self.arcs.items())


def initial_config(sentence: Sentence) -> Configuration:
    n = len(sentence)
    if n == 0:
        raise ValueError("cannot parse an empty sentence")
    return Configuration([ROOT], list(range(1, n + 1)))


def legal_transitions(config: Configuration) -> set[str]:
    """Legal transition kinds. Word order is the node index itself."""
    legal = set()
    if config.buffer:
        legal.add(SHIFT)
    if len(config.stack) >= 2:
        s1, s0 = config.stack[-2], config.stack[-1]
        legal.add(RIGHT_ARC)
        if s1 != ROOT:
            legal.add(LEFT_ARC)
            if s1 < s0:
                legal.add(SWAP)
    return legal


class IllegalTransition(ValueError):
    pass


def _apply(config: Configuration, t: Transition) -> None:
    """In-place version of :func:`apply_transition`."""
    if t.kind not in legal_transitions(config):
        raise IllegalTransition(f"{t} is not legal in stack={config.stack} buffer={config.buffer}")
    st = config.stack
    if t.kind == SHIFT:
        st.append(config.buffer.pop(0))
    elif t.kind == LEFT_ARC:
        s0 = st.pop()
        s1 = st.pop()
        config.arcs[s1] = (s0, t.label)
        st.append(s0)
    elif t.kind == RIGHT_ARC:
        s0 = st.pop()
        config.arcs[s0] = (st[-1], t.label)
    elif t.kind == SWAP:
        s0 = st.pop()
        s1 = st.pop()
        st.append(s0)
        config.buffer.insert(0, s1)
    else:
        raise IllegalTransition(f"unknown transition {t}")


def apply_transition(config: Configuration, transition: Transition) -> Configuration:
    out = config.copy()
    _apply(out, transition)
    return out


# -- oracle ----------------------------------------------------------------------

def projective_order(heads) -> np.ndarray:
    """Position of every node in the in-order traversal of the tree.

    Left children (by index) come before their head, right children after.
    """
    n_nodes = len(heads)
    children = [[] for _ in range(n_nodes)]
    for d in range(1, n_nodes):
        children[heads[d]].append(d)
    order = []
    # iterative in-order: (node, expanded?)
    todo = [(ROOT, False)]
    while todo:
        v, expanded = todo.pop()
        if expanded:
            order.append(v)
            continue
        left = [c for c in children[v] if c < v]
        right = [c for c in children[v] if c > v]
        for c in reversed(right):
            todo.append((c, False))
        todo.append((v, True))
        for c in reversed(left):
            todo.append((c, False))
    pos = np.empty(n_nodes, dtype=np.int64)
    pos[np.array(order)] = np.arange(n_nodes)
    return pos


def _oracle_step(config: Configuration, heads, labels, proj, n_missing) -> Transition:
    st = config.stack
    if len(st) >= 2:
        s1, s0 = st[-2], st[-1]
        if s1 != ROOT and heads[s1] == s0 and n_missing[s1] == 0:
            return Transition(LEFT_ARC, labels[s1])
        if heads[s0] == s1 and n_missing[s0] == 0:
            return Transition(RIGHT_ARC, labels[s0])
        if s1 != ROOT and proj[s1] > proj[s0]:
            return Transition(SWAP)
    return Transition(SHIFT)


def _oracle_walk(sentence: Sentence, graph: DependencyGraph | None = None):
    """Yield (configuration before the step, gold transition) along the oracle path."""
    graph = sentence.graph() if graph is None else graph
    heads = graph.heads()
    labels = graph.labels()
    proj = projective_order(heads)
    n_missing = np.bincount(heads[1:], minlength=len(heads))
    config = initial_config(sentence)
    while not config.terminal:
        t = _oracle_step(config, heads, labels, proj, n_missing)
        yield config, t
        if t.kind == LEFT_ARC:
            n_missing[config.stack[-1]] -= 1
        elif t.kind == RIGHT_ARC:
            n_missing[config.stack[-2]] -= 1
        config = config.copy()
        _apply(config, t)


def static_oracle(sentence: Sentence, gold_graph: DependencyGraph | None = None) -> list[Transition]:
    """Transition sequence that rebuilds ``gold_graph`` (default: the sentence's own tree).

    SWAP fires whenever the two top stack nodes are out of projective order,
    i.e. the eager variant.
    """
    return [t for _, t in _oracle_walk(sentence, gold_graph)]


def replay(sentence: Sentence, transitions) -> Configuration:
    config = initial_config(sentence)
    for t in transitions:
        _apply(config, t)
    return config


# -- features --------------------------------------------------------------------

def _children(config: Configuration):
    left, right = {}, {}
    for d, (h, _) in config.arcs.items():
        if d < h:
            if h not in left or d < left[h]:
                left[h] = d
        else:
            if h not in right or d > right[h]:
                right[h] = d
    return left, right


def config_feature_strings(sentence: Sentence, config: Configuration) -> list[str]:
    forms = [ROOT_TOKEN] + [t.form for t in sentence]
    pos = [ROOT_TOKEN] + [t.pos for t in sentence]
    st, buf = config.stack, config.buffer

    def node(seq, i):
        return seq[i] if 0 <= i < len(seq) else None

    s0, s1, s2 = node(st, len(st) - 1), node(st, len(st) - 2), node(st, len(st) - 3)
    b0, b1, b2 = node(buf, 0), node(buf, 1), node(buf, 2)

    def w(x):
        return NULL if x is None else forms[x]

    def p(x):
        return NULL if x is None else pos[x]

    left, right = _children(config)

    def lab(x):
        return NULL if x is None else config.arcs[x][1]

    def lc(x):
        return lab(left.get(x)) if x is not None else NULL

    def rc(x):
        return lab(right.get(x)) if x is not None else NULL

    dist = distance_bin(s1, s0) if s0 is not None and s1 is not None else NULL
    f = [
        "bias",
        f"s0w={w(s0)}", f"s0p={p(s0)}", f"s0wp={w(s0)}\x1f{p(s0)}",
        f"s1w={w(s1)}", f"s1p={p(s1)}", f"s1wp={w(s1)}\x1f{p(s1)}",
        f"s2w={w(s2)}", f"s2p={p(s2)}",
        f"b0w={w(b0)}", f"b0p={p(b0)}", f"b0wp={w(b0)}\x1f{p(b0)}",
        f"b1w={w(b1)}", f"b1p={p(b1)}",
        f"b2w={w(b2)}", f"b2p={p(b2)}",
        f"s0p.s1p={p(s0)}\x1f{p(s1)}",
        f"s0w.s1w={w(s0)}\x1f{w(s1)}",
        f"s0w.s1p={w(s0)}\x1f{p(s1)}",
        f"s0p.s1w={p(s0)}\x1f{w(s1)}",
        f"s0p.b0p={p(s0)}\x1f{p(b0)}",
        f"s0w.b0w={w(s0)}\x1f{w(b0)}",
        f"s2p.s1p.s0p={p(s2)}\x1f{p(s1)}\x1f{p(s0)}",
        f"s1p.s0p.b0p={p(s1)}\x1f{p(s0)}\x1f{p(b0)}",
        f"s0p.b0p.b1p={p(s0)}\x1f{p(b0)}\x1f{p(b1)}",
        f"b0p.b1p.b2p={p(b0)}\x1f{p(b1)}\x1f{p(b2)}",
        f"s0lc={lc(s0)}", f"s0rc={rc(s0)}", f"s1lc={lc(s1)}", f"s1rc={rc(s1)}",
        f"s0p.s0lc.s0rc={p(s0)}\x1f{lc(s0)}\x1f{rc(s0)}",
        f"s1p.s1lc.s1rc={p(s1)}\x1f{lc(s1)}\x1f{rc(s1)}",
        f"dist={dist}",
        f"dist.s0p.s1p={dist}\x1f{p(s0)}\x1f{p(s1)}",
    ]
    return f


def extract_config_features(sentence: Sentence, config: Configuration) -> np.ndarray:
    return feature_ids(config_feature_strings(sentence, config))


# -- model -----------------------------------------------------------------------

@dataclass
class TransitionModel:
    labels: tuple[str, ...]
    index: FeatureIndex
    weights: np.ndarray                       # (len(index) + 1, n_transitions), last row zero
    template_version: str = TEMPLATE_VERSION
    transitions: list[Transition] = field(init=False)

    def __post_init__(self):
        self.transitions = transition_inventory(self.labels)
        self._kind_mask = {k: np.array([t.kind == k for t in self.transitions]) for k in KIND_ORDER}

    @classmethod
    def zeros(cls, labels, keys=()) -> "TransitionModel":
        index = FeatureIndex(np.asarray(keys, dtype=np.int64))
        return cls(tuple(labels), index, np.zeros((len(index) + 1, 2 + 2 * len(labels))))

    def legal_mask(self, config: Configuration) -> np.ndarray:
        mask = np.zeros(len(self.transitions), dtype=bool)
        for k in legal_transitions(config):
            mask |= self._kind_mask[k]
        return mask

    def best(self, rows: np.ndarray, legal: np.ndarray, weights: np.ndarray | None = None) -> int:
        w = self.weights if weights is None else weights
        scores = w[rows].sum(axis=0)
        scores = np.where(legal, scores, -np.inf)
        return int(np.argmax(scores))

    @property
    def fallback_label(self) -> str:
        for l in self.labels:
            if l.upper() == "ROOT":
                return l
        return self.labels[0] if self.labels else "ROOT"


def train_transition_model(treebank: Treebank, epochs: int = 10, seed: int = 0, labels=None) -> TransitionModel:
    """Averaged multiclass perceptron over static-oracle configurations.

    Each oracle configuration is one example: if the best legal transition under
    the current weights is not the oracle's, the oracle transition's weights get
    +1 and the predicted one's -1 on the configuration's features.
    """
    if len(treebank) == 0:
        raise ValueError("cannot train on an empty treebank")
    for i, s in enumerate(treebank):
        if not validate_graph(s, strict=False).ok:
            raise ValueError(f"training sentence {i} is not a valid tree")
    labels = tuple(sorted(treebank.label_inventory)) if labels is None else tuple(labels)
    model = TransitionModel.zeros(labels)
    t_ix = {t: i for i, t in enumerate(model.transitions)}

    examples = []
    for s in treebank:
        seq = [(extract_config_features(s, c), t_ix[t], model.legal_mask(c)) for c, t in _oracle_walk(s)]
        examples.append(seq)
    index = FeatureIndex(np.concatenate([f for seq in examples for f, _, _ in seq]))
    examples = [[(index.lookup(f), g, m) for f, g, m in seq] for seq in examples]
    model = TransitionModel(labels, index, np.zeros((len(index) + 1, len(model.transitions))))
    perc = AveragedPerceptron(len(index), len(model.transitions))
    rng = np.random.default_rng(seed)

    for epoch in range(epochs):
        errors = total = 0
        for i in rng.permutation(len(examples)):
            for rows, gold, legal in examples[i]:
                pred = model.best(rows, legal, perc.w)
                if pred != gold:
                    errors += 1
                    perc.update(rows, 1.0, gold)
                    perc.update(rows, -1.0, pred)
                perc.tick()
                total += 1
        log.info("transition epoch %d: %d/%d oracle decisions wrong", epoch + 1, errors, total)

    model.weights = perc.averaged()
    return model


def parse_greedy(model: TransitionModel, sentence: Sentence) -> DependencyGraph:
    config = initial_config(sentence)
    n = len(sentence)
    # SWAP count is bounded by the number of word pairs
    max_steps = 2 * n + n * (n - 1) // 2 + 1
    for _ in range(max_steps):
        if config.terminal:
            break
        rows = model.index.lookup(extract_config_features(sentence, config))
        t = model.transitions[model.best(rows, model.legal_mask(config))]
        _apply(config, t)
    arcs = dict(config.arcs)
    for d in range(1, n + 1):
        if d not in arcs:
            arcs[d] = (ROOT, model.fallback_label)
    return DependencyGraph(n, frozenset(Arc(h, d, l) for d, (h, l) in arcs.items()))


def parse_treebank(model: TransitionModel, treebank: Treebank) -> Treebank:
    return Treebank(tuple(s.with_graph(parse_greedy(model, s)) for s in treebank))
