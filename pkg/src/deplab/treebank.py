"""CoNLL-X treebanks: reading, writing, structural validation and fold splitting."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple, Sequence, TextIO, Union

import numpy as np

ROOT = 0
EMPTY = "_"
N_COLUMNS = 10


class ConllError(ValueError):
    """Raised for malformed CoNLL-X input. Carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class Arc(NamedTuple):
    head: int
    dependent: int
    label: str


@dataclass(frozen=True)
class Token:
    index: int
    form: str
    lemma: str = EMPTY
    cpos: str = EMPTY
    pos: str = EMPTY
    feats: str = EMPTY
    head: int = ROOT
    deprel: str = EMPTY

    def __post_init__(self):
        if self.index < 1:
            raise ValueError(f"token index must be >= 1, got {self.index}")
        if self.head == self.index:
            raise ValueError(f"token {self.index} is its own head")
        if not self.deprel:
            raise ValueError(f"token {self.index} has an empty deprel")


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        for i, tok in enumerate(self.tokens, start=1):
            if tok.index != i:
                raise ValueError(f"token indices must be contiguous from 1; position {i} holds {tok.index}")

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[Token]:
        return iter(self.tokens)

    def __getitem__(self, i: int) -> Token:
        """1-based access; index 0 is the artificial root and has no token."""
        if i < 1:
            raise IndexError("index 0 is the artificial root")
        return self.tokens[i - 1]

    @property
    def forms(self) -> list[str]:
        return [t.form for t in self.tokens]

    def heads(self) -> np.ndarray:
        """Head array of length n + 1 with ``heads[0] == -1``."""
        return np.array([-1] + [t.head for t in self.tokens], dtype=np.int64)

    def graph(self) -> "DependencyGraph":
        return DependencyGraph(len(self), frozenset(Arc(t.head, t.index, t.deprel) for t in self.tokens))

    def with_graph(self, graph: "DependencyGraph") -> "Sentence":
        """Copy of this sentence whose heads and labels come from ``graph``."""
        by_dep = {a.dependent: a for a in graph.arcs}
        toks = []
        for t in self.tokens:
            a = by_dep[t.index]
            toks.append(Token(t.index, t.form, t.lemma, t.cpos, t.pos, t.feats, a.head, a.label))
        return Sentence(tuple(toks))


@dataclass(frozen=True)
class DependencyGraph:
    """A set of labeled arcs over nodes ``0..n``; node 0 is the artificial root.

    Nothing here enforces well-formedness; use :func:`validate_graph`.
    """

    n: int
    arcs: frozenset[Arc]

    @classmethod
    def from_heads(cls, heads: Sequence[int], labels: Sequence[str] | None = None) -> "DependencyGraph":
        """Build from a head array of length n + 1 (entry 0 ignored)."""
        n = len(heads) - 1
        if labels is None:
            labels = [EMPTY] * (n + 1)
        return cls(n, frozenset(Arc(int(heads[d]), d, labels[d]) for d in range(1, n + 1)))

    def heads(self) -> np.ndarray:
        """Head array (``-1`` for the root and any headless node).

        Only meaningful for single-head graphs; with several heads the last one wins.
        """
        h = np.full(self.n + 1, -1, dtype=np.int64)
        for a in sorted(self.arcs):
            h[a.dependent] = a.head
        return h

    def labels(self) -> list[str]:
        lab = [EMPTY] * (self.n + 1)
        for a in sorted(self.arcs):
            lab[a.dependent] = a.label
        return lab

    def arc_of(self, dependent: int) -> Arc:
        for a in self.arcs:
            if a.dependent == dependent:
                return a
        raise KeyError(dependent)


@dataclass(frozen=True)
class Treebank:
    sentences: tuple[Sentence, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self) -> Iterator[Sentence]:
        return iter(self.sentences)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Treebank(self.sentences[i])
        return self.sentences[i]

    @property
    def label_inventory(self) -> frozenset[str]:
        return frozenset(t.deprel for s in self.sentences for t in s)

    @property
    def pos_inventory(self) -> frozenset[str]:
        return frozenset(t.pos for s in self.sentences for t in s)

    @property
    def token_count(self) -> int:
        return sum(len(s) for s in self.sentences)

    def subset(self, indices: Iterable[int]) -> "Treebank":
        return Treebank(tuple(self.sentences[i] for i in indices))


# -- reading / writing ---------------------------------------------------------

def _parse_int(field_: str, what: str, line_no: int) -> int:
    try:
        return int(field_)
    except ValueError:
        raise ConllError(f"{what} {field_!r} is not an integer", line_no) from None


def _finish_block(rows: list[tuple[int, list[str]]]) -> Sentence:
    n = len(rows)
    tokens = []
    for pos, (line_no, cols) in enumerate(rows, start=1):
        index = _parse_int(cols[0], "index", line_no)
        head = _parse_int(cols[6], "head", line_no)
        if index != pos:
            raise ConllError(f"expected token index {pos}, found {index} (duplicate or non-contiguous)", line_no)
        if not 0 <= head <= n:
            raise ConllError(f"head {head} out of range [0, {n}]", line_no)
        try:
            tokens.append(Token(index, cols[1], cols[2], cols[3], cols[4], cols[5], head, cols[7]))
        except ValueError as e:
            raise ConllError(str(e), line_no) from None
    return Sentence(tuple(tokens))


def iter_conll(stream: Union[TextIO, Iterable[str]]) -> Iterator[Sentence]:
    """Yield sentences from a CoNLL-X stream. Columns 9-10 are ignored."""
    rows: list[tuple[int, list[str]]] = []
    line_no = 0
    for line_no, line in enumerate(stream, start=1):
        line = line.rstrip("\r\n")
        if not line.strip():
            if rows:
                yield _finish_block(rows)
                rows = []
            continue
        cols = line.split("\t")
        if len(cols) != N_COLUMNS:
            raise ConllError(f"expected {N_COLUMNS} tab-separated columns, found {len(cols)}", line_no)
        rows.append((line_no, cols))
    if rows:
        yield _finish_block(rows)


def parse_conll(text_or_stream: Union[str, TextIO, Iterable[str]]) -> Treebank:
    if isinstance(text_or_stream, str):
        text_or_stream = io.StringIO(text_or_stream)
    return Treebank(tuple(iter_conll(text_or_stream)))


def read_conll(path: Union[str, Path]) -> Treebank:
    with open(path, encoding="utf-8", newline="") as f:
        return parse_conll(f)


def _token_line(t: Token) -> str:
    cols = [str(t.index), t.form, t.lemma, t.cpos, t.pos, t.feats, str(t.head), t.deprel, EMPTY, EMPTY]
    return "\t".join(c if c != "" else EMPTY for c in cols)


def serialize_conll(treebank: Union[Treebank, Iterable[Sentence]]) -> str:
    blocks = ["".join(_token_line(t) + "\n" for t in s) for s in treebank]
    return "\n".join(blocks)


def write_conll(treebank: Union[Treebank, Iterable[Sentence]], path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(serialize_conll(treebank))


# -- validation ----------------------------------------------------------------

@dataclass
class ValidationReport:
    single_head: list[str] = field(default_factory=list)
    acyclic: list[str] = field(default_factory=list)
    connected: list[str] = field(default_factory=list)
    single_root: list[str] = field(default_factory=list)

    @property
    def violations(self) -> list[str]:
        return self.single_head + self.acyclic + self.connected + self.single_root

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate_graph(graph: Union[Sentence, DependencyGraph], strict: bool = True) -> ValidationReport:
    """Check that ``graph`` is a dependency tree rooted at node 0.

    Violations are collected, never raised. ``strict`` additionally demands
    exactly one child of the root.
    """
    if isinstance(graph, Sentence):
        graph = graph.graph()
    n = graph.n
    rep = ValidationReport()

    heads_of: dict[int, list[int]] = {d: [] for d in range(1, n + 1)}
    for a in graph.arcs:
        if not 0 <= a.head <= n:
            rep.single_head.append(f"arc {a.head}->{a.dependent}: head out of range")
        elif a.dependent == ROOT:
            rep.single_head.append(f"arc {a.head}->0: the root cannot be a dependent")
        elif not 1 <= a.dependent <= n:
            rep.single_head.append(f"arc {a.head}->{a.dependent}: dependent out of range")
        else:
            heads_of[a.dependent].append(a.head)
    head = {}
    for d, hs in heads_of.items():
        if len(hs) != 1:
            rep.single_head.append(f"node {d} has {len(hs)} heads")
        if hs:
            head[d] = min(hs)

    # walk up from every node; 0 = unvisited, 1 = on current path, 2 = settled
    state = [0] * (n + 1)
    reaches_root = [False] * (n + 1)
    reaches_root[ROOT] = True
    state[ROOT] = 2
    reported_cycles = set()
    for start in range(1, n + 1):
        path = []
        v = start
        while v is not None and state[v] == 0:
            state[v] = 1
            path.append(v)
            v = head.get(v)
        if v is not None and state[v] == 1:
            cyc = tuple(sorted(path[path.index(v):]))
            if cyc not in reported_cycles:
                reported_cycles.add(cyc)
                rep.acyclic.append(f"cycle through nodes {list(cyc)}")
        ok = v is not None and state[v] == 2 and reaches_root[v]
        for u in path:
            state[u] = 2
            reaches_root[u] = ok
    for d in range(1, n + 1):
        if not reaches_root[d]:
            rep.connected.append(f"node {d} is not connected to the root")

    if strict:
        root_children = sorted(a.dependent for a in graph.arcs if a.head == ROOT)
        if len(root_children) != 1:
            rep.single_root.append(f"root has {len(root_children)} children {root_children}, expected 1")
    return rep


# -- cross-validation folds ----------------------------------------------------

def fold_indices(n_sentences: int, k: int, seed: int) -> list[np.ndarray]:
    """Sentence ordinals per fold.

    Ordinals are permuted with ``numpy.random.default_rng(seed)`` (PCG64) and cut
    into ``k`` contiguous chunks whose sizes differ by at most one; each chunk is
    returned sorted.
    """
    if k < 2 or k > n_sentences:
        raise ValueError(f"k must be in [2, {n_sentences}], got {k}")
    perm = np.random.default_rng(seed).permutation(n_sentences)
    return [np.sort(chunk) for chunk in np.array_split(perm, k)]


def kfold_split(treebank: Treebank, k: int, seed: int = 0) -> list[tuple[Treebank, Treebank]]:
    """``k`` (train, test) pairs; pair ``i`` tests on fold ``i``."""
    folds = fold_indices(len(treebank), k, seed)
    pairs = []
    for i, test_idx in enumerate(folds):
        train_idx = np.sort(np.concatenate([f for j, f in enumerate(folds) if j != i]))
        pairs.append((treebank.subset(train_idx), treebank.subset(test_idx)))
    return pairs


def write_fold_manifest(folds: Sequence[np.ndarray], path: Union[str, Path]) -> None:
    """One line per fold: ``fold<TAB>ordinal ordinal ...`` (0-based ordinals)."""
    with open(path, "w", encoding="utf-8") as f:
        for i, fold in enumerate(folds):
            f.write(f"{i}\t{' '.join(str(int(x)) for x in fold)}\n")


def read_fold_manifest(path: Union[str, Path]) -> list[np.ndarray]:
    folds = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                _, rest = line.rstrip("\n").split("\t")
                folds.append(np.array([int(x) for x in rest.split()], dtype=np.int64))
    return folds
