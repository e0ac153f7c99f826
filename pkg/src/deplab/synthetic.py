"""Synthetic treebanks for smoke tests and demos.

A handful of random tree structures is drawn first; each structure owns its
own vocabulary, so a word identifies the structure and slot it came from.
Sentences are instances of those structures with word variants sampled per
slot.
"""

from __future__ import annotations

import numpy as np

from .factors import is_projective
from .treebank import DependencyGraph, Sentence, Token, Treebank

TAGS = ("N", "V", "A", "P", "R", "M", "E")


def _label(dep_pos: str, head_pos: str | None, left: bool) -> str:
    if head_pos is None:
        return "ROOT"
    if dep_pos == "CH":
        return "PUNCT"
    if dep_pos == "N" and head_pos == "V":
        return "SUB" if left else "DOB"
    if dep_pos in ("N", "P") and head_pos == "E":
        return "POB"
    if dep_pos == "M":
        return "DET"
    if dep_pos == "R":
        return "ADV"
    if dep_pos == "A" and head_pos in ("A", "V"):
        return "AMOD"
    if head_pos == "N":
        return "NMOD"
    if head_pos == "V":
        return "VMOD"
    return "DEP"


def random_structure(rng: np.random.Generator, n: int) -> tuple[np.ndarray, list[str]]:
    """Random single-root tree over ``n`` words, biased toward short arcs."""
    heads = np.full(n + 1, -1, dtype=np.int64)
    root = int(rng.integers(1, n + 1))
    heads[root] = 0
    attached = [root]
    for d in rng.permutation(np.arange(1, n + 1)):
        d = int(d)
        if d == root:
            continue
        cand = np.array(attached)
        w = 1.0 / np.abs(cand - d) ** 2
        heads[d] = int(rng.choice(cand, p=w / w.sum()))
        attached.append(d)
    pos = [""] + [str(rng.choice(TAGS)) for _ in range(n)]
    pos[root] = "V"
    if n >= 3 and heads[n] != -1 and n != root and not any(heads[1:] == n):
        pos[n] = "CH"
    return heads, pos


def synthetic_treebank(n_sentences: int, seed: int = 0, n_structures: int = 8,
                       min_len: int = 3, max_len: int = 12, variants: int = 3,
                       keep_nonprojective: float = 0.25) -> Treebank:
    """``keep_nonprojective`` is the acceptance probability of a drawn non-projective structure."""
    rng = np.random.default_rng(seed)
    structures = []
    for s in range(n_structures):
        n = int(rng.integers(min_len, max_len + 1))
        while True:
            heads, pos = random_structure(rng, n)
            if is_projective(DependencyGraph.from_heads(heads)) or rng.random() < keep_nonprojective:
                break
        labels = [None] + [_label(pos[d], pos[heads[d]] if heads[d] > 0 else None, d < heads[d])
                           for d in range(1, n + 1)]
        structures.append((heads, pos, labels))
    sentences = []
    for _ in range(n_sentences):
        s = int(rng.integers(n_structures))
        heads, pos, labels = structures[s]
        toks = []
        for d in range(1, len(heads)):
            v = int(rng.integers(variants))
            form = "." if pos[d] == "CH" else f"{pos[d].lower()}{s}_{d}_{v}"
            toks.append(Token(d, form, form, pos[d], pos[d], "_", int(heads[d]), labels[d]))
        sentences.append(Sentence(tuple(toks)))
    return Treebank(tuple(sentences))


def count_nonprojective(treebank: Treebank) -> int:
    return sum(not is_projective(s) for s in treebank)


def random_tree(rng: np.random.Generator, n: int, labels=("A", "B", "C"), single_root: bool = False) -> DependencyGraph:
    """Random labeled tree rooted at 0.

    Nodes join in a random order under an already attached node, so every
    rooted tree over ``0..n`` has nonzero probability (not uniform).
    """
    heads = np.full(n + 1, -1, dtype=np.int64)
    attached = [0]
    for d in rng.permutation(np.arange(1, n + 1)):
        if single_root and len(attached) > 1:
            cand = attached[1:]
        else:
            cand = attached
        heads[int(d)] = int(rng.choice(cand))
        attached.append(int(d))
    lab = [None] + [str(rng.choice(labels)) for _ in range(n)]
    return DependencyGraph.from_heads(heads, lab)


def sentence_from_graph(graph: DependencyGraph, pos=None) -> Sentence:
    heads = graph.heads()
    labels = graph.labels()
    toks = []
    for d in range(1, graph.n + 1):
        p = pos[d - 1] if pos is not None else "X"
        toks.append(Token(d, f"w{d}", "_", p, p, "_", int(heads[d]), labels[d]))
    return Sentence(tuple(toks))
