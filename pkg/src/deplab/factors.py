"""Structural factors of arcs and trees.

All functions take a well-formed tree (a :class:`DependencyGraph` or a
:class:`Sentence`); the vectorized ``*s`` variants return one value per node,
indexed by dependent, with entry 0 unused.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import _kernels
from .treebank import Arc, DependencyGraph, Sentence

GraphLike = Union[DependencyGraph, Sentence]


def _heads(graph: GraphLike) -> np.ndarray:
    return graph.heads()


@dataclass(frozen=True)
class ArcFactors:
    dependency_length: int
    root_distance: int
    sibling_count: int
    degree: int


def dependency_length(arc: Arc) -> int:
    return abs(arc.head - arc.dependent)


def dependency_lengths(graph: GraphLike) -> np.ndarray:
    h = _heads(graph)
    out = np.abs(h - np.arange(len(h)))
    out[0] = 0
    return out


def root_distances(graph: GraphLike, strict: bool = True) -> np.ndarray:
    """Number of head links from each node up to the root; a root child is 1.

    Nodes that never reach the root (a cycle in a malformed graph) raise in
    strict mode and get -1 otherwise.
    """
    h = _heads(graph)
    n_nodes = len(h)
    dist = np.full(n_nodes, -1, dtype=np.int64)
    dist[0] = 0
    dead = np.zeros(n_nodes, dtype=bool)
    for start in range(1, n_nodes):
        path = []
        v = start
        while v >= 0 and dist[v] < 0 and not dead[v] and len(path) <= n_nodes:
            path.append(v)
            v = h[v]
        if v < 0 or dead[v] or dist[v] < 0:
            if strict:
                raise ValueError(f"node {start} does not reach the root")
            dead[path] = True
            continue
        base = dist[v]
        for i, u in enumerate(reversed(path), start=1):
            dist[u] = base + i
    return dist


def root_distance(graph: GraphLike, dependent: int) -> int:
    return int(root_distances(graph)[dependent])


def sibling_counts(graph: GraphLike) -> np.ndarray:
    """For the arc entering each node: how many other arcs share its head."""
    h = _heads(graph)
    children = np.bincount(h[1:], minlength=len(h))
    out = children[h] - 1
    out[0] = 0
    return out


def sibling_count(graph: GraphLike, arc: Arc) -> int:
    h = _heads(graph)
    return int(np.count_nonzero(h[1:] == arc.head)) - 1


def arc_degrees(graph: GraphLike) -> np.ndarray:
    """Non-projectivity degree of the arc entering each node.

    For an arc w -> u: the number of words strictly between w and u that are
    not descendants of w and whose head lies outside the open span (w, u).
    The root counts as position 0.
    """
    return _kernels.arc_degrees(_heads(graph))


def arc_degree(graph: GraphLike, arc: Arc) -> int:
    return int(arc_degrees(graph)[arc.dependent])


def is_projective(graph: GraphLike) -> bool:
    deg = arc_degrees(graph)
    return bool(deg.max(initial=0) == 0)


def arc_factors(graph: GraphLike) -> dict[int, ArcFactors]:
    """All four arc factors keyed by dependent."""
    length = dependency_lengths(graph)
    dist = root_distances(graph)
    sib = sibling_counts(graph)
    deg = arc_degrees(graph)
    return {
        d: ArcFactors(int(length[d]), int(dist[d]), int(sib[d]), int(deg[d]))
        for d in range(1, len(length))
    }


FACTOR_FUNCTIONS = {
    "dependency_length": dependency_lengths,
    "root_distance": root_distances,
    "sibling_count": sibling_counts,
    "degree": arc_degrees,
}
