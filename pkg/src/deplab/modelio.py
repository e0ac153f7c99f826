"""Plain-text model files.

Layout (UTF-8, tab separated)::

    deplab-model    1
    kind            graph | transition
    template_version <tag>
    strict_root     0 | 1            (graph only)
    labels          <count>
    <one label per line>
    transitions     <count>          (transition only)
    <one transition per line>
    weights         <rows> <columns>
    <feature id> <weight> [<weight> ...]

Only rows with a nonzero averaged weight are written. Weights use ``repr`` so
a save/load cycle is exact.
"""

from __future__ import annotations

from pathlib import Path
from typing import Union

import numpy as np

from . import graph_parser, transition_parser
from .graph_parser import ArcFactorModel
from .hashing import FeatureIndex
from .transition_parser import Transition, TransitionModel

MAGIC = "deplab-model"
FORMAT_VERSION = "1"


class ModelFormatError(ValueError):
    pass


def _dump(f, kind, version, labels, weights, keys, extra=(), transitions=None):
    f.write(f"{MAGIC}\t{FORMAT_VERSION}\n")
    f.write(f"kind\t{kind}\n")
    f.write(f"template_version\t{version}\n")
    for k, v in extra:
        f.write(f"{k}\t{v}\n")
    f.write(f"labels\t{len(labels)}\n")
    for l in labels:
        f.write(f"{l}\n")
    if transitions is not None:
        f.write(f"transitions\t{len(transitions)}\n")
        for t in transitions:
            f.write(f"{t}\n")
    w = weights[:-1].reshape(len(keys), -1)
    nz = np.flatnonzero(np.any(w != 0, axis=1))
    f.write(f"weights\t{len(nz)}\t{w.shape[1]}\n")
    for i in nz:
        f.write(str(int(keys[i])) + "\t" + "\t".join(repr(float(x)) for x in w[i]) + "\n")


def save_model(model: Union[ArcFactorModel, TransitionModel], path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        if isinstance(model, ArcFactorModel):
            _dump(f, "graph", model.template_version, model.labels, model.weights, model.index.keys,
                  extra=[("strict_root", int(model.strict_root))])
        elif isinstance(model, TransitionModel):
            _dump(f, "transition", model.template_version, model.labels, model.weights, model.index.keys,
                  transitions=model.transitions)
        else:
            raise TypeError(f"cannot save {type(model).__name__}")


def load_model(path: Union[str, Path]) -> Union[ArcFactorModel, TransitionModel]:
    with open(path, encoding="utf-8") as f:
        lines = f.read().split("\n")
    pos = 0

    def take(key):
        nonlocal pos
        if pos >= len(lines):
            raise ModelFormatError(f"{path}: unexpected end of file, expected {key!r}")
        parts = lines[pos].split("\t")
        if parts[0] != key:
            raise ModelFormatError(f"{path}:{pos + 1}: expected {key!r}, found {parts[0]!r}")
        pos += 1
        return parts[1:]

    if take(MAGIC) != [FORMAT_VERSION]:
        raise ModelFormatError(f"{path}: unsupported model format")
    (kind,) = take("kind")
    (version,) = take("template_version")
    expected = {"graph": graph_parser.TEMPLATE_VERSION, "transition": transition_parser.TEMPLATE_VERSION}
    if kind not in expected:
        raise ModelFormatError(f"{path}: unknown model kind {kind!r}")
    if version != expected[kind]:
        raise ModelFormatError(
            f"{path}: template version {version!r} does not match this build's {expected[kind]!r}")
    strict = None
    if kind == "graph":
        (strict,) = take("strict_root")
    (n_labels,) = take("labels")
    labels = tuple(lines[pos:pos + int(n_labels)])
    pos += int(n_labels)
    if kind == "transition":
        (n_tr,) = take("transitions")
        stored = [Transition.parse(s) for s in lines[pos:pos + int(n_tr)]]
        pos += int(n_tr)
        if stored != transition_parser.transition_inventory(labels):
            raise ModelFormatError(f"{path}: transition inventory does not match the label list")
    n_rows, n_cols = (int(x) for x in take("weights"))
    body = lines[pos:pos + n_rows]
    if len(body) != n_rows:
        raise ModelFormatError(f"{path}: truncated weight table")
    keys = np.array([int(l.split("\t", 1)[0]) for l in body], dtype=np.int64)
    vals = np.array([[float(x) for x in l.split("\t")[1:]] for l in body], dtype=np.float64).reshape(n_rows, n_cols)
    order = np.argsort(keys, kind="stable")
    keys, vals = keys[order], vals[order]
    index = FeatureIndex(keys)
    if len(index) != n_rows:
        raise ModelFormatError(f"{path}: duplicate feature ids")
    if kind == "graph":
        weights = np.concatenate([vals[:, 0], [0.0]])
        return ArcFactorModel(labels, index, weights, strict_root=bool(int(strict)), template_version=version)
    weights = np.vstack([vals, np.zeros((1, n_cols))])
    return TransitionModel(labels, index, weights, template_version=version)
