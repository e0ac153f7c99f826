"""Deterministic 64-bit feature hashing and a sorted feature index."""

from __future__ import annotations

from hashlib import blake2b
from typing import Iterable

import numpy as np

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


def feature_id(s: str) -> int:
    """Signed 64-bit id: the first 8 bytes of BLAKE2b over the UTF-8 string."""
    return int.from_bytes(blake2b(s.encode("utf-8"), digest_size=8).digest(), "little", signed=True)


def feature_ids(strings: Iterable[str]) -> np.ndarray:
    return np.fromiter((feature_id(s) for s in strings), dtype=np.int64)


def conjoin(ids: np.ndarray, other: int) -> np.ndarray:
    """Hash of (id, other) for every id, via the splitmix64 finalizer.

    Used to attach a label to an already hashed template instantiation.
    """
    x = np.asarray(ids, dtype=np.int64).view(np.uint64)
    o = np.array([other], dtype=np.int64).view(np.uint64)[0]
    with np.errstate(over="ignore"):
        x = x ^ (o * _GOLDEN)
        x = x ^ (x >> np.uint64(30))
        x = x * _M1
        x = x ^ (x >> np.uint64(27))
        x = x * _M2
        x = x ^ (x >> np.uint64(31))
    return x.view(np.int64)


class FeatureIndex:
    """Maps feature ids to dense rows. Unknown ids map to ``len(index)``,
    a sentinel row that callers keep at zero."""

    def __init__(self, keys: np.ndarray):
        self.keys = np.unique(np.asarray(keys, dtype=np.int64))

    def __len__(self) -> int:
        return len(self.keys)

    @property
    def sentinel(self) -> int:
        return len(self.keys)

    def lookup(self, ids: np.ndarray) -> np.ndarray:
        ids = np.asarray(ids, dtype=np.int64)
        if len(self.keys) == 0:
            return np.full(ids.shape, 0, dtype=np.int64)
        pos = np.searchsorted(self.keys, ids)
        pos_c = np.minimum(pos, len(self.keys) - 1)
        hit = self.keys[pos_c] == ids
        return np.where(hit, pos_c, len(self.keys))


class AveragedPerceptron:
    """Weights plus the timestamped accumulator for averaging.

    After ``c`` ticks, ``averaged() = w - u / c`` equals the mean of the ``c``
    weight vectors seen at tick time.
    Row ``n_features`` is the unknown-feature sentinel and is never updated.
    """

    def __init__(self, n_features: int, n_classes: int | None = None):
        shape = (n_features + 1,) if n_classes is None else (n_features + 1, n_classes)
        self.n_features = n_features
        self.w = np.zeros(shape)
        self.u = np.zeros(shape)
        self.c = 0

    def update(self, rows: np.ndarray, delta: float, col: int | None = None) -> None:
        rows = rows[rows < self.n_features]
        if col is None:
            np.add.at(self.w, rows, delta)
            np.add.at(self.u, rows, self.c * delta)
        else:
            np.add.at(self.w[:, col], rows, delta)
            np.add.at(self.u[:, col], rows, self.c * delta)

    def tick(self) -> None:
        self.c += 1

    def averaged(self) -> np.ndarray:
        avg = self.w - self.u / self.c if self.c else self.w.copy()
        avg[self.n_features] = 0.0
        return avg
