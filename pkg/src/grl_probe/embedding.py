"""Embedding container and its text file format."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DivergenceError(FloatingPointError):
    def __init__(self, message, last_finite_loss=None):
        super().__init__(message)
        self.last_finite_loss = last_finite_loss


@dataclass
class EmbeddingMatrix:
    vectors: np.ndarray
    metadata: dict = field(default_factory=dict)
    context: np.ndarray | None = None
    loss_trace: np.ndarray | None = None

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        if self.vectors.ndim != 2:
            raise ValueError("embedding vectors must be a 2-D array")
        if not np.isfinite(self.vectors).all():
            raise DivergenceError("embedding contains non-finite entries")

    @property
    def shape(self):
        return self.vectors.shape

    def __len__(self):
        return len(self.vectors)

    def write(self, path, labels=None):
        """Header ``N d`` then one ``node_id x_1 ... x_d`` line per node."""
        n, d = self.vectors.shape
        with Path(path).open("w") as fh:
            fh.write(f"{n} {d}\n")
            for u in range(n):
                nid = labels[u] if labels is not None else u
                fh.write(str(nid) + " " + " ".join(repr(float(x)) for x in self.vectors[u]) + "\n")

    @classmethod
    def read(cls, path):
        """Returns the matrix (rows in file order) with node ids in metadata."""
        lines = Path(path).read_text().splitlines()
        n, d = (int(x) for x in lines[0].split())
        ids, rows = [], []
        for line in lines[1:1 + n]:
            toks = line.split()
            if len(toks) != d + 1:
                raise ValueError(f"expected {d + 1} fields, got {len(toks)}")
            ids.append(toks[0])
            rows.append([float(x) for x in toks[1:]])
        if len(rows) != n:
            raise ValueError(f"header announces {n} rows, found {len(rows)}")
        return cls(np.array(rows).reshape(n, d), {"node_ids": ids})
