"""Word embedding table in word2vec text format, plus sentence pooling."""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from vid2kg.errors import DataError

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric runs."""
    return _TOKEN_RE.findall(text.lower())


@dataclass
class EmbeddingTable:
    dim: int
    vectors: dict[str, np.ndarray]

    def __contains__(self, token):
        return token in self.vectors

    def get(self, token):
        return self.vectors.get(token)


def load_embeddings(path) -> EmbeddingTable:
    """Read `count dim` header then `token v1 ... vD` rows."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise DataError(f"{path}: header must be 'count dim'")
        try:
            count, dim = int(header[0]), int(header[1])
        except ValueError:
            raise DataError(f"{path}: header must be two integers") from None
        if count < 0 or dim <= 0:
            raise DataError(f"{path}: bad header values {count} {dim}")
        vectors: dict[str, np.ndarray] = {}
        for lineno, line in enumerate(fh, start=2):
            parts = line.split()
            if not parts:
                continue
            token = parts[0]
            if token in vectors:
                raise DataError(f"{path}:{lineno}: duplicate token {token!r}")
            if len(parts) - 1 != dim:
                raise DataError(
                    f"{path}:{lineno}: token {token!r} has {len(parts) - 1} values, expected {dim}"
                )
            try:
                vec = np.array([float(v) for v in parts[1:]], dtype=np.float64)
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric value for {token!r}") from None
            vectors[token] = vec
    if len(vectors) != count:
        raise DataError(f"{path}: header declares {count} entries, found {len(vectors)}")
    return EmbeddingTable(dim, vectors)


def sentence_vector(words, emb: EmbeddingTable) -> np.ndarray:
    """Mean of in-vocabulary word vectors; zero vector when none are known."""
    known = [emb.vectors[w] for w in words if w in emb.vectors]
    if not known:
        return np.zeros(emb.dim, dtype=np.float64)
    return np.mean(known, axis=0)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))
