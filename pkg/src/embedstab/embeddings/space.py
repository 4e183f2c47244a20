"""EmbeddingSpace container and its text serialization.

Text format: a header line "<|V|> <d>", then one line per word,
"<token> <v1> ... <vd>". A sidecar JSON file (path + ".meta.json") records
algorithm, corpus id, domain, dimension, seed, trainer params, vocabulary
counts, and any flagged all-zero rows, so a load round-trips the full value.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from ..corpus import Vocabulary
from ..errors import DataError

ALGORITHMS = ("ppmi", "sgns", "glove")


@dataclass(frozen=True)
class SpaceMeta:
    algorithm: str
    corpus_id: str
    domain: str
    dimension: int
    seed: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")

    @property
    def space_id(self) -> str:
        return f"{self.algorithm}:{self.corpus_id}:d{self.dimension}:s{self.seed}"


class EmbeddingSpace:
    """A |V| x d real matrix with a vocabulary and training metadata."""

    def __init__(
        self,
        vocab: Vocabulary,
        matrix: np.ndarray,
        meta: SpaceMeta,
        zero_rows: frozenset[int] = frozenset(),
    ):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != len(vocab):
            raise ValueError("matrix row count must equal vocabulary size")
        if matrix.shape[1] != meta.dimension:
            raise ValueError("matrix width does not match meta.dimension")
        self.vocab = vocab
        self.matrix = matrix
        self.meta = meta
        self.zero_rows = frozenset(zero_rows)
        self._unit = None

    @property
    def id(self) -> str:
        return self.meta.space_id

    @property
    def dimension(self) -> int:
        return self.matrix.shape[1]

    def vector(self, token: str) -> np.ndarray:
        return self.matrix[self.vocab.index(token)]

    def unit_matrix(self) -> np.ndarray:
        """Row-normalized copy; flagged zero rows stay zero. Cached."""
        if self._unit is None:
            norms = np.linalg.norm(self.matrix, axis=1)
            safe = np.where(norms > 0, norms, 1.0)
            self._unit = self.matrix / safe[:, None]
        return self._unit

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, EmbeddingSpace)
            and self.vocab == other.vocab
            and self.meta == other.meta
            and self.zero_rows == other.zero_rows
            and np.array_equal(self.matrix, other.matrix)
        )


def meta_path(path: str) -> str:
    return path + ".meta.json"


def save_space(space: EmbeddingSpace, path: str) -> None:
    v, d = space.matrix.shape
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{v} {d}\n")
        for i in range(v):
            row = " ".join(repr(float(x)) for x in space.matrix[i])
            fh.write(f"{space.vocab.token(i)} {row}\n")
    sidecar = {
        "algorithm": space.meta.algorithm,
        "corpus_id": space.meta.corpus_id,
        "domain": space.meta.domain,
        "dimension": space.meta.dimension,
        "seed": space.meta.seed,
        "params": space.meta.params,
        "min_count": space.vocab.min_count,
        "vocab_counts": list(space.vocab.counts),
        "zero_rows": sorted(space.zero_rows),
    }
    with open(meta_path(path), "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, sort_keys=True)
        fh.write("\n")


def load_space(path: str) -> EmbeddingSpace:
    mpath = meta_path(path)
    if not os.path.exists(mpath):
        raise DataError(f"missing metadata sidecar {mpath!r}")
    with open(mpath, encoding="utf-8") as fh:
        side = json.load(fh)
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        try:
            v, d = (int(x) for x in header.split())
        except ValueError as exc:
            raise DataError(f"{path!r}: malformed header {header!r}") from exc
        if d != side["dimension"]:
            raise DataError(
                f"{path!r}: header dimension {d} does not match metadata "
                f"dimension {side['dimension']}"
            )
        tokens: list[str] = []
        matrix = np.empty((v, d), dtype=np.float64)
        for i in range(v):
            line = fh.readline()
            if not line:
                raise DataError(f"{path!r}: expected {v} rows, file ends at row {i}")
            parts = line.rstrip("\n").split(" ")
            if len(parts) != d + 1:
                raise DataError(
                    f"{path!r}: row {i + 1} has {len(parts) - 1} values, expected {d}"
                )
            tokens.append(parts[0])
            matrix[i] = [float(x) for x in parts[1:]]
        extra = fh.readline()
        if extra.strip():
            raise DataError(f"{path!r}: unexpected content after row {v}")

    counts = side.get("vocab_counts")
    min_count = side.get("min_count", 1)
    if counts is None or len(counts) != v:
        raise DataError(f"{mpath!r}: vocab_counts missing or wrong length")
    vocab = Vocabulary(dict(zip(tokens, counts)), min_count)
    if vocab.tokens != tuple(tokens):
        raise DataError(f"{path!r}: token order violates vocabulary index rule")
    meta = SpaceMeta(
        algorithm=side["algorithm"],
        corpus_id=side["corpus_id"],
        domain=side["domain"],
        dimension=side["dimension"],
        seed=side["seed"],
        params=side.get("params", {}),
    )
    return EmbeddingSpace(
        vocab, matrix, meta, zero_rows=frozenset(side.get("zero_rows", []))
    )
