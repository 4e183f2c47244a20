"""PPMI embeddings: positive PMI transform of co-occurrence counts + truncated SVD.

Fully deterministic: counting is exact-integer, the PMI transform is
elementwise, and the SVD runs with a fixed ARPACK start vector. Training twice,
or on a sentence-shuffled corpus, yields bit-identical matrices.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.linalg import svds

from ..corpus import Corpus, Vocabulary, build_vocab
from ..errors import NumericError
from .config import TrainerConfig
from .cooc import CooccurrenceMatrix, build_cooccurrence
from .space import EmbeddingSpace, SpaceMeta


def ppmi_transform(cooc: CooccurrenceMatrix) -> csr_matrix:
    """max(0, log(N*n(w,c) / (n(w)*n(c)))) per stored cell; zeros stay absent."""
    if cooc.nnz == 0 or cooc.total() <= 0:
        raise NumericError("PPMI transform requires positive total co-occurrence mass")
    n = cooc.vocab_size
    mat = cooc.to_csr()
    row_sums = np.asarray(mat.sum(axis=1)).ravel()
    col_sums = np.asarray(mat.sum(axis=0)).ravel()
    total = cooc.weights.sum()
    pmi = np.log(
        (total * cooc.weights) / (row_sums[cooc.rows] * col_sums[cooc.cols])
    )
    keep = pmi > 0
    out = csr_matrix(
        (pmi[keep], (cooc.rows[keep], cooc.cols[keep])), shape=(n, n)
    )
    return out


def truncated_svd(
    matrix, d: int, method: str = "auto"
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rank-d SVD with nonincreasing singular values and orthonormal U, V columns.

    Returns (U, s, V) with matrix ~= U @ diag(s) @ V.T. The sparse ARPACK path
    runs with a fixed start vector (determinism); when d reaches the matrix
    rank the dense path is used so trailing zero singular values still come
    with orthonormal columns.
    """
    if hasattr(matrix, "toarray"):
        shape = matrix.shape
        dense = None
    else:
        matrix = np.asarray(matrix, dtype=np.float64)
        shape = matrix.shape
        dense = matrix
    if d < 1 or d > min(shape):
        raise ValueError(f"d={d} must be in [1, min{shape}]")
    if method not in ("auto", "arpack", "dense"):
        raise ValueError(f"unknown SVD method {method!r}")

    use_arpack = d < min(shape) and (method == "arpack" or (method == "auto" and min(shape) > 32))
    if use_arpack:
        v0 = np.full(min(shape), 1.0 / np.sqrt(min(shape)))  # fixed start: determinism
        u, s, vt = svds(matrix, k=d, v0=v0)
        order = np.argsort(-s, kind="stable")
        u, s, vt = u[:, order], s[order], vt[order]
        if method == "arpack" or s[-1] > 1e-10 * max(s[0], 1.0):
            return u, s, vt.T
        # near-singular tail in auto mode: ARPACK vectors are unreliable there
    if dense is None:
        dense = matrix.toarray()
    u, s, vt = np.linalg.svd(dense, full_matrices=True)
    return u[:, :d], s[:d], vt[:d].T


def train_ppmi(
    corpus: Corpus, config: TrainerConfig, vocab: Vocabulary | None = None
) -> EmbeddingSpace:
    """PPMI matrix -> truncated SVD -> rows U * sigma^svd_exponent.

    Words whose PPMI row has no positive entry get an exact zero row and are
    flagged in the space; neighbor queries reject them instead of tie-breaking
    arbitrarily.
    """
    if vocab is None:
        vocab = build_vocab(corpus, config.min_count)
    if len(vocab) == 0:
        raise NumericError("empty vocabulary: nothing to train")
    cooc = build_cooccurrence(corpus, vocab, config.window, config.ppmi_weighting)
    ppmi = ppmi_transform(cooc)
    d = min(config.dimension, len(vocab))
    u, s, _ = truncated_svd(ppmi, d)
    matrix = u * (s**config.svd_exponent)
    if d < config.dimension:
        matrix = np.pad(matrix, ((0, 0), (0, config.dimension - d)))
    occupied = np.diff(ppmi.indptr) > 0
    zero_rows = frozenset(int(i) for i in np.flatnonzero(~occupied))
    matrix[~occupied] = 0.0
    meta = SpaceMeta(
        algorithm="ppmi",
        corpus_id=corpus.id,
        domain=corpus.domain,
        dimension=config.dimension,
        seed=config.seed,
        params=config.to_params(),
    )
    return EmbeddingSpace(vocab, matrix, meta, zero_rows=zero_rows)
