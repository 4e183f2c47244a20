"""Sliding-window co-occurrence counting.

Counts are accumulated as exact integers scaled by lcm(1..window), so the
resulting weights are bit-identical regardless of sentence order. This is what
makes PPMI and GloVe training provably invariant to corpus shuffles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..corpus import Corpus, Vocabulary
from ..errors import NumericError

WEIGHTINGS = ("flat", "inverse")


@dataclass
class CooccurrenceMatrix:
    """Sparse symmetric co-occurrence weights in row-major COO order."""

    rows: np.ndarray  # int32
    cols: np.ndarray  # int32
    weights: np.ndarray  # float64, >= 0
    vocab_size: int
    window: int
    weighting: str

    @property
    def nnz(self) -> int:
        return len(self.weights)

    def total(self) -> float:
        return float(self.weights.sum())

    def weight(self, i: int, j: int) -> float:
        key = np.int64(i) * self.vocab_size + j
        keys = self.rows.astype(np.int64) * self.vocab_size + self.cols
        pos = np.searchsorted(keys, key)
        if pos < len(keys) and keys[pos] == key:
            return float(self.weights[pos])
        return 0.0

    def to_dict(self) -> dict[tuple[int, int], float]:
        return {
            (int(r), int(c)): float(w)
            for r, c, w in zip(self.rows, self.cols, self.weights)
        }

    def to_csr(self):
        from scipy.sparse import csr_matrix

        n = self.vocab_size
        return csr_matrix((self.weights, (self.rows, self.cols)), shape=(n, n))


def encode_corpus(corpus: Corpus, vocab: Vocabulary) -> tuple[np.ndarray, np.ndarray]:
    """Flatten the corpus into (token ids, sentence ids); OOV tokens become -1.

    OOV tokens keep their positions so window distances are unaffected.
    """
    index = {tok: i for i, tok in enumerate(vocab.tokens)}
    ids = np.empty(corpus.token_count, dtype=np.int32)
    sent_ids = np.empty(corpus.token_count, dtype=np.int64)
    pos = 0
    for s, sent in enumerate(corpus.sentences):
        for tok in sent:
            ids[pos] = index.get(tok, -1)
            sent_ids[pos] = s
            pos += 1
    return ids, sent_ids


def build_cooccurrence(
    corpus: Corpus, vocab: Vocabulary, window: int, weighting: str = "flat"
) -> CooccurrenceMatrix:
    """Count in-vocab neighbor pairs within `window` positions on both sides.

    Each pair at distance d contributes 1 (flat) or 1/d (inverse) to both
    ordered entries, so the matrix is symmetric.
    """
    if weighting not in WEIGHTINGS:
        raise ValueError(f"weighting must be one of {WEIGHTINGS}")
    if window < 1:
        raise ValueError("window must be >= 1")
    v = len(vocab)
    empty = CooccurrenceMatrix(
        rows=np.empty(0, np.int32),
        cols=np.empty(0, np.int32),
        weights=np.empty(0, np.float64),
        vocab_size=v,
        window=window,
        weighting=weighting,
    )
    if v == 0 or corpus.token_count == 0:
        return empty

    ids, sent_ids = encode_corpus(corpus, vocab)
    scale = math.lcm(*range(1, window + 1))
    key_chunks: list[np.ndarray] = []
    wt_chunks: list[np.ndarray] = []
    for d in range(1, window + 1):
        if d >= len(ids):
            break
        left = ids[:-d]
        right = ids[d:]
        ok = (left >= 0) & (right >= 0) & (sent_ids[:-d] == sent_ids[d:])
        if not ok.any():
            continue
        l = left[ok].astype(np.int64)
        r = right[ok].astype(np.int64)
        w = scale if weighting == "flat" else scale // d
        for a, b in ((l, r), (r, l)):
            key_chunks.append(a * v + b)
            wt_chunks.append(np.full(len(a), w, dtype=np.int64))
    if not key_chunks:
        return empty

    keys = np.concatenate(key_chunks)
    wts = np.concatenate(wt_chunks)
    uniq, inverse = np.unique(keys, return_inverse=True)
    acc = np.zeros(len(uniq), dtype=np.int64)
    np.add.at(acc, inverse, wts)  # unbuffered: exact int64 sums
    if acc.max() > 2**53:
        raise NumericError("co-occurrence weights exceed exact float64 range")
    return CooccurrenceMatrix(
        rows=(uniq // v).astype(np.int32),
        cols=(uniq % v).astype(np.int32),
        weights=acc / float(scale),
        vocab_size=v,
        window=window,
        weighting=weighting,
    )
