"""Downstream evaluations: word-similarity error by stability, and bucketing
of externally produced per-token tagging errors.

Gold similarity scores are min-max normalized over the loaded dataset before
any out-of-vocabulary filtering. Predicted cosine (range [-1, 1]) is mapped to
[0, 1] via (c + 1) / 2 before the absolute error is taken; a raw mode is
available since this mapping shifts absolute-error levels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Vocabulary
from .embeddings.space import EmbeddingSpace
from .errors import DataError, NumericError
from .stability import BucketedMatrix, cosine


@dataclass(frozen=True)
class WordPairJudgment:
    word1: str
    word2: str
    gold: float
    gold_normalized: float


@dataclass
class PairSet:
    pairs: list[WordPairJudgment]
    dropped: int = 0  # pairs removed because a word is outside the vocabulary


def load_pairs(path: str, format: str = "tsv", vocab: Vocabulary | None = None) -> PairSet:
    """Read word1 TAB word2 TAB score rows, lowercased, min-max normalized.

    When a vocabulary is given, pairs with an absent word are dropped and
    counted after normalization.
    """
    if format != "tsv":
        raise DataError(f"unsupported pair format {format!r}")
    raw: list[tuple[str, str, float]] = []
    with open(path, encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 3:
                raise DataError(
                    f"{path!r} line {ln}: expected word1 TAB word2 TAB score"
                )
            try:
                score = float(parts[2])
            except ValueError as exc:
                raise DataError(f"{path!r} line {ln}: bad score {parts[2]!r}") from exc
            raw.append((parts[0].lower(), parts[1].lower(), score))
    if not raw:
        return PairSet(pairs=[])
    scores = np.asarray([r[2] for r in raw])
    lo, hi = float(scores.min()), float(scores.max())
    if hi == lo:
        raise NumericError(f"{path!r}: all scores identical; range is degenerate")
    pairs = [
        WordPairJudgment(w1, w2, s, (s - lo) / (hi - lo)) for w1, w2, s in raw
    ]
    dropped = 0
    if vocab is not None:
        kept = [p for p in pairs if p.word1 in vocab and p.word2 in vocab]
        dropped = len(pairs) - len(kept)
        pairs = kept
    return PairSet(pairs=pairs, dropped=dropped)


def _usable(space: EmbeddingSpace, word: str) -> bool:
    return word in space.vocab and space.vocab.index(word) not in space.zero_rows


def predicted_similarity(
    word1: str,
    word2: str,
    spaces: list[EmbeddingSpace],
    map_to_unit: bool = True,
) -> float:
    """Mean cosine across the spaces that contain both words, mapped to [0,1]."""
    sims = [
        cosine(sp.vector(word1), sp.vector(word2))
        for sp in spaces
        if _usable(sp, word1) and _usable(sp, word2)
    ]
    if not sims:
        raise NumericError(
            f"pair ({word1!r}, {word2!r}) is usable in none of the spaces"
        )
    mean = float(np.mean(sims))
    return (mean + 1.0) / 2.0 if map_to_unit else mean


def _bucket_of_edges(value: float, edges: list[float]) -> int | None:
    if value < edges[0] or value > edges[-1]:
        return None
    for b in range(len(edges) - 1):
        if edges[b] <= value < edges[b + 1]:
            return b
    return len(edges) - 2


def similarity_error_report(
    pairs: list[WordPairJudgment],
    spaces: list[EmbeddingSpace],
    stability_by_word: dict[str, float],
    bucket_edges: list[float] | None = None,
    map_to_unit: bool = True,
) -> tuple[BucketedMatrix, int]:
    """Mean |predicted - gold| per (stability bucket of the more stable word,
    stability bucket of the less stable word). Returns (matrix, dropped pairs).
    """
    if bucket_edges is None:
        bucket_edges = [10.0 * i for i in range(11)]
    nb = len(bucket_edges) - 1
    sums = np.zeros((nb, nb))
    counts = np.zeros((nb, nb))
    dropped = 0
    for p in pairs:
        s1 = stability_by_word.get(p.word1)
        s2 = stability_by_word.get(p.word2)
        if s1 is None or s2 is None:
            dropped += 1
            continue
        try:
            pred = predicted_similarity(p.word1, p.word2, spaces, map_to_unit)
        except NumericError:
            dropped += 1
            continue
        # word 1 is always the more stable of the pair
        hi, lo = (s1, s2) if s1 >= s2 else (s2, s1)
        bi = _bucket_of_edges(hi, bucket_edges)
        bj = _bucket_of_edges(lo, bucket_edges)
        if bi is None or bj is None:
            dropped += 1
            continue
        sums[bi, bj] += abs(pred - p.gold_normalized)
        counts[bi, bj] += 1
    with np.errstate(invalid="ignore"):
        means = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
    labels = tuple(
        f"[{bucket_edges[i]:g},{bucket_edges[i + 1]:g})" for i in range(nb)
    )
    matrix = BucketedMatrix(
        row_labels=labels,
        col_labels=labels,
        values=means,
        counts=counts,
        axis="",
        outline=np.zeros((nb, nb), dtype=bool),
        empty_cols=(),
        empty_rows=(),
        meta={"empty_cells": int((counts == 0).sum()), "dropped_pairs": dropped},
    )
    return matrix, dropped


@dataclass(frozen=True)
class TokenErrorRecord:
    token: str
    frequency_bucket: str
    stability_bucket: str
    errors: int
    occurrences: int


UNSEEN = "unseen"


def bucket_external_errors(
    path: str,
    stability_by_word: dict[str, float],
    frequency_by_word: dict[str, int],
    freq_edges: list[float],
    stab_edges: list[float] | None = None,
) -> list[TokenErrorRecord]:
    """Assign each token of an external error file (token TAB errors TAB
    occurrences) to its frequency x stability bucket; unknown tokens land in
    the "unseen" bucket so nothing is silently lost.
    """
    if stab_edges is None:
        stab_edges = [10.0 * i for i in range(11)]
    records = []
    with open(path, encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 3:
                raise DataError(
                    f"{path!r} line {ln}: expected token TAB errors TAB occurrences"
                )
            tok = parts[0].lower()
            try:
                errors, occ = int(parts[1]), int(parts[2])
            except ValueError as exc:
                raise DataError(f"{path!r} line {ln}: non-integer counts") from exc
            if errors < 0 or occ < 0 or errors > occ:
                raise DataError(
                    f"{path!r} line {ln}: need 0 <= errors <= occurrences"
                )
            fb = sb = UNSEEN
            if tok in frequency_by_word:
                b = _bucket_of_edges(float(frequency_by_word[tok]), freq_edges)
                if b is not None:
                    fb = f"[{freq_edges[b]:g},{freq_edges[b + 1]:g})"
            if tok in stability_by_word:
                b = _bucket_of_edges(stability_by_word[tok], stab_edges)
                if b is not None:
                    sb = f"[{stab_edges[b]:g},{stab_edges[b + 1]:g})"
            records.append(TokenErrorRecord(tok, fb, sb, errors, occ))
    return records


def error_rate_table(
    records: list[TokenErrorRecord],
) -> dict[tuple[str, str], float]:
    """Per (frequency bucket, stability bucket): sum(errors) / sum(occurrences)."""
    sums: dict[tuple[str, str], list[int]] = {}
    for r in records:
        acc = sums.setdefault((r.frequency_bucket, r.stability_bucket), [0, 0])
        acc[0] += r.errors
        acc[1] += r.occurrences
    return {
        key: (e / o if o else 0.0) for key, (e, o) in sums.items()
    }


def vector_shift(
    initial: EmbeddingSpace, final: EmbeddingSpace
) -> dict[str, float]:
    """Cosine between each common word's initial and final vectors."""
    out = {}
    for tok in initial.vocab.tokens:
        if _usable(initial, tok) and _usable(final, tok):
            out[tok] = cosine(initial.vector(tok), final.vector(tok))
    return out
