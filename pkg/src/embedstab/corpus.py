"""Corpus loading, vocabulary construction, and curriculum positions.

Input corpora are pre-tokenized: UTF-8 text, one sentence per line, tokens
separated by spaces. Tokens are lowercased on load; sentence order is
preserved exactly as read.
"""

from __future__ import annotations

import random
import sys
from collections import Counter
from dataclasses import dataclass, field

from .errors import DataError


@dataclass(frozen=True)
class Corpus:
    """An ordered list of token lists plus bookkeeping. Immutable once built."""

    id: str
    domain: str
    sentences: tuple[tuple[str, ...], ...]
    token_count: int = field(init=False)
    sentence_count: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "token_count", sum(len(s) for s in self.sentences))
        object.__setattr__(self, "sentence_count", len(self.sentences))


class Vocabulary:
    """Dense token index for all tokens with corpus frequency >= min_count.

    Indices are assigned in descending frequency, ties broken lexicographically,
    so index 0 is always the most frequent token.
    """

    def __init__(self, counts: dict[str, int], min_count: int):
        if min_count < 1:
            raise ValueError("min_count must be >= 1")
        self.min_count = min_count
        kept = [(tok, c) for tok, c in counts.items() if c >= min_count]
        kept.sort(key=lambda kv: (-kv[1], kv[0]))
        self._tokens = tuple(tok for tok, _ in kept)
        self._counts = tuple(c for _, c in kept)
        self._index = {tok: i for i, tok in enumerate(self._tokens)}

    def __len__(self) -> int:
        return len(self._tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Vocabulary)
            and self._tokens == other._tokens
            and self._counts == other._counts
            and self.min_count == other.min_count
        )

    def index(self, token: str) -> int:
        return self._index[token]

    def token(self, index: int) -> str:
        return self._tokens[index]

    def count(self, token: str) -> int:
        return self._counts[self._index[token]]

    @property
    def tokens(self) -> tuple[str, ...]:
        return self._tokens

    @property
    def counts(self) -> tuple[int, ...]:
        return self._counts

    def token_set(self) -> frozenset[str]:
        return frozenset(self._tokens)


class PositionIndex:
    """First-occurrence position per token, as a fraction in (0, 1].

    position(w) = (1-based index of the first sentence containing w) divided
    by the corpus sentence count.
    """

    def __init__(self, positions: dict[str, float]):
        self._positions = dict(positions)

    def __contains__(self, token: str) -> bool:
        return token in self._positions

    def __len__(self) -> int:
        return len(self._positions)

    def position(self, token: str) -> float:
        return self._positions[token]

    def get(self, token: str, default: float = 0.0) -> float:
        return self._positions.get(token, default)

    def items(self):
        return self._positions.items()


def load_corpus(path: str, domain: str, id: str) -> Corpus:
    """Read a pre-tokenized corpus file: one sentence per line, space-separated.

    Tokens are lowercased; empty lines are dropped; order is preserved.
    Raises DataError for a missing file or non-UTF-8 bytes (naming the offset).
    """
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read corpus file {path!r}: {exc}") from exc
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DataError(
            f"corpus file {path!r} is not valid UTF-8 at byte offset {exc.start}"
        ) from exc
    sentences = []
    for line in text.splitlines():
        toks = line.lower().split()
        if toks:
            sentences.append(tuple(sys.intern(t) for t in toks))
    return Corpus(id=id, domain=domain, sentences=tuple(sentences))


def count_tokens(corpus: Corpus) -> Counter:
    counts: Counter = Counter()
    for sent in corpus.sentences:
        counts.update(sent)
    return counts


def build_vocab(corpus: Corpus, min_count: int) -> Vocabulary:
    """All tokens with corpus frequency >= min_count, indexed by falling frequency."""
    return Vocabulary(count_tokens(corpus), min_count)


def first_positions(corpus: Corpus, vocab: Vocabulary) -> PositionIndex:
    """First-appearance position of every vocabulary token, as a sentence fraction."""
    n = corpus.sentence_count
    seen: dict[str, float] = {}
    remaining = len(vocab)
    for i, sent in enumerate(corpus.sentences, start=1):
        for tok in sent:
            if tok not in seen and tok in vocab:
                seen[tok] = i / n
                remaining -= 1
        if remaining == 0:
            break
    return PositionIndex(seen)


def vocab_overlap(a: Vocabulary, b: Vocabulary) -> float:
    """Jaccard overlap |A∩B| / |A∪B| of the two entry sets; 0 if both empty."""
    sa, sb = a.token_set(), b.token_set()
    union = len(sa | sb)
    if union == 0:
        return 0.0
    return len(sa & sb) / union


def shuffle_sentences(corpus: Corpus, seed: int) -> Corpus:
    """Deterministically permute sentence order; the multiset is unchanged."""
    order = list(corpus.sentences)
    random.Random(seed).shuffle(order)
    return Corpus(
        id=f"{corpus.id}-shuf{seed}", domain=corpus.domain, sentences=tuple(order)
    )
