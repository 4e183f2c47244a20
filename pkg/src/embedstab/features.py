"""Regression dataset construction: one named feature vector plus stability
target per (word, space A, space B) instance.

Feature blocks follow the word / data / algorithm breakdown: POS one-hots from
a user-supplied lexicon over the 12-tag universal tagset, symmetric
(higher, lower, |difference|) triples for paired scalars, bag-of-words counts
for domains and algorithms, and match flags. Every encoding is symmetric in
the two spaces, so swapping A and B yields a bit-identical vector.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus, PositionIndex, Vocabulary
from .embeddings.space import ALGORITHMS, EmbeddingSpace, SpaceMeta
from .errors import DataError
from .stability import _SetTable, _space_pairs

# the 12 universal POS tags, in the order used for tie-breaking
TAGSET = (
    "adjective",
    "adposition",
    "adverb",
    "conjunction",
    "determiner",
    "noun",
    "numeral",
    "particle",
    "pronoun",
    "verb",
    "punctuation",
    "other",
)


@dataclass(frozen=True)
class LexiconBundle:
    """User-supplied lexicons; words absent from a lexicon degrade to zeros."""

    pos: dict[str, tuple[int, ...]] = field(default_factory=dict)
    syllables: dict[str, int] = field(default_factory=dict)
    senses: dict[str, int] = field(default_factory=dict)


def load_pos_lexicon(path: str) -> dict[str, tuple[int, ...]]:
    """TSV: token, then 12 tab-separated POS counts in tagset order."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 13:
                raise DataError(
                    f"{path!r} line {ln}: expected token + 12 counts, got "
                    f"{len(parts)} fields"
                )
            try:
                counts = tuple(int(x) for x in parts[1:])
            except ValueError as exc:
                raise DataError(f"{path!r} line {ln}: non-integer count") from exc
            if any(c < 0 for c in counts):
                raise DataError(f"{path!r} line {ln}: negative POS count")
            out[parts[0]] = counts
    return out


def load_count_lexicon(path: str) -> dict[str, int]:
    """TSV: token, count. Used for syllable and sense lexicons."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2:
                raise DataError(f"{path!r} line {ln}: expected token, count")
            try:
                out[parts[0]] = int(parts[1])
            except ValueError as exc:
                raise DataError(f"{path!r} line {ln}: non-integer count") from exc
    return out


def load_lexicons(
    pos_path: str | None = None,
    syllable_path: str | None = None,
    sense_path: str | None = None,
) -> LexiconBundle:
    return LexiconBundle(
        pos=load_pos_lexicon(pos_path) if pos_path else {},
        syllables=load_count_lexicon(syllable_path) if syllable_path else {},
        senses=load_count_lexicon(sense_path) if sense_path else {},
    )


@dataclass(frozen=True)
class CorpusProfile:
    """The per-corpus statistics feature extraction needs."""

    corpus_id: str
    domain: str
    token_count: int
    vocab_size: int
    freq: dict[str, int]
    positions: dict[str, float]  # first-occurrence fraction in (0, 1]
    tokens: frozenset[str]


def profile_corpus(
    corpus: Corpus, vocab: Vocabulary, positions: PositionIndex
) -> CorpusProfile:
    from .corpus import count_tokens

    return CorpusProfile(
        corpus_id=corpus.id,
        domain=corpus.domain,
        token_count=corpus.token_count,
        vocab_size=len(vocab),
        freq=dict(count_tokens(corpus)),
        positions=dict(positions.items()),
        tokens=vocab.token_set(),
    )


class FeatureSchema:
    """Fixed global feature ordering for one dataset (domain set dependent)."""

    def __init__(self, domains: list[str]):
        self.domains = tuple(sorted(set(domains)))
        names = [f"primary_pos={t}" for t in TAGSET]
        names += [f"secondary_pos={t}" for t in TAGSET]
        names += ["num_pos", "num_senses", "num_syllables"]
        names += ["freq_higher", "freq_lower", "freq_absdiff"]
        names += ["vocab_size_higher", "vocab_size_lower", "vocab_size_absdiff"]
        names += ["vocab_overlap"]
        names += [f"domain={d}" for d in self.domains]
        names += ["domains_match"]
        names += ["position_higher", "position_lower", "position_absdiff"]
        names += [f"algo={a}" for a in ALGORITHMS]
        names += ["algos_match"]
        names += ["dim_higher", "dim_lower", "dim_absdiff", "dims_match"]
        self.names: tuple[str, ...] = tuple(names)
        self._index = {n: i for i, n in enumerate(self.names)}

    def __len__(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        return self._index[name]

    def vector(self, parts: dict[str, float]) -> np.ndarray:
        out = np.zeros(len(self.names))
        for name, value in parts.items():
            out[self._index[name]] = value
        return out

    def group(self, prefix_or_names) -> list[str]:
        if isinstance(prefix_or_names, str):
            return [n for n in self.names if n.startswith(prefix_or_names)]
        return [n for n in prefix_or_names if n in self._index]


# default ablation groups, mirroring the word/data/algorithm feature blocks
def default_groups(schema: FeatureSchema) -> dict[str, list[str]]:
    return {
        "pos": schema.group("primary_pos=")
        + schema.group("secondary_pos=")
        + ["num_pos"],
        "word": schema.group("primary_pos=")
        + schema.group("secondary_pos=")
        + ["num_pos", "num_senses", "num_syllables"],
        "frequency": ["freq_higher", "freq_lower", "freq_absdiff"],
        "vocabulary": [
            "vocab_size_higher",
            "vocab_size_lower",
            "vocab_size_absdiff",
            "vocab_overlap",
        ],
        "domain": schema.group("domain=") + ["domains_match"],
        "curriculum": ["position_higher", "position_lower", "position_absdiff"],
        "algorithm": schema.group("algo=")
        + ["algos_match", "dim_higher", "dim_lower", "dim_absdiff", "dims_match"],
    }


def symmetric_encode(a: float, b: float) -> tuple[float, float, float]:
    """(higher, lower, absolute difference); invariant to argument order."""
    hi, lo = (a, b) if a >= b else (b, a)
    return float(hi), float(lo), float(hi - lo)


def word_features(word: str, lexicons: LexiconBundle) -> dict[str, float]:
    """POS one-hot bags, tag count, sense count, syllable count for one word.

    A word missing from the POS lexicon gets all POS features zero; missing
    syllable or sense entries are zero. Never raises.
    """
    out: dict[str, float] = {}
    counts = lexicons.pos.get(word)
    if counts is not None:
        present = [i for i, c in enumerate(counts) if c > 0]
        if present:
            primary = max(present, key=lambda i: (counts[i], -i))
            out[f"primary_pos={TAGSET[primary]}"] = 1.0
            rest = [i for i in present if i != primary]
            if rest:
                secondary = max(rest, key=lambda i: (counts[i], -i))
                out[f"secondary_pos={TAGSET[secondary]}"] = 1.0
            out["num_pos"] = float(len(present))
    out["num_senses"] = float(lexicons.senses.get(word, 0))
    out["num_syllables"] = float(lexicons.syllables.get(word, 0))
    return out


def data_features(
    word: str,
    a: CorpusProfile,
    b: CorpusProfile,
    overlap: float | None = None,
) -> tuple[dict[str, float], tuple[str, ...]]:
    """Corpus-pair features for one word; positions are encoded as percentages.

    Returns (features, corpora the word is missing from). A missing word
    contributes frequency 0 and position 0 rather than raising.
    """
    if overlap is None:
        union = len(a.tokens | b.tokens)
        overlap = len(a.tokens & b.tokens) / union if union else 0.0
    out: dict[str, float] = {}
    missing = tuple(
        sorted(p.corpus_id for p in (a, b) if p.freq.get(word, 0) == 0)
    )
    fa, fb = a.freq.get(word, 0), b.freq.get(word, 0)
    out["freq_higher"], out["freq_lower"], out["freq_absdiff"] = symmetric_encode(
        fa, fb
    )
    (
        out["vocab_size_higher"],
        out["vocab_size_lower"],
        out["vocab_size_absdiff"],
    ) = symmetric_encode(a.vocab_size, b.vocab_size)
    out["vocab_overlap"] = float(overlap)
    for p in (a, b):
        key = f"domain={p.domain}"
        out[key] = out.get(key, 0.0) + 1.0
    out["domains_match"] = float(a.domain == b.domain)
    pa = 100.0 * a.positions.get(word, 0.0)
    pb = 100.0 * b.positions.get(word, 0.0)
    (
        out["position_higher"],
        out["position_lower"],
        out["position_absdiff"],
    ) = symmetric_encode(pa, pb)
    return out, missing


def algo_features(a: SpaceMeta, b: SpaceMeta) -> dict[str, float]:
    """Algorithm bag counts, match flag, and the symmetric dimension triple."""
    for m in (a, b):
        if m.algorithm not in ALGORITHMS:
            raise DataError(f"unknown algorithm tag {m.algorithm!r}")
    out: dict[str, float] = {}
    for m in (a, b):
        key = f"algo={m.algorithm}"
        out[key] = out.get(key, 0.0) + 1.0
    out["algos_match"] = float(a.algorithm == b.algorithm)
    out["dim_higher"], out["dim_lower"], out["dim_absdiff"] = symmetric_encode(
        a.dimension, b.dimension
    )
    out["dims_match"] = float(a.dimension == b.dimension)
    return out


@dataclass(frozen=True)
class RegressionInstance:
    word: str
    features: np.ndarray
    target: float  # stability percentage at k
    meta_a: SpaceMeta
    meta_b: SpaceMeta
    partial: bool = False


def normalized_profile(profile: CorpusProfile) -> CorpusProfile:
    """Same profile with frequencies divided by the corpus token count."""
    scale = max(profile.token_count, 1)
    return CorpusProfile(
        corpus_id=profile.corpus_id,
        domain=profile.domain,
        token_count=profile.token_count,
        vocab_size=profile.vocab_size,
        freq={w: c / scale for w, c in profile.freq.items()},
        positions=profile.positions,
        tokens=profile.tokens,
    )


def assemble_dataset(
    words: list[str],
    spaces: list[EmbeddingSpace],
    profiles: dict[str, CorpusProfile],
    lexicons: LexiconBundle,
    k: int = 10,
    normalized_frequency: bool = False,
) -> tuple[list[RegressionInstance], FeatureSchema]:
    """One instance per word per unordered space pair, ordered by (word, pair).

    Targets are the stability of the word across the two spaces at k. Words a
    pair cannot see (missing from a vocabulary, or zero-row flagged) yield no
    instance for that pair.
    """
    if len(spaces) < 2:
        raise DataError("dataset assembly needs at least two spaces")
    for sp in spaces:
        if sp.meta.corpus_id not in profiles:
            raise DataError(f"no corpus profile for {sp.meta.corpus_id!r}")
    if normalized_frequency:
        profiles = {cid: normalized_profile(p) for cid, p in profiles.items()}
    schema = FeatureSchema([p.domain for p in profiles.values()])

    pairs = _space_pairs(spaces, spaces, include_self_pairs=False)
    wordset = set(words)
    tables = {sp.id: _SetTable(sp, k, wordset) for sp in spaces}
    gid: dict[str, int] = {}
    for t in tables.values():
        for tok in t.vocab.tokens:
            if tok not in gid:
                gid[tok] = len(gid)

    overlap_cache: dict[tuple[str, str], float] = {}
    wf_cache = {w: word_features(w, lexicons) for w in words}

    target: dict[tuple[str, int], float] = {}
    for pi, (i, j) in enumerate(pairs):
        ta, tb = tables[spaces[i].id], tables[spaces[j].id]
        common = [w for w in words if w in ta.words and w in tb.words]
        if not common:
            continue
        ga = ta.neighbor_gids([ta.row[w] for w in common], gid)
        gb = tb.neighbor_gids([tb.row[w] for w in common], gid)
        base = np.arange(len(common), dtype=np.int64) * (len(gid) + 1)
        inter = np.intersect1d(ga + base[:, None], gb + base[:, None])
        counts = np.bincount(inter // (len(gid) + 1), minlength=len(common))
        for w, c in zip(common, counts):
            target[(w, pi)] = 100.0 * c / k

    instances: list[RegressionInstance] = []
    for w in words:
        wf = wf_cache[w]
        for pi, (i, j) in enumerate(pairs):
            if (w, pi) not in target:
                continue
            ma, mb = spaces[i].meta, spaces[j].meta
            pa, pb = profiles[ma.corpus_id], profiles[mb.corpus_id]
            okey = tuple(sorted((pa.corpus_id, pb.corpus_id)))
            if okey not in overlap_cache:
                union = len(pa.tokens | pb.tokens)
                overlap_cache[okey] = (
                    len(pa.tokens & pb.tokens) / union if union else 0.0
                )
            df, missing = data_features(w, pa, pb, overlap=overlap_cache[okey])
            parts = {**wf, **df, **algo_features(ma, mb)}
            instances.append(
                RegressionInstance(
                    word=w,
                    features=schema.vector(parts),
                    target=target[(w, pi)],
                    meta_a=ma,
                    meta_b=mb,
                    partial=bool(missing),
                )
            )
    if not instances:
        raise DataError("no valid (word, space pair) instances")
    return instances, schema


def dataset_matrix(
    instances: list[RegressionInstance],
) -> tuple[np.ndarray, np.ndarray]:
    x = np.stack([inst.features for inst in instances])
    y = np.asarray([inst.target for inst in instances])
    return x, y


def write_dataset_csv(
    path: str,
    instances: list[RegressionInstance],
    schema: FeatureSchema,
    header_comments: list[str] | None = None,
) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in header_comments or []:
            fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow(list(schema.names) + ["target"])
        for inst in instances:
            w.writerow([repr(float(v)) for v in inst.features] + [repr(inst.target)])
