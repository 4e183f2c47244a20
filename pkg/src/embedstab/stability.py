"""Nearest-neighbor overlap stability across embedding spaces.

A word's stability over two sets of spaces X and Y is the mean percent overlap
of its top-k cosine neighbor lists over pairs (x, y). Self-pairs (x, x) are
skipped when the sets share members, except when that would leave no pairs at
all (X = Y = {A} is self-agreement, 100 by definition).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus, Vocabulary
from .embeddings.space import EmbeddingSpace
from .errors import DataError, NumericError

DECILE_LABELS = tuple(
    f"[{lo},{lo + 10})" if lo < 90 else "[90,100]" for lo in range(0, 100, 10)
)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """u.v / (|u||v|), clamped to [-1, 1] against rounding. Zero vectors error."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise NumericError("cosine is undefined for a zero vector")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


@dataclass(frozen=True)
class NeighborList:
    query: str
    neighbors: tuple[tuple[str, float], ...]

    @property
    def k(self) -> int:
        return len(self.neighbors)

    def tokens(self) -> frozenset[str]:
        return frozenset(t for t, _ in self.neighbors)


def _top_k_row(sims: np.ndarray, k: int) -> np.ndarray:
    """Exact top-k indices of one similarity row: descending value, then
    ascending index on exact ties. Excluded candidates must be -inf."""
    part = np.argpartition(-sims, k - 1)[:k]
    vk = sims[part].min()
    cand = np.flatnonzero(sims >= vk)
    order = np.lexsort((cand, -sims[cand]))
    return cand[order[:k]]


def neighbor_table(
    space: EmbeddingSpace, k: int, words: list[str] | None = None
) -> tuple[list[str], np.ndarray]:
    """Exact top-k neighbor indices for the given words (default: all queryable).

    Returns (queried words, n x k int32 index matrix). Flagged zero rows are
    excluded both as queries and as candidates; out-of-vocabulary or zero-row
    query words raise.
    """
    vocab = space.vocab
    v = len(vocab)
    if not 0 < k < v:
        raise NumericError(f"k={k} must satisfy 0 < k < |V|={v}")
    zero = space.zero_rows
    if words is None:
        queries = [i for i in range(v) if i not in zero]
        words = [vocab.token(i) for i in queries]
    else:
        queries = []
        for w in words:
            if w not in vocab:
                raise DataError(f"word {w!r} is not in the vocabulary")
            i = vocab.index(w)
            if i in zero:
                raise NumericError(
                    f"word {w!r} has an all-zero embedding row; no neighbors"
                )
            queries.append(i)
    candidates = v - len(zero)
    if k > candidates - 1:
        raise NumericError(
            f"k={k} exceeds the {candidates - 1} available neighbor candidates"
        )
    unit = space.unit_matrix()
    out = np.empty((len(queries), k), dtype=np.int32)
    qarr = np.asarray(queries, dtype=np.int64)
    zero_idx = np.asarray(sorted(zero), dtype=np.int64)
    block = max(1, min(len(qarr), 8_388_608 // max(v, 1)))
    for lo in range(0, len(qarr), block):
        q = qarr[lo : lo + block]
        sims = unit[q] @ unit.T
        np.clip(sims, -1.0, 1.0, out=sims)  # clip before masking: -inf must stay
        if len(zero_idx):
            sims[:, zero_idx] = -np.inf
        sims[np.arange(len(q)), q] = -np.inf
        for r in range(len(q)):
            out[lo + r] = _top_k_row(sims[r], k)
    return words, out


def nearest_neighbors(space: EmbeddingSpace, word: str, k: int) -> NeighborList:
    """Exact top-k cosine neighbors of `word`, query excluded, ties by index."""
    _, idx = neighbor_table(space, k, [word])
    unit = space.unit_matrix()
    q = unit[space.vocab.index(word)]
    sims = unit[idx[0]] @ q
    np.clip(sims, -1.0, 1.0, out=sims)
    return NeighborList(
        query=word,
        neighbors=tuple(
            (space.vocab.token(int(i)), float(s)) for i, s in zip(idx[0], sims)
        ),
    )


def overlap(a: NeighborList, b: NeighborList) -> float:
    """100 * |tokens(a) ∩ tokens(b)| / k; list-internal order is ignored."""
    if a.k != b.k:
        raise NumericError(f"neighbor lists have different k: {a.k} vs {b.k}")
    if a.k == 0:
        raise NumericError("overlap is undefined for empty neighbor lists")
    return 100.0 * len(a.tokens() & b.tokens()) / a.k


@dataclass(frozen=True)
class StabilityRecord:
    word: str
    set_x: str
    set_y: str
    k: int
    stability: float
    partial: bool = False


def _space_pairs(
    xs: list[EmbeddingSpace], ys: list[EmbeddingSpace], include_self_pairs: bool
) -> list[tuple[int, int]]:
    same = [s.id for s in xs] == [s.id for s in ys]
    if same and not include_self_pairs:
        # ordered and unordered means agree (overlap is symmetric); halve the work
        pairs = [(i, j) for i in range(len(xs)) for j in range(i + 1, len(ys))]
    else:
        pairs = [
            (i, j)
            for i in range(len(xs))
            for j in range(len(ys))
            if include_self_pairs or xs[i].id != ys[j].id
        ]
    if not pairs:
        # X = Y = {A}: self-agreement is well-defined and equals 100
        pairs = [(i, j) for i in range(len(xs)) for j in range(len(ys))]
    return pairs


class _SetTable:
    """Per-space neighbor lookup keyed by token, values as global-token ids."""

    def __init__(self, space: EmbeddingSpace, k: int, words: set[str]):
        usable = [
            w
            for w in words
            if w in space.vocab and space.vocab.index(w) not in space.zero_rows
        ]
        self.k = k
        self.words = set(usable)
        if usable and k < len(space.vocab) - len(space.zero_rows):
            _, self.idx = neighbor_table(space, k, usable)
        else:
            self.words = set()
            self.idx = np.empty((0, k), dtype=np.int32)
        self.row = {w: r for r, w in enumerate(usable)} if self.words else {}
        self.vocab = space.vocab
        self._lut: np.ndarray | None = None

    def neighbor_gids(self, word_rows: list[int], gid: dict[str, int]) -> np.ndarray:
        if self._lut is None:
            self._lut = np.asarray(
                [gid[t] for t in self.vocab.tokens], dtype=np.int64
            )
        return self._lut[self.idx[word_rows]]


def stability_records(
    words: list[str],
    x_spaces: list[EmbeddingSpace],
    y_spaces: list[EmbeddingSpace],
    k: int = 10,
    include_self_pairs: bool = False,
    set_x_id: str | None = None,
    set_y_id: str | None = None,
) -> list[StabilityRecord]:
    """Batch stability for many words over the space-set pair (X, Y).

    Words missing (or zero-row flagged) in some spaces get partial records
    averaged over the pairs that can see them; words usable in no pair are
    skipped.
    """
    if not x_spaces or not y_spaces:
        raise NumericError("stability requires nonempty space sets")
    xid = set_x_id or "+".join(s.id for s in x_spaces)
    yid = set_y_id or "+".join(s.id for s in y_spaces)
    pairs = _space_pairs(x_spaces, y_spaces, include_self_pairs)

    wordset = set(words)
    by_id: dict[str, _SetTable] = {}
    for sp in list(x_spaces) + list(y_spaces):
        if sp.id not in by_id:
            by_id[sp.id] = _SetTable(sp, k, wordset)

    gid: dict[str, int] = {}
    for sp in by_id.values():
        for t in sp.vocab.tokens:
            if t not in gid:
                gid[t] = len(gid)

    total = np.zeros(len(words), dtype=np.float64)
    npairs = np.zeros(len(words), dtype=np.int64)
    word_pos = {w: i for i, w in enumerate(words)}
    for i, j in pairs:
        ta = by_id[x_spaces[i].id]
        tb = by_id[y_spaces[j].id]
        common = [w for w in words if w in ta.words and w in tb.words]
        if not common:
            continue
        ga = ta.neighbor_gids([ta.row[w] for w in common], gid)
        gb = tb.neighbor_gids([tb.row[w] for w in common], gid)
        base = np.arange(len(common), dtype=np.int64) * (len(gid) + 1)
        inter = np.intersect1d(ga + base[:, None], gb + base[:, None])
        counts = np.bincount(inter // (len(gid) + 1), minlength=len(common))
        for w, c in zip(common, counts):
            p = word_pos[w]
            total[p] += 100.0 * c / k
            npairs[p] += 1

    out = []
    for w, p in word_pos.items():
        if npairs[p] == 0:
            continue
        out.append(
            StabilityRecord(
                word=w,
                set_x=xid,
                set_y=yid,
                k=k,
                stability=float(total[p] / npairs[p]),
                partial=bool(npairs[p] < len(pairs)),
            )
        )
    return out


def pairwise_stability_records(
    spaces: list[EmbeddingSpace], words: list[str], k: int = 10
) -> list[StabilityRecord]:
    """One record per (word, unordered space pair), set ids = the space ids.

    This is the long-form output of the stability command; set-level averages
    are recovered by grouping on the word.
    """
    if len(spaces) < 2:
        raise NumericError("pairwise stability needs at least two spaces")
    wordset = set(words)
    tables = {sp.id: _SetTable(sp, k, wordset) for sp in spaces}
    gid: dict[str, int] = {}
    for t in tables.values():
        for tok in t.vocab.tokens:
            if tok not in gid:
                gid[tok] = len(gid)
    out: list[StabilityRecord] = []
    rows_by_pair = []
    for i in range(len(spaces)):
        for j in range(i + 1, len(spaces)):
            ta, tb = tables[spaces[i].id], tables[spaces[j].id]
            common = [w for w in words if w in ta.words and w in tb.words]
            if not common:
                rows_by_pair.append(((i, j), {}))
                continue
            ga = ta.neighbor_gids([ta.row[w] for w in common], gid)
            gb = tb.neighbor_gids([tb.row[w] for w in common], gid)
            base = np.arange(len(common), dtype=np.int64) * (len(gid) + 1)
            inter = np.intersect1d(ga + base[:, None], gb + base[:, None])
            counts = np.bincount(inter // (len(gid) + 1), minlength=len(common))
            rows_by_pair.append(
                ((i, j), {w: 100.0 * float(c) / k for w, c in zip(common, counts)})
            )
    for w in words:
        for (i, j), vals in rows_by_pair:
            if w in vals:
                out.append(
                    StabilityRecord(
                        word=w,
                        set_x=spaces[i].id,
                        set_y=spaces[j].id,
                        k=k,
                        stability=vals[w],
                    )
                )
    return out


def stability(
    word: str,
    x_spaces: list[EmbeddingSpace],
    y_spaces: list[EmbeddingSpace],
    k: int = 10,
    include_self_pairs: bool = False,
) -> StabilityRecord:
    """Mean percent neighbor overlap of `word` over pairs from X x Y."""
    recs = stability_records(
        [word], x_spaces, y_spaces, k, include_self_pairs=include_self_pairs
    )
    if not recs:
        raise DataError(f"word {word!r} is usable in no space pair")
    return recs[0]


def write_records_csv(
    path: str, records: list[StabilityRecord], header_comments: list[str] | None = None
) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in header_comments or []:
            fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow(["word", "set_x", "set_y", "k", "stability", "partial"])
        for r in records:
            w.writerow(
                [r.word, r.set_x, r.set_y, r.k, repr(float(r.stability)), int(r.partial)]
            )


def load_records_csv(path: str) -> list[StabilityRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        header = next(reader)
        if header != ["word", "set_x", "set_y", "k", "stability", "partial"]:
            raise DataError(f"{path!r}: unexpected records header {header}")
        for rec in reader:
            out.append(
                StabilityRecord(
                    word=rec[0],
                    set_x=rec[1],
                    set_y=rec[2],
                    k=int(rec[3]),
                    stability=float(rec[4]),
                    partial=rec[5] == "1",
                )
            )
    return out


@dataclass
class BucketedMatrix:
    """A 2-D histogram normalized along one axis, with outline flags."""

    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    values: np.ndarray  # normalized masses
    counts: np.ndarray  # raw counts
    axis: str  # "row" | "column"
    outline: np.ndarray  # bool, same shape
    empty_rows: tuple[str, ...] = ()
    empty_cols: tuple[str, ...] = ()
    meta: dict = field(default_factory=dict)

    def to_csv(self, path: str, header_comments: list[str] | None = None) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            for line in header_comments or []:
                fh.write(f"# {line}\n")
            w = csv.writer(fh)
            w.writerow(["row_label", "col_label", "mass", "outline"])
            for r, rl in enumerate(self.row_labels):
                for c, cl in enumerate(self.col_labels):
                    w.writerow(
                        [rl, cl, repr(float(self.values[r, c])), int(self.outline[r, c])]
                    )

    def manifest(self) -> dict:
        return {
            "row_labels": list(self.row_labels),
            "col_labels": list(self.col_labels),
            "normalization_axis": self.axis,
            "empty_rows": list(self.empty_rows),
            "empty_cols": list(self.empty_cols),
            **self.meta,
        }


def load_bucketed_csv(path: str) -> BucketedMatrix:
    rows: dict[str, None] = {}
    cols: dict[str, None] = {}
    cells: dict[tuple[str, str], tuple[float, bool]] = {}
    with open(path, encoding="utf-8") as fh:
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        header = next(reader)
        if header[:4] != ["row_label", "col_label", "mass", "outline"]:
            raise DataError(f"{path!r}: unexpected report header {header}")
        for rec in reader:
            rows.setdefault(rec[0])
            cols.setdefault(rec[1])
            cells[(rec[0], rec[1])] = (float(rec[2]), rec[3] == "1")
    rl, cl = tuple(rows), tuple(cols)
    values = np.zeros((len(rl), len(cl)))
    outline = np.zeros((len(rl), len(cl)), dtype=bool)
    for (r, c), (m, o) in cells.items():
        values[rl.index(r), cl.index(c)] = m
        outline[rl.index(r), cl.index(c)] = o
    return BucketedMatrix(
        row_labels=rl,
        col_labels=cl,
        values=values,
        counts=values.copy(),
        axis="",
        outline=outline,
    )


def decile_index(stab: float) -> int:
    return min(int(stab // 10), 9)


def power_of_two_edges(freqs: list[int]) -> list[int]:
    lo = int(np.floor(np.log2(max(min(freqs), 1))))
    hi = int(np.floor(np.log2(max(freqs))))
    return [2**i for i in range(lo, hi + 2)]


def bucket_label(lo, hi) -> str:
    return f"[{lo},{hi})"


def _bucket_of(value, edges) -> int | None:
    if value < edges[0] or value > edges[-1]:
        return None
    for b in range(len(edges) - 1):
        if edges[b] <= value < edges[b + 1]:
            return b
    return len(edges) - 2  # closed top edge


def _normalize(counts: np.ndarray, axis: str) -> np.ndarray:
    sums = counts.sum(axis=0 if axis == "column" else 1, keepdims=True)
    safe = np.where(sums > 0, sums, 1.0)
    return counts / safe


def _stability_by_word(
    spaces: list[EmbeddingSpace], words: list[str], k: int
) -> dict[str, float]:
    recs = stability_records(words, spaces, spaces, k)
    return {r.word: r.stability for r in recs if not r.partial}


def frequency_bucket_report(
    spaces: list[EmbeddingSpace],
    corpus: Corpus,
    bucket_edges: list[int] | None = None,
    k: int = 10,
    stab_by_word: dict[str, float] | None = None,
) -> BucketedMatrix:
    """Column-normalized stability-decile distribution per frequency bucket."""
    if stab_by_word is None:
        if len(spaces) < 2:
            raise NumericError("frequency report needs at least two spaces")
        vocab = spaces[0].vocab
        stab_by_word = _stability_by_word(spaces, list(vocab.tokens), k)
    freqs = _corpus_counts(corpus)
    words = [w for w in stab_by_word if w in freqs]
    if bucket_edges is None:
        bucket_edges = power_of_two_edges([freqs[w] for w in words])
    return _bucket_report(
        {w: freqs[w] for w in words}, stab_by_word, bucket_edges, axis="column"
    )


def position_bucket_report(
    spaces: list[EmbeddingSpace],
    corpus: Corpus,
    bucket_edges: list[float] | None = None,
    k: int = 10,
    positions: dict[str, float] | None = None,
    stab_by_word: dict[str, float] | None = None,
    outline_total_mass: float = 0.0002,
    min_count: int = 5,
) -> BucketedMatrix:
    """Column-normalized decile distribution per first-position bucket.

    Cells holding more than `outline_total_mass` of all bucketed words are
    flagged for outlining.
    """
    if stab_by_word is None:
        if len(spaces) < 2:
            raise NumericError("position report needs at least two spaces")
        vocab = spaces[0].vocab
        stab_by_word = _stability_by_word(spaces, list(vocab.tokens), k)
    if positions is None:
        from .corpus import build_vocab, first_positions

        mc = spaces[0].vocab.min_count if spaces else min_count
        vocab = build_vocab(corpus, mc)
        positions = dict(first_positions(corpus, vocab).items())
    if bucket_edges is None:
        bucket_edges = [i / 10 for i in range(11)]
    keyed = {w: positions[w] for w in stab_by_word if w in positions}
    return _bucket_report(
        keyed,
        stab_by_word,
        bucket_edges,
        axis="column",
        outline_total_mass=outline_total_mass,
    )


def _corpus_counts(corpus: Corpus) -> dict[str, int]:
    from .corpus import count_tokens

    return dict(count_tokens(corpus))


def _bucket_report(
    key_by_word: dict[str, float],
    stab_by_word: dict[str, float],
    edges,
    axis: str,
    outline_total_mass: float | None = None,
) -> BucketedMatrix:
    nb = len(edges) - 1
    counts = np.zeros((10, nb))
    for w, key in key_by_word.items():
        b = _bucket_of(key, edges)
        if b is None:
            continue
        counts[decile_index(stab_by_word[w]), b] += 1
    values = _normalize(counts, axis)
    outline = np.zeros_like(counts, dtype=bool)
    if outline_total_mass is not None and counts.sum() > 0:
        outline = counts / counts.sum() > outline_total_mass
    col_labels = tuple(bucket_label(edges[i], edges[i + 1]) for i in range(nb))
    empty_cols = tuple(
        col_labels[c] for c in range(nb) if counts[:, c].sum() == 0
    )
    return BucketedMatrix(
        row_labels=DECILE_LABELS,
        col_labels=col_labels,
        values=values,
        counts=counts,
        axis=axis,
        outline=outline,
        empty_cols=empty_cols,
    )


def neighbor_sweep_report(
    spaces: list[EmbeddingSpace],
    corpus: Corpus,
    k_values: list[int],
    bucket_edges: list[int] | None = None,
    outline_row_mass: float = 0.01,
) -> dict[str, BucketedMatrix]:
    """Per frequency bucket: rows = k values, columns = stability deciles,
    row-normalized; cells above `outline_row_mass` of their row are outlined.

    Neighbor lists are computed once at max(k) and sliced per k (the exact
    top-k at smaller k is a prefix of the larger list under the tie rule).
    """
    if len(spaces) < 2:
        raise NumericError("neighbor sweep needs at least two spaces")
    k_values = sorted(set(int(k) for k in k_values))
    kmax = k_values[-1]
    vocab = spaces[0].vocab
    min_cand = min(len(s.vocab) - len(s.zero_rows) for s in spaces)
    if kmax >= min_cand:
        raise NumericError(f"max k={kmax} must be below min usable vocab {min_cand}")

    words = list(vocab.tokens)
    tables = {}
    for sp in spaces:
        usable = [
            w
            for w in words
            if w in sp.vocab and sp.vocab.index(w) not in sp.zero_rows
        ]
        _, idx = neighbor_table(sp, kmax, usable)
        tables[sp.id] = ({w: r for r, w in enumerate(usable)}, idx, sp.vocab)

    pairs = _space_pairs(spaces, spaces, include_self_pairs=False)
    freqs = _corpus_counts(corpus)
    common = [
        w for w in words if all(w in t[0] for t in tables.values()) and w in freqs
    ]
    if bucket_edges is None:
        bucket_edges = power_of_two_edges([freqs[w] for w in common])

    gid: dict[str, int] = {}
    for _, _, vb in tables.values():
        for t in vb.tokens:
            if t not in gid:
                gid[t] = len(gid)
    luts = {
        sid: np.asarray([gid[t] for t in vb.tokens], dtype=np.int64)
        for sid, (_, _, vb) in tables.items()
    }

    stab = {k: np.zeros(len(common)) for k in k_values}
    base = np.arange(len(common), dtype=np.int64) * (len(gid) + 1)
    for i, j in pairs:
        rows_a, idx_a, _ = tables[spaces[i].id]
        rows_b, idx_b, _ = tables[spaces[j].id]
        ga = luts[spaces[i].id][idx_a[[rows_a[w] for w in common]]]
        gb = luts[spaces[j].id][idx_b[[rows_b[w] for w in common]]]
        for k in k_values:
            inter = np.intersect1d(
                ga[:, :k] + base[:, None], gb[:, :k] + base[:, None]
            )
            cnt = np.bincount(inter // (len(gid) + 1), minlength=len(common))
            stab[k] += 100.0 * cnt / k
    for k in k_values:
        stab[k] /= len(pairs)

    out: dict[str, BucketedMatrix] = {}
    nb = len(bucket_edges) - 1
    for b in range(nb):
        label = bucket_label(bucket_edges[b], bucket_edges[b + 1])
        counts = np.zeros((len(k_values), 10))
        for wi, w in enumerate(common):
            if _bucket_of(freqs[w], bucket_edges) != b:
                continue
            for r, k in enumerate(k_values):
                counts[r, decile_index(stab[k][wi])] += 1
        values = _normalize(counts, "row")
        out[label] = BucketedMatrix(
            row_labels=tuple(f"k={k}" for k in k_values),
            col_labels=DECILE_LABELS,
            values=values,
            counts=counts,
            axis="row",
            outline=values > outline_row_mass,
            empty_rows=tuple(
                f"k={k_values[r]}"
                for r in range(len(k_values))
                if counts[r].sum() == 0
            ),
        )
    return out
