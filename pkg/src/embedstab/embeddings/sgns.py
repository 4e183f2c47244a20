"""Skip-gram with negative sampling, trained from scratch.

The hot loop is a numba kernel over the in-vocabulary token stream. All
randomness (init, dynamic windows, subsampling, negative draws) comes from an
inline xorshift generator seeded from the config, so single-threaded training
is bit-reproducible. The opt-in multi-worker mode updates shared weights
lock-free and is documented as nondeterministic.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ..corpus import Corpus, Vocabulary, build_vocab
from ..errors import NumericError
from .config import TrainerConfig
from .space import EmbeddingSpace, SpaceMeta

_U64 = np.uint64
_DOT_CLIP = 30.0


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def sgns_pair_loss(v_w: np.ndarray, u_c: np.ndarray, u_negs: np.ndarray) -> float:
    """-log s(u_c.v_w) - sum_i log s(-u_i.v_w) for one (word, context) pair."""
    pos = -np.log(sigmoid(float(np.dot(v_w, u_c))))
    neg = -np.log(sigmoid(-(u_negs @ v_w))).sum()
    return float(pos + neg)


def sgns_pair_grad(
    v_w: np.ndarray, u_c: np.ndarray, u_negs: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of sgns_pair_loss w.r.t. (v_w, u_c, each u_neg)."""
    s_pos = sigmoid(float(np.dot(v_w, u_c)))
    s_negs = sigmoid(u_negs @ v_w)
    g_v = (s_pos - 1.0) * u_c + s_negs @ u_negs
    g_c = (s_pos - 1.0) * v_w
    g_negs = s_negs[:, None] * v_w[None, :]
    return g_v, g_c, g_negs


@njit(cache=True, inline="always")
def _rng_next(state):
    x = state[0]
    x ^= x >> _U64(12)
    x ^= x << _U64(25)
    x ^= x >> _U64(27)
    state[0] = x
    return x * _U64(2685821657736338717)


@njit(cache=True, inline="always")
def _rng_u01(state):
    return (_rng_next(state) >> _U64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def _seed_state(seed):
    # splitmix64 of the seed; never zero
    z = (_U64(seed) + _U64(0x9E3779B97F4A7C15)) * _U64(0xBF58476D1CE4E5B9)
    z ^= z >> _U64(31)
    if z == _U64(0):
        z = _U64(0x106689D45497FDB5)
    out = np.empty(1, dtype=np.uint64)
    out[0] = z
    return out


@njit(cache=True)
def _init_weights(syn0, seed):
    state = _seed_state(seed)
    v, d = syn0.shape
    for i in range(v):
        for j in range(d):
            syn0[i, j] = (_rng_u01(state) - 0.5) / d


@njit(cache=True, inline="always")
def _sample_negative(neg_cdf, state):
    u = _rng_u01(state)
    lo, hi = 0, len(neg_cdf) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if neg_cdf[mid] < u:
            lo = mid + 1
        else:
            hi = mid
    return lo


@njit(cache=True, nogil=True)
def _train_shard(
    tokens,
    offsets,
    counts,
    neg_cdf,
    syn0,
    syn1,
    sent_lo,
    sent_hi,
    total_tokens,
    epoch,
    epochs,
    window,
    negative,
    lr0,
    subsample,
    dynamic_window,
    progress_scale,
    seed,
):
    """One epoch over sentences [sent_lo, sent_hi). Returns (loss sum, pairs)."""
    state = _seed_state(seed)
    d = syn0.shape[1]
    neu1e = np.empty(d, dtype=np.float32)
    sent = np.empty(1024, dtype=np.int32)
    loss = 0.0
    pairs = 0
    processed = 0
    alpha = lr0
    sub_t = subsample * total_tokens
    for s in range(sent_lo, sent_hi):
        # linear decay over the whole multi-epoch run, floored at 1e-4 * lr0
        done = epoch * total_tokens + processed * progress_scale
        alpha = lr0 * (1.0 - done / (epochs * total_tokens + 1.0))
        if alpha < lr0 * 1e-4:
            alpha = lr0 * 1e-4
        start, stop = offsets[s], offsets[s + 1]
        processed += stop - start
        n = 0
        for t in range(start, stop):
            w = tokens[t]
            if subsample > 0:
                cn = counts[w]
                keep = (np.sqrt(cn / sub_t) + 1.0) * sub_t / cn
                if keep < _rng_u01(state):
                    continue
            if n < sent.shape[0]:
                sent[n] = w
                n += 1
        for i in range(n):
            w = sent[i]
            if dynamic_window:
                win = 1 + int(_rng_next(state) % _U64(window))
            else:
                win = window
            lo = i - win if i - win > 0 else 0
            hi = i + win + 1 if i + win + 1 < n else n
            for j in range(lo, hi):
                if j == i:
                    continue
                c = sent[j]
                # positive update
                dot = 0.0
                for k in range(d):
                    dot += syn0[w, k] * syn1[c, k]
                if dot > _DOT_CLIP:
                    dot = _DOT_CLIP
                elif dot < -_DOT_CLIP:
                    dot = -_DOT_CLIP
                p = 1.0 / (1.0 + np.exp(-dot))
                loss += -np.log(p)
                g = (1.0 - p) * alpha
                for k in range(d):
                    neu1e[k] = g * syn1[c, k]
                    syn1[c, k] += g * syn0[w, k]
                # negative updates
                for m in range(negative):
                    nid = _sample_negative(neg_cdf, state)
                    retries = 0
                    while nid == c and retries < 8:
                        nid = _sample_negative(neg_cdf, state)
                        retries += 1
                    if nid == c:
                        continue
                    dot = 0.0
                    for k in range(d):
                        dot += syn0[w, k] * syn1[nid, k]
                    if dot > _DOT_CLIP:
                        dot = _DOT_CLIP
                    elif dot < -_DOT_CLIP:
                        dot = -_DOT_CLIP
                    p = 1.0 / (1.0 + np.exp(-dot))
                    loss += -np.log(1.0 - p)
                    g = -p * alpha
                    for k in range(d):
                        neu1e[k] += g * syn1[nid, k]
                        syn1[nid, k] += g * syn0[w, k]
                for k in range(d):
                    syn0[w, k] += neu1e[k]
                pairs += 1
    return loss, pairs


def _encode_stream(corpus: Corpus, vocab: Vocabulary):
    """In-vocab token ids per sentence (OOV dropped, word2vec-style)."""
    index = {tok: i for i, tok in enumerate(vocab.tokens)}
    toks: list[int] = []
    offsets = [0]
    for sent in corpus.sentences:
        toks.extend(index[t] for t in sent if t in index)
        offsets.append(len(toks))
    return (
        np.asarray(toks, dtype=np.int32),
        np.asarray(offsets, dtype=np.int64),
    )


def train_sgns(
    corpus: Corpus, config: TrainerConfig, vocab: Vocabulary | None = None
) -> EmbeddingSpace:
    if vocab is None:
        vocab = build_vocab(corpus, config.min_count)
    if len(vocab) == 0:
        raise NumericError("empty vocabulary: nothing to train")
    if config.dimension < 1:
        raise NumericError("dimension must be >= 1")
    tokens, offsets = _encode_stream(corpus, vocab)
    if len(tokens) == 0:
        raise NumericError("corpus has no in-vocabulary tokens")
    counts = np.asarray(vocab.counts, dtype=np.int64)
    weights = counts.astype(np.float64) ** config.negative_exponent
    neg_cdf = np.cumsum(weights)
    neg_cdf /= neg_cdf[-1]

    v, d = len(vocab), config.dimension
    syn0 = np.empty((v, d), dtype=np.float32)
    syn1 = np.zeros((v, d), dtype=np.float32)
    _init_weights(syn0, config.seed)
    total = int(len(tokens))
    n_sent = len(offsets) - 1

    epoch_losses = []
    workers = max(1, config.workers)
    for epoch in range(config.epochs):
        if workers == 1:
            loss, pairs = _train_shard(
                tokens, offsets, counts, neg_cdf, syn0, syn1,
                0, n_sent, total, epoch, config.epochs,
                config.window, config.negative_samples, config.learning_rate,
                config.subsample_threshold, config.dynamic_window, 1.0,
                config.seed * 1_000_003 + epoch,
            )
        else:
            from concurrent.futures import ThreadPoolExecutor

            bounds = np.linspace(0, n_sent, workers + 1).astype(np.int64)
            futures = []
            with ThreadPoolExecutor(max_workers=workers) as pool:
                for wk in range(workers):
                    futures.append(
                        pool.submit(
                            _train_shard,
                            tokens, offsets, counts, neg_cdf, syn0, syn1,
                            int(bounds[wk]), int(bounds[wk + 1]), total,
                            epoch, config.epochs,
                            config.window, config.negative_samples,
                            config.learning_rate, config.subsample_threshold,
                            config.dynamic_window, float(workers),
                            config.seed * 1_000_003 + epoch * 7919 + wk,
                        )
                    )
            results = [f.result() for f in futures]
            loss = sum(r[0] for r in results)
            pairs = sum(r[1] for r in results)
        epoch_losses.append(loss / max(pairs, 1))

    meta = SpaceMeta(
        algorithm="sgns",
        corpus_id=corpus.id,
        domain=corpus.domain,
        dimension=d,
        seed=config.seed,
        params={**config.to_params(), "epoch_losses": epoch_losses},
    )
    return EmbeddingSpace(vocab, syn0.astype(np.float64), meta)
