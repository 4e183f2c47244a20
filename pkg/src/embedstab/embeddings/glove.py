"""GloVe: weighted least-squares factorization of log co-occurrence counts.

Trains with AdaGrad over the nonzero co-occurrence entries. The example order
is the canonical sorted (i, j) list shuffled once with the configured seed, and
the counts themselves are exact integers, so training is invariant to corpus
sentence order: same seed, shuffled corpus, bit-identical matrices.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ..corpus import Corpus, Vocabulary, build_vocab
from ..errors import NumericError
from .config import TrainerConfig
from .cooc import build_cooccurrence
from .space import EmbeddingSpace, SpaceMeta


def glove_weight(x, x_max: float = 100.0, alpha: float = 0.75):
    """f(x) = (x / x_max)^alpha, capped at 1."""
    x = np.asarray(x, dtype=np.float64)
    return np.minimum((x / x_max) ** alpha, 1.0)


@njit(cache=True, nogil=True)
def _glove_pass(order, rows, cols, logx, fw, w, wt, b, bt, gw, gwt, gb, gbt, lr):
    cost = 0.0
    d = w.shape[1]
    for t in range(len(order)):
        idx = order[t]
        i = rows[idx]
        j = cols[idx]
        diff = b[i] + bt[j] - logx[idx]
        for k in range(d):
            diff += w[i, k] * wt[j, k]
        f = fw[idx]
        cost += 0.5 * f * diff * diff
        g = f * diff
        for k in range(d):
            grad_w = g * wt[j, k]
            grad_t = g * w[i, k]
            w[i, k] -= lr * grad_w / np.sqrt(gw[i, k])
            wt[j, k] -= lr * grad_t / np.sqrt(gwt[j, k])
            gw[i, k] += grad_w * grad_w
            gwt[j, k] += grad_t * grad_t
        b[i] -= lr * g / np.sqrt(gb[i])
        bt[j] -= lr * g / np.sqrt(gbt[j])
        gb[i] += g * g
        gbt[j] += g * g
    return cost


def train_glove(
    corpus: Corpus, config: TrainerConfig, vocab: Vocabulary | None = None
) -> EmbeddingSpace:
    if vocab is None:
        vocab = build_vocab(corpus, config.min_count)
    if len(vocab) == 0:
        raise NumericError("empty vocabulary: nothing to train")
    cooc = build_cooccurrence(corpus, vocab, config.window, config.glove_weighting)
    if cooc.nnz == 0:
        raise NumericError("empty co-occurrence: nothing to factor")

    v, d = len(vocab), config.dimension
    rng = np.random.default_rng(config.seed)
    w = rng.uniform(-0.5, 0.5, (v, d)) / (d + 1)
    wt = rng.uniform(-0.5, 0.5, (v, d)) / (d + 1)
    b = rng.uniform(-0.5, 0.5, v) / (d + 1)
    bt = rng.uniform(-0.5, 0.5, v) / (d + 1)
    gw = np.ones((v, d))
    gwt = np.ones((v, d))
    gb = np.ones(v)
    gbt = np.ones(v)

    logx = np.log(cooc.weights)
    fw = glove_weight(cooc.weights, config.x_max, config.alpha)
    # entries arrive sorted by (i, j); one seeded shuffle fixes the order
    order = rng.permutation(cooc.nnz).astype(np.int64)

    costs = []
    for _ in range(config.effective_glove_iterations):
        cost = _glove_pass(
            order, cooc.rows, cooc.cols, logx, fw,
            w, wt, b, bt, gw, gwt, gb, gbt,
            config.glove_learning_rate,
        )
        costs.append(cost / cooc.nnz)

    meta = SpaceMeta(
        algorithm="glove",
        corpus_id=corpus.id,
        domain=corpus.domain,
        dimension=d,
        seed=config.seed,
        params={**config.to_params(), "iteration_costs": costs},
    )
    return EmbeddingSpace(vocab, w + wt, meta)
