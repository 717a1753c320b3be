"""Skip-gram training with negative sampling over subword vectors."""

from __future__ import annotations

import threading
from collections import Counter

import numpy as np

from ..errors import EmptyCorpus, EmptyVocab
from .model import EmbeddingConfig, EmbeddingModel

_NEGATIVE_POWER = 0.75


def example_loss(input_rows: np.ndarray, output_rows: np.ndarray):
    """Loss and gradients for one (center, context, negatives) example.

    The center word's hidden vector is the mean of ``input_rows`` (its
    word row plus n-gram rows). ``output_rows`` stacks the context row
    first, then the negative rows. The loss is the negative
    log-likelihood of labeling the context 1 and every negative 0 under
    a sigmoid of the dot products.

    Returns
    -------
    loss : float
    grad_input_row : ndarray, shape (dim,)
        Gradient with respect to each input row (identical across rows,
        since rows enter only through their mean).
    grad_output_rows : ndarray, shape (1 + negatives, dim)
    """
    input_rows = np.asarray(input_rows, dtype=np.float64)
    output_rows = np.asarray(output_rows, dtype=np.float64)
    hidden = input_rows.mean(axis=0)
    scores = output_rows @ hidden
    # log sigmoid(x) = -log(1 + exp(-x)), computed without overflow
    labels = np.zeros(len(output_rows))
    labels[0] = 1.0
    signed = np.where(labels == 1.0, scores, -scores)
    loss = float(np.logaddexp(0.0, -signed).sum())
    grad_scores = _sigmoid(scores) - labels
    grad_hidden = grad_scores @ output_rows
    grad_input_row = grad_hidden / len(input_rows)
    grad_output_rows = np.outer(grad_scores, hidden)
    return loss, grad_input_row, grad_output_rows


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _build_vocab(sentences, min_count):
    counter = Counter()
    total_tokens = 0
    for sentence in sentences:
        counter.update(sentence)
        total_tokens += len(sentence)
    if total_tokens == 0:
        raise EmptyCorpus("no tokens in any sentence")
    pairs = [(w, c) for w, c in counter.items() if c >= min_count]
    if not pairs:
        raise EmptyVocab(
            "no word occurs at least min_count=%d times" % (min_count,)
        )
    pairs.sort(key=lambda wc: (-wc[1], wc[0]))
    words = [w for w, _ in pairs]
    counts = np.array([c for _, c in pairs], dtype=np.int64)
    return words, counts, total_tokens


def _keep_probabilities(counts: np.ndarray, subsample_t: float) -> np.ndarray:
    """Per-word probability of keeping an occurrence during training.

    Frequent words are downsampled: with f the word's corpus frequency
    and t the threshold, an occurrence survives with probability
    ``sqrt(t/f) + t/f``, capped at 1.
    """
    freqs = counts / counts.sum()
    ratio = subsample_t / freqs
    return np.minimum(1.0, np.sqrt(ratio) + ratio)


def _negative_cdf(counts: np.ndarray) -> np.ndarray:
    """Cumulative distribution for drawing negatives, count^0.75 weighted."""
    weights = counts.astype(np.float64) ** _NEGATIVE_POWER
    cdf = np.cumsum(weights)
    return cdf / cdf[-1]


def train_skipgram(sentences, config: EmbeddingConfig, n_workers: int = 1):
    """Train subword embeddings on tokenized sentences.

    Parameters
    ----------
    sentences : iterable of list of str
        Tokenized text units (typically policy segments). Materialized
        up front; the corpus must fit in memory.
    config : EmbeddingConfig
    n_workers : int
        Number of update threads. The default single thread is fully
        deterministic for a fixed config. More threads follow the
        lock-free shared-matrix scheme: workers split the sentences and
        write updates without synchronization, trading exact
        reproducibility for wall-clock speed.

    Returns
    -------
    EmbeddingModel
        With a ``history`` attribute holding the mean example loss of
        each epoch.
    """
    if n_workers < 1:
        raise ValueError("n_workers must be positive, got %r" % (n_workers,))
    sentences = [list(s) for s in sentences]
    if not sentences:
        raise EmptyCorpus("no sentences to train on")
    words, counts, total_tokens = _build_vocab(sentences, config.min_count)
    vocab_size = len(words)

    rng = np.random.Generator(np.random.Philox(config.seed))
    bound = 1.0 / config.dim
    input_vectors = rng.uniform(
        -bound, bound, size=(vocab_size + config.bucket_count, config.dim)
    ).astype(np.float32)
    output_vectors = np.zeros((vocab_size, config.dim), dtype=np.float32)

    model = EmbeddingModel(config, words, counts, input_vectors, output_vectors)
    keep_prob = _keep_probabilities(counts, config.subsample_t)
    neg_cdf = _negative_cdf(counts)

    word_index = model.word_index
    id_sentences = []
    for sentence in sentences:
        ids = [word_index[w] for w in sentence if w in word_index]
        id_sentences.append((np.array(ids, dtype=np.int64), len(sentence)))

    subwords = [model.subword_ids(w) for w in words]

    total_budget = config.epochs * total_tokens
    history = []
    if n_workers == 1:
        for epoch in range(config.epochs):
            loss, pairs = _run_epoch(
                id_sentences,
                model,
                subwords,
                keep_prob,
                neg_cdf,
                rng,
                tokens_done=epoch * total_tokens,
                total_budget=total_budget,
            )
            history.append(loss / pairs if pairs else 0.0)
    else:
        for epoch in range(config.epochs):
            shards = [id_sentences[i::n_workers] for i in range(n_workers)]
            results = [None] * n_workers
            threads = []
            for w, shard in enumerate(shards):
                worker_rng = np.random.Generator(
                    np.random.Philox(key=config.seed, counter=[epoch, w, 0, 0])
                )
                t = threading.Thread(
                    target=_epoch_worker,
                    args=(
                        results,
                        w,
                        shard,
                        model,
                        subwords,
                        keep_prob,
                        neg_cdf,
                        worker_rng,
                        epoch * total_tokens,
                        total_budget,
                    ),
                )
                threads.append(t)
                t.start()
            for t in threads:
                t.join()
            loss = sum(r[0] for r in results)
            pairs = sum(r[1] for r in results)
            history.append(loss / pairs if pairs else 0.0)

    model.history = history
    model._composed = None
    return model


def _epoch_worker(results, idx, shard, model, subwords, keep_prob, neg_cdf, rng,
                  tokens_done, total_budget):
    results[idx] = _run_epoch(
        shard, model, subwords, keep_prob, neg_cdf, rng, tokens_done, total_budget
    )


def _run_epoch(id_sentences, model, subwords, keep_prob, neg_cdf, rng,
               tokens_done, total_budget):
    """One pass over the sentences, updating the matrices in place."""
    config = model.config
    input_vectors = model.input_vectors
    output_vectors = model.output_vectors
    base_lr = config.learning_rate
    window = config.window
    negatives = config.negatives
    epoch_loss = 0.0
    epoch_pairs = 0
    for ids, raw_len in id_sentences:
        lr = base_lr * max(1e-4, 1.0 - tokens_done / total_budget)
        tokens_done += raw_len
        if not ids.size:
            continue
        kept = ids[rng.random(ids.size) < keep_prob[ids]]
        for pos in range(kept.size):
            center = kept[pos]
            b = int(rng.integers(1, window + 1))
            in_ids = subwords[center]
            for ctx_pos in range(max(0, pos - b), min(kept.size, pos + b + 1)):
                if ctx_pos == pos:
                    continue
                out_ids = _draw_negatives(rng, neg_cdf, kept[ctx_pos], negatives)
                loss, grad_in_row, grad_out = example_loss(
                    input_vectors[in_ids], output_vectors[out_ids]
                )
                epoch_loss += loss
                epoch_pairs += 1
                np.add.at(
                    output_vectors, out_ids, ((-lr) * grad_out).astype(np.float32)
                )
                np.add.at(
                    input_vectors, in_ids, ((-lr) * grad_in_row).astype(np.float32)
                )
    return epoch_loss, epoch_pairs


def _draw_negatives(rng, neg_cdf, context, negatives):
    """Context row followed by ``negatives`` rows drawn from the unigram
    distribution raised to 0.75, redrawing any that collide with the
    context word."""
    out_ids = np.empty(1 + negatives, dtype=np.int64)
    out_ids[0] = context
    draws = np.searchsorted(neg_cdf, rng.random(negatives), side="left")
    for i in range(negatives):
        d = draws[i]
        while d == context:
            d = int(np.searchsorted(neg_cdf, rng.random(), side="left"))
        out_ids[i + 1] = d
    return out_ids
