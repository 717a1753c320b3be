"""Training, evaluation, and document-level splitting."""

from __future__ import annotations

import math

import numpy as np

from ..errors import CannotSplit, EmptyDataset, StateError
from ..labels import ALL_LABELS
from ..nn import AdamState, MetricsReport, adam_step, compute_metrics, philox_rng
from .model import ClassifierConfig, CnnClassifier, TrainHistory, encode_segment, top_two


def _encode_all(embeddings, segments, max_len: int) -> np.ndarray:
    """Encode segments into one (N, max_len, dim) block.

    Held in memory for the whole run; at desk scale (thousands of
    segments, reduced dimensions in tests) this is the fast path. Word
    vectors are memoized per token since policy text repeats heavily.
    """
    dim = embeddings.config.dim
    out = np.zeros((len(segments), max_len, dim), dtype=np.float32)
    cache: dict[str, np.ndarray] = {}
    for i, seg in enumerate(segments):
        for t, token in enumerate(seg.tokens[:max_len]):
            vec = cache.get(token)
            if vec is None:
                vec = embeddings.word_vector(token)
                cache[token] = vec
            out[i, t] = vec
    return out


def train(train_set, val_set, embeddings, config: ClassifierConfig):
    """Train a CNN on labeled segments with mini-batch Adam.

    The embedding model is never updated; its checksum is taken before
    and after the run and a mismatch aborts with StateError. Shuffling,
    weight init, and dropout all derive from ``config.seed``, so a
    fixed (data, config) pair reproduces the same model bit for bit.

    Parameters
    ----------
    train_set : list of LabeledSegment
    val_set : list of LabeledSegment or None
        When present, eval-mode macro-F1 is recorded each epoch.
    embeddings : EmbeddingModel
    config : ClassifierConfig

    Returns
    -------
    (CnnClassifier, TrainHistory)
    """
    if not train_set:
        raise EmptyDataset("no training segments")
    checksum_before = embeddings.checksum()

    model = CnnClassifier.init(config, embeddings)
    rng = philox_rng(config.seed + 1)

    x_train = _encode_all(embeddings, [ls.segment for ls in train_set], config.max_len)
    y_train = np.array([ls.label_code - 1 for ls in train_set], dtype=np.int64)
    if val_set:
        x_val = _encode_all(embeddings, [ls.segment for ls in val_set], config.max_len)
        y_val = np.array([ls.label_code - 1 for ls in val_set], dtype=np.int64)

    history = TrainHistory(val_macro_f1=[] if val_set else None)
    state = AdamState()
    n = len(train_set)
    for _epoch in range(config.epochs):
        perm = rng.permutation(n)
        epoch_loss = 0.0
        correct = 0
        for start in range(0, n, config.batch_size):
            batch = perm[start : start + config.batch_size]
            probs = model.net.forward_batch(x_train[batch], train_mode=True, rng=rng)
            epoch_loss += model.net.loss_batch(y_train[batch]) * batch.size
            correct += int((probs.argmax(axis=1) == y_train[batch]).sum())
            grads = model.net.backward_batch(y_train[batch])
            adam_step(model.net.params, grads, state, config.learning_rate)
        history.train_loss.append(epoch_loss / n)
        history.train_accuracy.append(correct / n)
        if val_set:
            val_probs = _eval_probs(model, x_val, config.batch_size)
            report = compute_metrics(
                val_probs.argmax(axis=1), y_val, n_classes=config.n_classes
            )
            history.val_macro_f1.append(report.macro_f1)

    if embeddings.checksum() != checksum_before:
        raise StateError("embedding matrices changed during classifier training")
    return model, history


def _eval_probs(model: CnnClassifier, encoded: np.ndarray, batch_size: int) -> np.ndarray:
    """Deterministic eval-mode probabilities, batched for throughput."""
    chunks = []
    for start in range(0, len(encoded), batch_size):
        chunks.append(model.net.forward_batch(encoded[start : start + batch_size]))
    return np.concatenate(chunks, axis=0)


def predict_batch(model: CnnClassifier, embeddings, segments, batch_size: int = 256):
    """Eval-mode predictions for many segments at once.

    Returns (probs (N, n_classes), top codes (N,), margins (N,)),
    agreeing element for element with ``model.predict``.
    """
    model.check_embeddings(embeddings)
    encoded = _encode_all(embeddings, segments, model.config.max_len)
    probs = _eval_probs(model, encoded, batch_size)
    codes = np.empty(len(segments), dtype=np.int64)
    margins = np.empty(len(segments))
    for i, row in enumerate(probs):
        codes[i], _, margins[i] = top_two(row)
    return probs, codes, margins


def evaluate(model: CnnClassifier, embeddings, test_set) -> MetricsReport:
    """Score the model on labeled segments.

    Only requirement-labeled segments enter (LabeledSegment enforces
    codes 1..18), matching how the training data is constructed.
    """
    if not test_set:
        raise EmptyDataset("no test segments")
    _, codes, _ = predict_batch(model, embeddings, [ls.segment for ls in test_set])
    golds = np.array([ls.label_code - 1 for ls in test_set], dtype=np.int64)
    return compute_metrics(codes - 1, golds, n_classes=model.config.n_classes)


def requirement_class_names() -> list[str]:
    """Row labels for metric tables, in class-code order."""
    return [label.name for label in ALL_LABELS if not label.is_other()]


def split_by_document(labeled_segments, ratio: float = 0.8, seed: int = 0):
    """Partition labeled segments into train/test by whole documents.

    Documents, not segments, are shuffled and split, so no document
    contributes to both sides. The train side gets floor(ratio * docs)
    documents, clamped so both sides keep at least one; the remainder
    goes to test.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must lie strictly between 0 and 1, got %r" % (ratio,))
    doc_ids = sorted({ls.segment.doc_id for ls in labeled_segments})
    if len(doc_ids) < 2:
        raise CannotSplit(
            "need at least 2 documents to split, got %d" % (len(doc_ids),)
        )
    rng = np.random.Generator(np.random.Philox(seed))
    order = rng.permutation(len(doc_ids))
    # tiny nudge so exact products like 0.29 * 100 floor to 29, not 28
    floor_share = math.floor(ratio * len(doc_ids) + 1e-9)
    n_train = min(max(1, floor_share), len(doc_ids) - 1)
    train_docs = {doc_ids[i] for i in order[:n_train]}
    train = [ls for ls in labeled_segments if ls.segment.doc_id in train_docs]
    test = [ls for ls in labeled_segments if ls.segment.doc_id not in train_docs]
    return train, test
