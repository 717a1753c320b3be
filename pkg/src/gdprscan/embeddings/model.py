"""Embedding model container: vocabulary, vector matrices, lookup."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import ShapeError
from .ngrams import char_ngrams, ngram_bucket


@dataclass(frozen=True)
class EmbeddingConfig:
    """Hyperparameters of the subword skip-gram model.

    Attributes
    ----------
    dim : int
        Dimensionality of every word and n-gram vector.
    n_min, n_max : int
        Range of character n-gram lengths, inclusive.
    epochs : int
        Passes over the token stream.
    learning_rate : float
        Starting learning rate, decayed linearly to zero over training.
    window : int
        Maximum one-sided context window; the effective window for each
        position is drawn uniformly from ``1..window``.
    negatives : int
        Negative samples per (center, context) pair.
    min_count : int
        Words occurring fewer times than this are dropped from the
        vocabulary.
    bucket_count : int
        Number of hash buckets shared by all character n-grams. Lower it
        for small experiments; each bucket costs ``dim`` float32 cells.
    subsample_t : float
        Frequency threshold for downsampling very common words.
    seed : int
        Seed for the training RNG.
    """

    dim: int = 300
    n_min: int = 3
    n_max: int = 6
    epochs: int = 5
    learning_rate: float = 0.05
    window: int = 5
    negatives: int = 5
    min_count: int = 1
    bucket_count: int = 2_000_000
    subsample_t: float = 1e-4
    seed: int = 1

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be positive, got %r" % (self.dim,))
        if self.n_min < 1:
            raise ValueError("n_min must be at least 1, got %r" % (self.n_min,))
        if self.n_max < self.n_min:
            raise ValueError(
                "n_max must not be smaller than n_min, got %r < %r"
                % (self.n_max, self.n_min)
            )
        if self.epochs < 1:
            raise ValueError("epochs must be positive, got %r" % (self.epochs,))
        if self.learning_rate <= 0:
            raise ValueError(
                "learning_rate must be positive, got %r" % (self.learning_rate,)
            )
        if self.window < 1:
            raise ValueError("window must be positive, got %r" % (self.window,))
        if self.negatives < 1:
            raise ValueError("negatives must be positive, got %r" % (self.negatives,))
        if self.min_count < 1:
            raise ValueError("min_count must be positive, got %r" % (self.min_count,))
        if self.bucket_count < 1:
            raise ValueError(
                "bucket_count must be positive, got %r" % (self.bucket_count,)
            )
        if self.subsample_t <= 0:
            raise ValueError(
                "subsample_t must be positive, got %r" % (self.subsample_t,)
            )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "EmbeddingConfig":
        return cls(**data)


class EmbeddingModel:
    """Trained (or freshly initialized) subword embedding model.

    The input matrix holds one row per vocabulary word followed by one
    row per n-gram bucket, so n-gram rows live at ``len(words) +
    bucket``. The output matrix holds one context row per vocabulary
    word and exists only for training; composed word vectors come from
    the input side.

    Parameters
    ----------
    config : EmbeddingConfig
    words : list of str
        Vocabulary in index order.
    counts : ndarray of int64, shape (len(words),)
        Corpus frequency of each vocabulary word.
    input_vectors : ndarray of float32, shape (len(words) + bucket_count, dim)
    output_vectors : ndarray of float32, shape (len(words), dim)
    """

    def __init__(self, config, words, counts, input_vectors, output_vectors):
        counts = np.asarray(counts, dtype=np.int64)
        input_vectors = np.ascontiguousarray(input_vectors, dtype=np.float32)
        output_vectors = np.ascontiguousarray(output_vectors, dtype=np.float32)
        if counts.shape != (len(words),):
            raise ShapeError(
                "counts shape %r does not match %d vocabulary words"
                % (counts.shape, len(words))
            )
        expected_in = (len(words) + config.bucket_count, config.dim)
        if input_vectors.shape != expected_in:
            raise ShapeError(
                "input matrix shape %r, expected %r"
                % (input_vectors.shape, expected_in)
            )
        expected_out = (len(words), config.dim)
        if output_vectors.shape != expected_out:
            raise ShapeError(
                "output matrix shape %r, expected %r"
                % (output_vectors.shape, expected_out)
            )
        self.config = config
        self.words = list(words)
        self.counts = counts
        self.input_vectors = input_vectors
        self.output_vectors = output_vectors
        self.word_index = {w: i for i, w in enumerate(self.words)}
        if len(self.word_index) != len(self.words):
            raise ValueError("vocabulary contains duplicate words")
        self._subword_cache: dict[str, np.ndarray] = {}
        self._composed: np.ndarray | None = None
        # filled by train_skipgram: mean example loss per epoch
        self.history: list[float] | None = None

    @property
    def vocab_size(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.word_index

    def subword_ids(self, word: str) -> np.ndarray:
        """Input-matrix row indices whose mean composes ``word``'s vector.

        For an in-vocabulary word: its own row plus the rows of its
        n-gram buckets. For an unseen word: the n-gram bucket rows only.
        Duplicate bucket rows are kept, matching their weight in the
        mean.
        """
        cached = self._subword_cache.get(word)
        if cached is not None:
            return cached
        cfg = self.config
        ids = []
        idx = self.word_index.get(word)
        if idx is not None:
            ids.append(idx)
        offset = len(self.words)
        for gram in char_ngrams(word, cfg.n_min, cfg.n_max):
            ids.append(offset + ngram_bucket(gram, cfg.bucket_count))
        out = np.asarray(ids, dtype=np.int64)
        self._subword_cache[word] = out
        return out

    def word_vector(self, word: str) -> np.ndarray:
        """Compose the vector for ``word`` as the mean of its subword rows.

        Works for any word; an unseen word with no n-grams in range
        (impossible under the default gram lengths, which always keep at
        least the wrapped word) gets the zero vector.
        """
        ids = self.subword_ids(word)
        if ids.size == 0:
            return np.zeros(self.config.dim, dtype=np.float32)
        return self.input_vectors[ids].mean(axis=0, dtype=np.float64).astype(np.float32)

    def _composed_matrix(self) -> np.ndarray:
        if self._composed is None:
            out = np.empty((len(self.words), self.config.dim), dtype=np.float32)
            for i, word in enumerate(self.words):
                out[i] = self.word_vector(word)
            self._composed = out
        return self._composed

    def nearest_neighbors(self, word: str, k: int = 10) -> list[tuple[str, float]]:
        """Vocabulary words most cosine-similar to ``word``'s composed vector.

        The query word itself is excluded when in vocabulary. Returns at
        most ``k`` pairs of (word, similarity), best first; ties broken
        by vocabulary index. Words whose composed vector is zero get
        similarity 0 by convention.
        """
        if k < 1:
            raise ValueError("k must be positive, got %r" % (k,))
        query = self.word_vector(word).astype(np.float64)
        qnorm = np.linalg.norm(query)
        mat = self._composed_matrix().astype(np.float64)
        norms = np.linalg.norm(mat, axis=1)
        denom = qnorm * norms
        with np.errstate(divide="ignore", invalid="ignore"):
            sims = np.where(denom > 0, mat @ query / np.where(denom > 0, denom, 1.0), 0.0)
        self_idx = self.word_index.get(word)
        if self_idx is not None:
            sims[self_idx] = -np.inf
        order = np.argsort(-sims, kind="stable")
        top = [i for i in order if sims[i] != -np.inf][:k]
        return [(self.words[i], float(sims[i])) for i in top]

    def checksum(self) -> str:
        """SHA-256 hex digest binding config, vocabulary, and matrices.

        Classifiers store this digest so a model trained against one
        embedding refuses to silently run against another.
        """
        h = hashlib.sha256()
        h.update(
            json.dumps(self.config.to_dict(), sort_keys=True).encode("utf-8")
        )
        h.update(b"\x00")
        for word, count in zip(self.words, self.counts):
            h.update(word.encode("utf-8"))
            h.update(b"\x1f")
            h.update(str(int(count)).encode("ascii"))
            h.update(b"\x1e")
        h.update(b"\x00")
        h.update(np.ascontiguousarray(self.input_vectors).tobytes())
        h.update(b"\x00")
        h.update(np.ascontiguousarray(self.output_vectors).tobytes())
        return h.hexdigest()
