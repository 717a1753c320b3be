"""Privacy-corpus subword word embeddings.

A skip-gram model with negative sampling where each word is represented
by itself plus its character n-grams, hashed into a fixed number of
buckets. Words never seen in training still get vectors composed from
their n-grams.
"""

from .model import EmbeddingConfig, EmbeddingModel
from .ngrams import char_ngrams, fnv1a_32, ngram_bucket
from .store import load_embeddings, save_embeddings
from .train import example_loss, train_skipgram

__all__ = [
    "EmbeddingConfig",
    "EmbeddingModel",
    "char_ngrams",
    "fnv1a_32",
    "ngram_bucket",
    "load_embeddings",
    "save_embeddings",
    "example_loss",
    "train_skipgram",
]
