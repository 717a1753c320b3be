"""Shared fixtures: one small trained world reused across test modules.

The profile below is the smallest found that still memorizes its
training data (several tests lean on that), costing roughly ten
seconds. The fixture is session-scoped and must be treated as
read-only by every test that touches it.
"""

from types import SimpleNamespace

import pytest

from gdprscan.classifier import ClassifierConfig, train
from gdprscan.embeddings import EmbeddingConfig, train_skipgram
from gdprscan.synth import SynthConfig, labeled_segments, synthetic_corpus

TINY_CORPUS = SynthConfig(n_docs=36, min_segments=5, max_segments=8, seed=5)
TINY_EMBEDDING = EmbeddingConfig(
    dim=32, n_min=3, n_max=4, epochs=40, learning_rate=0.1, window=3,
    negatives=5, min_count=1, bucket_count=3000, subsample_t=0.003, seed=3,
)
TINY_CLASSIFIER = ClassifierConfig(
    n_filters=48, kernel_size=4, fc_units=48, max_len=12, epochs=100,
    learning_rate=0.001, batch_size=16, seed=4,
)


@pytest.fixture(scope="session")
def tiny_world():
    docs, oracle = synthetic_corpus(TINY_CORPUS)
    sentences = [seg.tokens for doc in docs for seg in doc.segments]
    embeddings = train_skipgram(sentences, TINY_EMBEDDING)
    labeled = labeled_segments(docs, oracle)
    model, history = train(labeled, None, embeddings, TINY_CLASSIFIER)
    return SimpleNamespace(
        docs=docs,
        oracle=oracle,
        sentences=sentences,
        embeddings=embeddings,
        labeled=labeled,
        model=model,
        history=history,
    )
