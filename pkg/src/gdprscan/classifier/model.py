"""Classifier model types and segment encoding."""

from __future__ import annotations

import weakref
from dataclasses import asdict, dataclass, field

import numpy as np

from ..corpus import Segment
from ..errors import InvalidLabel, ModelMismatch, ShapeError
from ..labels import N_REQUIREMENTS, label_from_code
from ..nn import ConvTextNet, philox_rng


@dataclass(frozen=True)
class ClassifierConfig:
    """CNN hyperparameters.

    Defaults follow the reference setup: 400 filters of width 4 over
    the embedding sequence, a 256-unit hidden layer, dropout 0.1 after
    the convolution and 0.5 after the hidden layer, 50 epochs at
    learning rate 0.001.
    """

    n_filters: int = 400
    kernel_size: int = 4
    fc_units: int = 256
    n_classes: int = N_REQUIREMENTS
    dropout_conv: float = 0.1
    dropout_fc: float = 0.5
    max_len: int = 128
    epochs: int = 50
    learning_rate: float = 0.001
    batch_size: int = 32
    seed: int = 1

    def __post_init__(self) -> None:
        for name in ("n_filters", "kernel_size", "fc_units", "n_classes",
                     "max_len", "epochs", "batch_size"):
            if getattr(self, name) < 1:
                raise ValueError("%s must be positive, got %r" % (name, getattr(self, name)))
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive, got %r" % (self.learning_rate,))
        for name in ("dropout_conv", "dropout_fc"):
            rate = getattr(self, name)
            if not 0.0 <= rate < 1.0:
                raise ValueError("%s must lie in [0, 1), got %r" % (name, rate))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ClassifierConfig":
        return cls(**data)


@dataclass(frozen=True)
class LabeledSegment:
    """A segment paired with its gold requirement label (codes 1..18).

    The catch-all class is never a training target, so code 0 is
    rejected here along with out-of-range codes.
    """

    segment: Segment
    label_code: int

    def __post_init__(self) -> None:
        label = label_from_code(self.label_code)
        if label.is_other():
            raise InvalidLabel("labeled segments must carry a requirement, not %s" % (label.name,))

    @property
    def doc_id(self) -> str:
        return self.segment.doc_id


@dataclass
class TrainHistory:
    """Per-epoch training curves.

    ``val_macro_f1`` stays None when no validation set was supplied.
    """

    train_loss: list[float] = field(default_factory=list)
    train_accuracy: list[float] = field(default_factory=list)
    val_macro_f1: list[float] | None = None


def top_two(probs: np.ndarray) -> tuple[int, int, float]:
    """Two most probable class codes and their probability gap.

    Ties are broken toward the lower class code by the stable
    descending sort. Codes are 1-based (row 0 is class code 1).
    """
    order = np.argsort(-probs, kind="stable")
    i1, i2 = int(order[0]), int(order[1])
    return i1 + 1, i2 + 1, float(probs[i1] - probs[i2])


def encode_segment(embeddings, tokens, max_len: int) -> np.ndarray:
    """Stack composed word vectors into a fixed ``max_len x dim`` matrix.

    Row t holds the vector of token t. Tokens past ``max_len`` are cut
    off; unfilled rows stay zero, which the max-pool treats as inert
    for any filter with a positive response elsewhere.
    """
    if max_len < 1:
        raise ValueError("max_len must be positive, got %r" % (max_len,))
    out = np.zeros((max_len, embeddings.config.dim), dtype=np.float32)
    for t, token in enumerate(tokens[:max_len]):
        out[t] = embeddings.word_vector(token)
    return out


class CnnClassifier:
    """Trained CNN bound to the embedding model it was encoded with.

    The binding is by checksum: predictions against a different
    embedding model raise ModelMismatch instead of silently producing
    garbage.
    """

    def __init__(self, config: ClassifierConfig, embedding_checksum: str,
                 net: ConvTextNet):
        if net.n_classes != config.n_classes:
            raise ShapeError(
                "network emits %d classes, config says %d"
                % (net.n_classes, config.n_classes)
            )
        self.config = config
        self.embedding_checksum = embedding_checksum
        self.net = net
        # embedding objects whose checksum already matched, so repeated
        # predictions need not rehash the matrices
        self._verified = weakref.WeakSet()

    @classmethod
    def init(cls, config: ClassifierConfig, embeddings) -> "CnnClassifier":
        """Fresh random weights, seeded from the config."""
        net = ConvTextNet.init(
            embed_dim=embeddings.config.dim,
            n_filters=config.n_filters,
            kernel_size=config.kernel_size,
            fc_units=config.fc_units,
            n_classes=config.n_classes,
            rng=philox_rng(config.seed),
            dropout_conv=config.dropout_conv,
            dropout_fc=config.dropout_fc,
        )
        return cls(config, embeddings.checksum(), net)

    def check_embeddings(self, embeddings) -> None:
        if embeddings in self._verified:
            return
        actual = embeddings.checksum()
        if actual != self.embedding_checksum:
            raise ModelMismatch(
                "classifier was trained against embedding %s..., got %s..."
                % (self.embedding_checksum[:12], actual[:12])
            )
        self._verified.add(embeddings)

    def forward(self, encoded: np.ndarray, train_mode: bool = False,
                rng=None) -> np.ndarray:
        """Probability vector for one encoded segment (max_len x dim)."""
        return self.net.forward(encoded, train_mode=train_mode, rng=rng)

    def forward_batch(self, encoded: np.ndarray, train_mode: bool = False,
                      rng=None) -> np.ndarray:
        return self.net.forward_batch(encoded, train_mode=train_mode, rng=rng)

    def predict_encoded(self, encoded: np.ndarray):
        """Eval-mode prediction on a pre-encoded segment.

        Returns (probabilities, top class code, margin between the two
        most probable classes). Probability ties go to the lower class
        code.
        """
        probs = self.forward(encoded, train_mode=False)
        code1, _, margin = top_two(probs)
        return probs, code1, margin

    def predict(self, embeddings, tokens):
        """Encode ``tokens`` with ``embeddings`` and predict.

        Raises ModelMismatch when the embedding checksum differs from
        the one the classifier was trained with.
        """
        self.check_embeddings(embeddings)
        encoded = encode_segment(embeddings, tokens, self.config.max_len)
        return self.predict_encoded(encoded)
