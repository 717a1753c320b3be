"""Segment classifier: a 1-D CNN over frozen subword embeddings."""

from .model import (
    ClassifierConfig,
    CnnClassifier,
    LabeledSegment,
    TrainHistory,
    encode_segment,
    top_two,
)
from .store import load_model, save_model
from .train import evaluate, predict_batch, requirement_class_names, split_by_document, train

__all__ = [
    "ClassifierConfig",
    "CnnClassifier",
    "LabeledSegment",
    "TrainHistory",
    "encode_segment",
    "top_two",
    "load_model",
    "save_model",
    "evaluate",
    "predict_batch",
    "requirement_class_names",
    "split_by_document",
    "train",
]
