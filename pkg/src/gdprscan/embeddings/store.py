"""Embedding persistence: a manifest plus raw float32 matrix files."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import FormatError
from .model import EmbeddingConfig, EmbeddingModel

FORMAT_VERSION = 1
HASH_FUNCTION = "fnv1a-32"

_MANIFEST = "manifest.json"
_INPUT = "input.f32"
_OUTPUT = "output.f32"


def save_embeddings(model: EmbeddingModel, directory) -> None:
    """Write ``model`` into ``directory`` (created if needed).

    Layout: ``manifest.json`` with config, vocabulary, counts, shapes,
    and the n-gram hash function id; ``input.f32`` and ``output.f32``
    with the matrices as little-endian float32, row major.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {
        "format_version": FORMAT_VERSION,
        "kind": "subword-embeddings",
        "hash_function": HASH_FUNCTION,
        "config": model.config.to_dict(),
        "words": model.words,
        "counts": [int(c) for c in model.counts],
        "input_shape": list(model.input_vectors.shape),
        "output_shape": list(model.output_vectors.shape),
    }
    with open(directory / _MANIFEST, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, ensure_ascii=True, indent=2, sort_keys=True)
        fh.write("\n")
    model.input_vectors.astype("<f4").tofile(directory / _INPUT)
    model.output_vectors.astype("<f4").tofile(directory / _OUTPUT)


def load_embeddings(directory) -> EmbeddingModel:
    """Load a model saved by :func:`save_embeddings`.

    Raises
    ------
    FormatError
        If the manifest is missing or malformed, declares an unknown
        format version or hash function, or a matrix file's size does
        not match the declared shape.
    """
    directory = Path(directory)
    manifest_path = directory / _MANIFEST
    if not manifest_path.is_file():
        raise FormatError("missing manifest: %s" % (manifest_path,))
    try:
        with open(manifest_path, encoding="utf-8") as fh:
            manifest = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError("unreadable manifest %s: %s" % (manifest_path, exc))
    if not isinstance(manifest, dict):
        raise FormatError("manifest must be a JSON object")
    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise FormatError(
            "unsupported format_version %r (expected %r)" % (version, FORMAT_VERSION)
        )
    if manifest.get("hash_function") != HASH_FUNCTION:
        raise FormatError(
            "unsupported hash_function %r (expected %r)"
            % (manifest.get("hash_function"), HASH_FUNCTION)
        )
    try:
        config = EmbeddingConfig.from_dict(manifest["config"])
        words = list(manifest["words"])
        counts = np.array(manifest["counts"], dtype=np.int64)
        input_shape = tuple(int(n) for n in manifest["input_shape"])
        output_shape = tuple(int(n) for n in manifest["output_shape"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError("malformed manifest: %s" % (exc,))
    input_vectors = _read_matrix(directory / _INPUT, input_shape)
    output_vectors = _read_matrix(directory / _OUTPUT, output_shape)
    return EmbeddingModel(config, words, counts, input_vectors, output_vectors)


def _read_matrix(path: Path, shape: tuple[int, ...]) -> np.ndarray:
    if not path.is_file():
        raise FormatError("missing matrix file: %s" % (path,))
    expected = 4 * int(np.prod(shape))
    actual = path.stat().st_size
    if actual != expected:
        raise FormatError(
            "%s holds %d bytes, expected %d for shape %r"
            % (path, actual, expected, shape)
        )
    data = np.fromfile(path, dtype="<f4")
    return data.reshape(shape)
