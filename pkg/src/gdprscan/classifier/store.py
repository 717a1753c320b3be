"""Classifier persistence: manifest plus one packed weight file."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from ..errors import FormatError
from ..nn import ConvTextNet
from ..nn.network import PARAM_ORDER
from .model import ClassifierConfig, CnnClassifier

FORMAT_VERSION = 1

_MANIFEST = "manifest.json"
_WEIGHTS = "weights.f32"


def _packed_bytes(net: ConvTextNet) -> bytes:
    parts = [np.ascontiguousarray(net.params[name], dtype="<f4").tobytes()
             for name in PARAM_ORDER]
    return b"".join(parts)


def save_model(model: CnnClassifier, directory) -> None:
    """Write the classifier into ``directory`` (created if needed).

    ``weights.f32`` concatenates every tensor in the manifest's
    ``tensor_order``, flattened row major as little-endian float32. The
    manifest records each tensor's shape, the embedding checksum the
    model is bound to, and a SHA-256 digest of the weight bytes so
    corruption is caught at load time.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    blob = _packed_bytes(model.net)
    manifest = {
        "format_version": FORMAT_VERSION,
        "kind": "cnn-classifier",
        "config": model.config.to_dict(),
        "embedding_checksum": model.embedding_checksum,
        "tensor_order": [
            {"name": name, "shape": list(model.net.params[name].shape)}
            for name in PARAM_ORDER
        ],
        "weights_digest": hashlib.sha256(blob).hexdigest(),
    }
    with open(directory / _MANIFEST, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, ensure_ascii=True, indent=2, sort_keys=True)
        fh.write("\n")
    (directory / _WEIGHTS).write_bytes(blob)


def load_model(directory) -> CnnClassifier:
    """Load a classifier saved by :func:`save_model`.

    Raises FormatError on a missing or malformed manifest, unknown
    format version, digest mismatch, or weight sizes that do not add
    up. The embedding binding is checked later, at predict time.
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
    if manifest.get("format_version") != FORMAT_VERSION:
        raise FormatError(
            "unsupported format_version %r (expected %r)"
            % (manifest.get("format_version"), FORMAT_VERSION)
        )
    try:
        config = ClassifierConfig.from_dict(manifest["config"])
        embedding_checksum = str(manifest["embedding_checksum"])
        tensor_order = [
            (str(entry["name"]), tuple(int(n) for n in entry["shape"]))
            for entry in manifest["tensor_order"]
        ]
        digest = str(manifest["weights_digest"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError("malformed manifest: %s" % (exc,))
    if [name for name, _ in tensor_order] != list(PARAM_ORDER):
        raise FormatError(
            "unexpected tensor order %r" % ([name for name, _ in tensor_order],)
        )

    weights_path = directory / _WEIGHTS
    if not weights_path.is_file():
        raise FormatError("missing weight file: %s" % (weights_path,))
    blob = weights_path.read_bytes()
    if hashlib.sha256(blob).hexdigest() != digest:
        raise FormatError("weight file does not match its stored digest")
    expected = 4 * sum(int(np.prod(shape)) for _, shape in tensor_order)
    if len(blob) != expected:
        raise FormatError(
            "weight file holds %d bytes, expected %d" % (len(blob), expected)
        )

    params = {}
    offset = 0
    for name, shape in tensor_order:
        count = int(np.prod(shape))
        arr = np.frombuffer(blob, dtype="<f4", count=count, offset=offset)
        params[name] = arr.reshape(shape).copy()
        offset += 4 * count
    net = ConvTextNet(params, dropout_conv=config.dropout_conv,
                      dropout_fc=config.dropout_fc)
    return CnnClassifier(config, embedding_checksum, net)
