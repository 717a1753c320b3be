"""Token normalization: lowercase, strip punctuation/digits, drop stop words."""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources

# Anything that is not an ASCII letter becomes a token boundary. Digits,
# punctuation, special characters, and non-ASCII letters all disappear.
_NON_LETTER = re.compile(r"[^a-z]+")


@lru_cache(maxsize=1)
def default_stopwords() -> frozenset[str]:
    """The stop-word list shipped with the package."""
    text = resources.files("gdprscan.data").joinpath("stopwords.txt").read_text("utf-8")
    return _parse_stopwords(text)


def load_stopwords(path) -> frozenset[str]:
    """Load a stop-word file: one word per line, ``#`` comments allowed."""
    with open(path, encoding="utf-8") as fh:
        return _parse_stopwords(fh.read())


def _parse_stopwords(text: str) -> frozenset[str]:
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line.lower())
    return frozenset(words)


def normalize(text: str, stopwords: frozenset[str] | None = None) -> list[str]:
    """Lowercase, drop punctuation/digits/special characters, remove stop words.

    Order of surviving tokens is preserved. Empty input gives an empty list.
    """
    if stopwords is None:
        stopwords = default_stopwords()
    cleaned = _NON_LETTER.sub(" ", text.lower())
    return [tok for tok in cleaned.split() if tok not in stopwords]
