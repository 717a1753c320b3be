"""Character n-gram extraction and hashing for subword vectors."""

from __future__ import annotations

_FNV_OFFSET = 0x811C9DC5
_FNV_PRIME = 0x01000193


def char_ngrams(word: str, n_min: int, n_max: int) -> list[str]:
    """Enumerate the character n-grams of ``word``.

    The word is wrapped in angle-bracket boundary markers before
    extraction, so ``where`` yields ``<wh`` and ``re>`` among its
    trigrams and the markers let prefixes and suffixes hash apart
    from word-internal grams.

    Grams are produced shortest length first, and left to right within
    a length. The full wrapped form is excluded (the word itself already
    has a dedicated vector row) unless it is the only candidate, in
    which case it is kept so that every word has at least one subword.

    Parameters
    ----------
    word : str
        Word to decompose. Must be non-empty.
    n_min : int
        Smallest gram length, at least 1.
    n_max : int
        Largest gram length, at least `n_min`.

    Returns
    -------
    list of str
        The n-grams of the wrapped word, in enumeration order.

    Examples
    --------
    >>> char_ngrams("data", 3, 4)
    ['<da', 'dat', 'ata', 'ta>', '<dat', 'data', 'ata>']
    >>> char_ngrams("a", 3, 6)
    ['<a>']
    """
    if not word:
        raise ValueError("cannot extract n-grams from an empty word")
    if n_min < 1:
        raise ValueError("n_min must be at least 1, got %r" % (n_min,))
    if n_max < n_min:
        raise ValueError(
            "n_max must not be smaller than n_min, got %r < %r" % (n_max, n_min)
        )
    wrapped = "<" + word + ">"
    grams = []
    for n in range(n_min, n_max + 1):
        for start in range(len(wrapped) - n + 1):
            gram = wrapped[start : start + n]
            if gram != wrapped:
                grams.append(gram)
    if not grams and n_min <= len(wrapped) <= n_max:
        grams.append(wrapped)
    return grams


def fnv1a_32(data: bytes) -> int:
    """32-bit FNV-1a hash of ``data``.

    Starts from the 32-bit offset basis, then for each byte XORs it in
    and multiplies by the FNV prime, keeping the low 32 bits.
    """
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & 0xFFFFFFFF
    return h


def ngram_bucket(gram: str, bucket_count: int) -> int:
    """Map an n-gram string to a bucket index in ``[0, bucket_count)``.

    The gram is UTF-8 encoded, hashed with 32-bit FNV-1a, and reduced
    modulo the bucket count. Collisions are expected and harmless: the
    colliding grams simply share a vector row.
    """
    if bucket_count < 1:
        raise ValueError("bucket_count must be positive, got %r" % (bucket_count,))
    return fnv1a_32(gram.encode("utf-8")) % bucket_count
