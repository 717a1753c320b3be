"""Split extracted plaintext into annotatable segments.

A segment is a paragraph (blank-line separated). Paragraphs whose
normalized token count exceeds ``max_tokens`` are split at sentence
boundaries, packing consecutive sentences greedily; a single oversized
sentence is split at word boundaries as a last resort. Anything below
``min_tokens`` tokens after normalization is dropped.
"""

from __future__ import annotations

import re

from .documents import Segment
from .normalize import normalize

_PARAGRAPH_BREAK = re.compile(r"\n[ \t\r\f\v]*\n+")
_SENTENCE_END = re.compile(r"(?<=[.!?])[)\"']*\s+")
_WORD = re.compile(r"\S+")


def segment(
    plaintext: str,
    min_tokens: int = 5,
    max_tokens: int = 128,
    *,
    doc_id: str = "",
    stopwords=None,
) -> list[Segment]:
    """Split plaintext into segments; returns [] for empty input."""
    if min_tokens < 0 or max_tokens < 1:
        raise ValueError("min_tokens must be >= 0 and max_tokens >= 1")

    segments: list[Segment] = []
    for para in _PARAGRAPH_BREAK.split(plaintext):
        para = para.strip()
        if not para:
            continue
        for piece in _split_paragraph(para, max_tokens, stopwords):
            tokens = normalize(piece, stopwords)
            if len(tokens) < min_tokens:
                continue
            segments.append(Segment(doc_id=doc_id, seg_id=len(segments), text=piece, tokens=tokens))
    return segments


def _count(text: str, stopwords) -> int:
    return len(normalize(text, stopwords))


def _split_paragraph(para: str, max_tokens: int, stopwords) -> list[str]:
    if _count(para, stopwords) <= max_tokens:
        return [para]

    pieces: list[str] = []
    run_start = None  # char offset of the sentence run being packed
    run_count = 0

    def flush(end: int):
        nonlocal run_start, run_count
        if run_start is not None:
            text = para[run_start:end].strip()
            if text:
                pieces.append(text)
        run_start, run_count = None, 0

    for start, end in _sentence_spans(para):
        n = _count(para[start:end], stopwords)
        if n > max_tokens:
            flush(start)
            pieces.extend(_split_sentence(para[start:end], max_tokens, stopwords))
        elif run_start is not None and run_count + n > max_tokens:
            flush(start)
            run_start, run_count = start, n
        else:
            if run_start is None:
                run_start = start
            run_count += n
    flush(len(para))
    return pieces


def _sentence_spans(text: str) -> list[tuple[int, int]]:
    spans = []
    start = 0
    for match in _SENTENCE_END.finditer(text):
        spans.append((start, match.start() + 1))
        start = match.end()
    if start < len(text):
        spans.append((start, len(text)))
    return spans


def _split_sentence(sentence: str, max_tokens: int, stopwords) -> list[str]:
    """Hard-split an oversized sentence at word boundaries."""
    pieces = []
    chunk_start = None
    chunk_count = 0
    for match in _WORD.finditer(sentence):
        n = _count(match.group(), stopwords)
        if chunk_start is not None and chunk_count + n > max_tokens:
            pieces.append(sentence[chunk_start:match.start()].strip())
            chunk_start, chunk_count = None, 0
        if chunk_start is None:
            chunk_start = match.start()
        chunk_count += n
    if chunk_start is not None:
        tail = sentence[chunk_start:].strip()
        if tail:
            pieces.append(tail)
    return pieces
