"""Corpus persistence: one JSON object per line.

Line schema: {"doc_id", "url", "fetched_at", "segments": [{"seg_id", "text"}]}.
Tokens and plaintext are not stored; tokens are recomputed on load and
plaintext is rebuilt by joining segment texts with a blank line.
"""

from __future__ import annotations

import json
from datetime import datetime
from pathlib import Path
from typing import Iterable

from ..errors import ParseError
from .documents import PolicyDocument, Segment
from .normalize import normalize


def save_corpus(documents: Iterable[PolicyDocument], path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for doc in documents:
            record = {
                "doc_id": doc.doc_id,
                "url": doc.url,
                "fetched_at": doc.fetched_at.isoformat(),
                "segments": [{"seg_id": s.seg_id, "text": s.text} for s in doc.segments],
            }
            fh.write(json.dumps(record, ensure_ascii=True, separators=(",", ":")))
            fh.write("\n")


def load_corpus(path, stopwords=None) -> list[PolicyDocument]:
    """Load a corpus file; raises ParseError with the offending line number."""
    documents = []
    seen_ids = set()
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", line=lineno) from exc
            try:
                doc = _document_from_record(record, stopwords)
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"bad document record: {exc}", line=lineno) from exc
            if doc.doc_id in seen_ids:
                raise ParseError(f"duplicate doc_id {doc.doc_id!r}", line=lineno)
            seen_ids.add(doc.doc_id)
            documents.append(doc)
    return documents


def _document_from_record(record: dict, stopwords) -> PolicyDocument:
    doc_id = record["doc_id"]
    if not isinstance(doc_id, str) or not doc_id:
        raise ValueError("doc_id must be a non-empty string")
    segments = [
        Segment(
            doc_id=doc_id,
            seg_id=int(seg["seg_id"]),
            text=seg["text"],
            tokens=normalize(seg["text"], stopwords),
        )
        for seg in record["segments"]
    ]
    return PolicyDocument(
        doc_id=doc_id,
        url=record["url"],
        fetched_at=datetime.fromisoformat(record["fetched_at"]),
        plaintext="\n\n".join(s.text for s in segments),
        segments=segments,
    )


def save_plaintext_documents(documents: Iterable[PolicyDocument], path) -> None:
    """Write extracted-but-unsegmented documents as JSON lines.

    Line schema: {"doc_id", "url", "fetched_at", "plaintext"}. This is
    the intermediate between text extraction and segmentation; the
    segment step turns it into the corpus format above.
    """
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for doc in documents:
            record = {
                "doc_id": doc.doc_id,
                "url": doc.url,
                "fetched_at": doc.fetched_at.isoformat(),
                "plaintext": doc.plaintext,
            }
            fh.write(json.dumps(record, ensure_ascii=True, separators=(",", ":")))
            fh.write("\n")


def load_plaintext_documents(path) -> list[PolicyDocument]:
    """Load a plaintext document file written by the extract step."""
    documents = []
    seen_ids = set()
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", line=lineno) from exc
            try:
                doc_id = record["doc_id"]
                if not isinstance(doc_id, str) or not doc_id:
                    raise ValueError("doc_id must be a non-empty string")
                doc = PolicyDocument(
                    doc_id=doc_id,
                    url=record["url"],
                    fetched_at=datetime.fromisoformat(record["fetched_at"]),
                    plaintext=str(record["plaintext"]),
                    segments=[],
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"bad document record: {exc}", line=lineno) from exc
            if doc.doc_id in seen_ids:
                raise ParseError(f"duplicate doc_id {doc.doc_id!r}", line=lineno)
            seen_ids.add(doc.doc_id)
            documents.append(doc)
    return documents


def read_url_list(path) -> list[str]:
    """Read a urls.txt file: one URL per line, ``#`` comments allowed."""
    urls = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            urls.append(line)
    return urls
