"""Document and segment types."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone


@dataclass
class Segment:
    """One annotatable unit of a policy document."""

    doc_id: str
    seg_id: int
    text: str
    tokens: list[str] = field(default_factory=list)

    @property
    def ref(self) -> tuple[str, int]:
        return (self.doc_id, self.seg_id)


@dataclass
class PolicyDocument:
    doc_id: str
    url: str
    fetched_at: datetime
    plaintext: str = ""
    segments: list[Segment] = field(default_factory=list)
    raw_html: str | None = None


def document_from_html(
    doc_id: str,
    url: str,
    html: str,
    fetched_at: datetime | None = None,
    *,
    min_tokens: int = 5,
    max_tokens: int = 128,
    stopwords=None,
    keep_html: bool = False,
) -> PolicyDocument:
    """Run the extract + segment pipeline over one fetched page."""
    from .extract import extract_text
    from .segment import segment as segment_text

    if fetched_at is None:
        fetched_at = datetime.now(timezone.utc)
    plaintext = extract_text(html)
    segments = segment_text(
        plaintext, min_tokens=min_tokens, max_tokens=max_tokens,
        doc_id=doc_id, stopwords=stopwords,
    )
    return PolicyDocument(
        doc_id=doc_id,
        url=url,
        fetched_at=fetched_at,
        plaintext=plaintext,
        segments=segments,
        raw_html=html if keep_html else None,
    )
