"""Corpus construction: fetch pages, extract plaintext, segment, tokenize, persist."""

from .documents import PolicyDocument, Segment, document_from_html
from .extract import extract_text
from .fetch import Fetcher, FetchResult
from .normalize import load_stopwords, default_stopwords, normalize
from .segment import segment
from .store import (load_corpus, load_plaintext_documents, read_url_list,
                    save_corpus, save_plaintext_documents)

__all__ = [
    "PolicyDocument",
    "Segment",
    "document_from_html",
    "extract_text",
    "Fetcher",
    "FetchResult",
    "load_stopwords",
    "default_stopwords",
    "normalize",
    "segment",
    "load_corpus",
    "save_corpus",
    "load_plaintext_documents",
    "save_plaintext_documents",
    "read_url_list",
]
