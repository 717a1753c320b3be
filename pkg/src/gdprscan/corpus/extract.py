"""HTML to plaintext extraction.

Strips tags, drops script/style/nav content, turns block elements into
paragraph breaks (a blank line), and removes non-ASCII characters. The
output contains no HTML syntax characters at all, which makes the
function idempotent: feeding its own output back in reproduces it.
"""

from __future__ import annotations

import re
from html.parser import HTMLParser

# Elements whose text content never belongs in the extracted policy.
_SKIP_TAGS = {"script", "style", "nav", "noscript", "head", "template"}

# Elements that terminate the current paragraph. <br> is included: a
# forced line break reads as a segment boundary in policy pages.
_BLOCK_TAGS = {
    "address", "article", "aside", "blockquote", "br", "dd", "div", "dl",
    "dt", "fieldset", "figcaption", "figure", "footer", "form", "h1", "h2",
    "h3", "h4", "h5", "h6", "header", "hr", "li", "main", "ol", "p", "pre",
    "section", "table", "tbody", "td", "tfoot", "th", "thead", "tr", "ul",
}

_BLANK_LINE = re.compile(r"\n[ \t\r\f\v]*\n")
# Residual HTML syntax characters are neutralized so that re-parsing the
# output cannot reinterpret them as markup or character references.
_MARKUP_CHARS = re.compile(r"[<>&]")
_NON_ASCII = re.compile(r"[^\x00-\x7f]")
_WS = re.compile(r"\s+")
_TAG_FALLBACK = re.compile(r"<[^>]*>")


class _TextExtractor(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.paragraphs: list[str] = []
        self._chunks: list[str] = []
        self._skip_depth = 0

    def handle_starttag(self, tag, attrs):
        if tag in _SKIP_TAGS:
            self._skip_depth += 1
        elif tag in _BLOCK_TAGS:
            self._flush()

    def handle_endtag(self, tag):
        if tag in _SKIP_TAGS:
            self._skip_depth = max(0, self._skip_depth - 1)
        elif tag in _BLOCK_TAGS:
            self._flush()

    def handle_data(self, data):
        if self._skip_depth == 0 and data:
            self._chunks.append(data)

    def close(self):
        super().close()
        self._flush()

    def _flush(self):
        raw = "".join(self._chunks)
        self._chunks = []
        # Blank lines inside character data also separate paragraphs, so
        # already-extracted plaintext keeps its structure on re-extraction.
        for piece in _BLANK_LINE.split(raw):
            para = _clean_fragment(piece)
            if para:
                self.paragraphs.append(para)


def _clean_fragment(text: str) -> str:
    text = _NON_ASCII.sub("", text)
    text = _MARKUP_CHARS.sub(" ", text)
    return _WS.sub(" ", text).strip()


def extract_text(html: str) -> str:
    """Extract plaintext from HTML (or pass plain text through cleanly).

    Paragraphs are joined with a blank line. Never raises on malformed
    markup; the worst case falls back to regex tag stripping.
    """
    try:
        parser = _TextExtractor()
        parser.feed(html)
        parser.close()
        paragraphs = parser.paragraphs
    except Exception:
        stripped = _TAG_FALLBACK.sub(" ", html)
        paragraphs = [p for p in (_clean_fragment(x) for x in _BLANK_LINE.split(stripped)) if p]
    return "\n\n".join(paragraphs)
