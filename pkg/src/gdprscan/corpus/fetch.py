"""Polite HTTP fetching with per-host rate limiting."""

from __future__ import annotations

import threading
import time
from collections import defaultdict
from dataclasses import dataclass
from datetime import datetime, timezone
from urllib.parse import urlparse

import requests

from ..errors import FetchError

_USER_AGENT = "gdprscan/0.1 (+privacy-policy corpus builder)"


@dataclass
class FetchResult:
    url: str
    status: int
    body: str
    fetched_at: datetime


class Fetcher:
    """Fetches pages, serializing requests per host to honor a politeness delay.

    Different hosts may be fetched concurrently; calls to the same host
    are spaced at least ``politeness_delay`` seconds apart.
    """

    def __init__(self, politeness_delay: float = 1.0, timeout: float = 30.0,
                 max_redirects: int = 10, session: requests.Session | None = None):
        self.politeness_delay = politeness_delay
        self.timeout = timeout
        self._session = session or requests.Session()
        self._session.max_redirects = max_redirects
        self._host_locks: dict[str, threading.Lock] = defaultdict(threading.Lock)
        self._last_request: dict[str, float] = {}
        self._map_lock = threading.Lock()

    def fetch(self, url: str) -> FetchResult:
        """GET a URL. Raises FetchError for anything other than an HTTP 2xx."""
        parsed = urlparse(url)
        if parsed.scheme not in ("http", "https") or not parsed.netloc:
            raise FetchError(f"not a well-formed http(s) URL: {url!r}")
        host = parsed.netloc

        with self._map_lock:
            lock = self._host_locks[host]
        with lock:
            self._wait_for_host(host)
            try:
                response = self._session.get(
                    url, timeout=self.timeout, headers={"User-Agent": _USER_AGENT}
                )
            except requests.TooManyRedirects as exc:
                raise FetchError(f"redirect loop fetching {url}: {exc}") from exc
            except requests.RequestException as exc:
                raise FetchError(f"network failure fetching {url}: {exc}") from exc
        if not 200 <= response.status_code < 300:
            raise FetchError(
                f"HTTP {response.status_code} fetching {url}", status=response.status_code
            )
        return FetchResult(
            url=url,
            status=response.status_code,
            body=response.text,
            fetched_at=datetime.now(timezone.utc),
        )

    def _wait_for_host(self, host: str) -> None:
        last = self._last_request.get(host)
        if last is not None:
            remaining = self.politeness_delay - (time.monotonic() - last)
            if remaining > 0:
                time.sleep(remaining)
        self._last_request[host] = time.monotonic()
