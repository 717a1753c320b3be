"""Fetcher behavior: body round-trip, error statuses, politeness spacing."""

import http.server
import threading
import time
from types import SimpleNamespace

import pytest
import requests

from gdprscan.corpus import Fetcher
from gdprscan.errors import FetchError

FIXTURE_BODY = "<html><body><p>We collect data.</p></body></html>"


class _FixtureHandler(http.server.BaseHTTPRequestHandler):
    def do_GET(self):
        body = FIXTURE_BODY.encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "text/html; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture()
def local_server():
    server = http.server.HTTPServer(("127.0.0.1", 0), _FixtureHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield "http://127.0.0.1:%d/" % server.server_address[1]
    server.shutdown()
    thread.join(timeout=5)


def test_fetch_returns_fixture_body(local_server):
    fetcher = Fetcher(politeness_delay=0.0)
    result = fetcher.fetch(local_server + "privacy")
    assert result.status == 200
    assert result.body == FIXTURE_BODY
    assert result.url == local_server + "privacy"
    assert result.fetched_at.tzinfo is not None


class _FakeSession:
    """Stands in for requests.Session; records call times."""

    def __init__(self, status=200, text="ok", exc=None):
        self.status = status
        self.text = text
        self.exc = exc
        self.calls = []
        self.max_redirects = None

    def get(self, url, timeout=None, headers=None):
        self.calls.append((url, time.monotonic()))
        if self.exc is not None:
            raise self.exc
        return SimpleNamespace(status_code=self.status, text=self.text)


def test_http_404_raises_with_status():
    fetcher = Fetcher(politeness_delay=0.0, session=_FakeSession(status=404))
    with pytest.raises(FetchError) as err:
        fetcher.fetch("http://host.test/missing")
    assert err.value.status == 404


def test_network_failure_wrapped():
    session = _FakeSession(exc=requests.ConnectionError("refused"))
    fetcher = Fetcher(politeness_delay=0.0, session=session)
    with pytest.raises(FetchError):
        fetcher.fetch("http://host.test/")


def test_redirect_loop_wrapped():
    session = _FakeSession(exc=requests.TooManyRedirects("loop"))
    fetcher = Fetcher(politeness_delay=0.0, session=session)
    with pytest.raises(FetchError):
        fetcher.fetch("http://host.test/")


def test_malformed_url_rejected():
    fetcher = Fetcher(politeness_delay=0.0, session=_FakeSession())
    with pytest.raises(FetchError):
        fetcher.fetch("ftp://host.test/file")
    with pytest.raises(FetchError):
        fetcher.fetch("not a url")


def test_same_host_requests_are_spaced():
    session = _FakeSession()
    fetcher = Fetcher(politeness_delay=0.25, session=session)
    fetcher.fetch("http://host.test/a")
    fetcher.fetch("http://host.test/b")
    (_, t1), (_, t2) = session.calls
    assert t2 - t1 >= 0.24

def test_different_hosts_not_delayed():
    session = _FakeSession()
    fetcher = Fetcher(politeness_delay=5.0, session=session)
    start = time.monotonic()
    fetcher.fetch("http://alpha.test/")
    fetcher.fetch("http://beta.test/")
    assert time.monotonic() - start < 2.0
