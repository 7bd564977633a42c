from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest

from trueorigin.classifier import OracleClassifier
from trueorigin.gazetteer import build_index, load_gazetteer
from trueorigin.lem import GazetteerExtractor
from trueorigin.locvec import default_country_dict
from trueorigin.pipeline import PipelineDeps, read_corpus

FIXTURES = Path(__file__).parent / "fixtures"
GAZETTEER = FIXTURES / "gazetteer.jsonl"
TWEETS50 = FIXTURES / "tweets50.jsonl"
LEM20 = FIXTURES / "lem20.jsonl"
LEM20_NER = FIXTURES / "lem20_ner.jsonl"


def fixture_records(path):
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


@pytest.fixture(scope="session")
def entries():
    return load_gazetteer(GAZETTEER)


@pytest.fixture(scope="session")
def index(entries):
    return build_index(entries)


@pytest.fixture(scope="session")
def countries():
    return default_country_dict()


@pytest.fixture(scope="session")
def corpus50():
    return list(read_corpus(TWEETS50))


@pytest.fixture(scope="session")
def records50():
    return fixture_records(TWEETS50)


@pytest.fixture
def oracle_deps(index, countries):
    return PipelineDeps(index, GazetteerExtractor(index), OracleClassifier.from_jsonl(TWEETS50),
                        countries)


class StubServer:
    """JSON-over-HTTP stub: ``handler(path, payload) -> (status, body)``."""

    def __init__(self, handler):
        self.requests = []
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                payload = json.loads(self.rfile.read(length) or b"null")
                stub.requests.append((self.path, payload))
                status, body = handler(self.path, payload)
                data = body if isinstance(body, bytes) else json.dumps(body).encode()
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def log_message(self, *args):
                pass

        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.url = f"http://127.0.0.1:{self.httpd.server_address[1]}"
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)

    def __enter__(self):
        self.thread.start()
        return self

    def __exit__(self, *exc):
        self.httpd.shutdown()
        self.httpd.server_close()


@pytest.fixture
def stub_server():
    return StubServer


class CountingGeocoder:
    """Wraps an index and records every vector-lookup query."""

    def __init__(self, inner):
        self.inner = inner
        self.queries = []

    def search(self, query, limit=10):
        self.queries.append(query)
        return self.inner.search(query, limit)


class CountingClassifier:
    """Wraps a classifier and records the ids of the tweets it saw."""

    name = "counting"

    def __init__(self, inner):
        self.inner = inner
        self.seen = []

    def classify_many(self, tweets):
        self.seen.extend(t.tweet_id for t in tweets)
        return self.inner.classify_many(tweets)
