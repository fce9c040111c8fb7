import http.client
import json
import threading
from types import SimpleNamespace

import pytest

from genutil import build_scheme
from vocab_pipeline.model import SourceRef
from vocab_pipeline.server import ServiceConfig, build_server
from vocab_pipeline.skos import serialize_skos

FIXTURE_ROWS = [
    {"pref": "Optics", "alts": ["Aberration", "Light, Science of"],
     "source": SourceRef(page=9, entry_id="e1")},
    {"pref": "Chemistry", "narrower": ["Alchemy"], "related": ["Optics"]},
    {"pref": "Alchemy"},
    {"pref": "Galvanism", "related": ["Electricity"]},
    {"pref": "Electricity", "alts": ["Electric science"]},
    {"pref": "Chemistry, Organic", "broader": ["Chemistry"]},
    {"pref": "Telegraphy", "related": ["Electricity"]},
    {"pref": "Photography"},
]


def http_request(port: int, method: str, path: str, body: bytes | None = None,
                 headers: dict | None = None):
    """Raw HTTP round trip; returns (status, headers dict, body bytes)."""
    conn = http.client.HTTPConnection("127.0.0.1", port, timeout=10)
    try:
        conn.request(method, path, body=body, headers=headers or {})
        response = conn.getresponse()
        data = response.read()
        return response.status, dict(response.getheaders()), data
    finally:
        conn.close()


def get_json(port: int, path: str, **kwargs):
    status, _, body = http_request(port, "GET", path, **kwargs)
    return status, json.loads(body)


def start_resolver(config: ServiceConfig):
    server = build_server(config)
    thread = threading.Thread(
        target=lambda: server.serve_forever(poll_interval=0.02), daemon=True)
    thread.start()
    return server, server.server_address[1]


@pytest.fixture()
def resolver(tmp_path):
    scheme, diags = build_scheme(FIXTURE_ROWS, scheme_id="lcsh1910",
                                 title="Subject headings (1910)", year=1910)
    assert not diags
    rdf = tmp_path / "lcsh1910.rdf"
    rdf.write_bytes(serialize_skos(scheme))
    config = ServiceConfig(
        listen_address="127.0.0.1:0",
        resolver_host="id.example.org",
        schemes=[str(rdf)],
        default_scheme="lcsh1910",
        max_index_bytes=4096,
    )
    server, port = start_resolver(config)
    by_pref = {c.pref_label: c for c in scheme.concepts.values()}
    yield SimpleNamespace(server=server, port=port, scheme=scheme,
                          by_pref=by_pref, rdf=rdf, config=config)
    server.shutdown()
    server.server_close()
