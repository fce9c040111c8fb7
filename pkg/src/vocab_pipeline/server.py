"""HTTP resolver for ARKs plus search, navigation and indexing endpoints.

The service is read-only: vocabularies are parsed into immutable scheme
snapshots at startup, and a reload swaps in a freshly parsed snapshot without
disturbing in-flight requests. ARK resolution honours hyphen/case
insignificance, "?"/"??" metadata inflections, and the "skos"/"json" format
qualifiers; representation otherwise follows the Accept header.
"""

from __future__ import annotations

import json
import sys
import urllib.parse
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .ark import ArkId, Inflection, InvalidArk, normalize, parse_ark, render
from .indexer import (
    InvalidEncoding,
    RakeParams,
    extract_text,
    match_vocabulary,
    rake_extract,
    result_to_dict,
)
from .model import (
    Concept,
    ConceptScheme,
    LabelKind,
    get_concept,
    normalize_label,
    traverse,
)
from .skos import SKOS_NS, concept_uri, parse_skos, scheme_uri

DEFAULT_N2T_BASE = "https://n2t.net/"
DEFAULT_INDEX_CAP = 1024 * 1024  # request body cap for POST /api/v1/index


class ConfigError(ValueError):
    pass


@dataclass
class ServiceConfig:
    listen_address: str
    resolver_host: str
    schemes: list[str]
    default_scheme: str
    n2t_base: str = DEFAULT_N2T_BASE
    max_index_bytes: int = DEFAULT_INDEX_CAP

    def __post_init__(self):
        if not self.schemes:
            raise ConfigError("at least one scheme file must be configured")
        if ":" not in self.listen_address:
            raise ConfigError("listenAddress must be host:port")

    @property
    def host(self) -> str:
        return self.listen_address.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.listen_address.rsplit(":", 1)[1])


def load_config(path: str) -> ServiceConfig:
    try:
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    try:
        return ServiceConfig(
            listen_address=raw["listenAddress"],
            resolver_host=raw["resolverHost"],
            schemes=list(raw["schemes"]),
            default_scheme=raw["defaultScheme"],
            n2t_base=raw.get("n2tBase", DEFAULT_N2T_BASE),
            max_index_bytes=int(raw.get("maxIndexBytes", DEFAULT_INDEX_CAP)),
        )
    except KeyError as exc:
        raise ConfigError(f"config {path} is missing key {exc}") from exc


@dataclass(frozen=True)
class Snapshot:
    """Immutable view of every loaded scheme; replaced wholesale on reload."""

    schemes: tuple[ConceptScheme, ...]
    by_id: dict[str, ConceptScheme] = field(compare=False)

    def find(self, ark: ArkId) -> tuple[ConceptScheme, Concept] | None:
        for scheme in self.schemes:
            concept = get_concept(scheme, ark)
            if concept is not None:
                return scheme, concept
        return None


def load_snapshot(config: ServiceConfig) -> Snapshot:
    schemes = []
    for path in config.schemes:
        try:
            with open(path, "rb") as f:
                scheme, _ = parse_skos(f.read())
        except OSError as exc:
            raise ConfigError(f"cannot read scheme file {path}: {exc}") from exc
        schemes.append(scheme)
    by_id = {s.scheme_id: s for s in schemes}
    if config.default_scheme not in by_id:
        raise ConfigError(
            f"defaultScheme {config.default_scheme!r} not among loaded schemes "
            f"{sorted(by_id)}")
    return Snapshot(tuple(schemes), by_id)


class ResolverState:
    """Shared state between handler threads: config plus the current snapshot."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.snapshot = load_snapshot(config)
        self.rake_params = RakeParams()

    def reload(self) -> bool:
        """Parse the configured scheme files again and swap the snapshot.

        On any failure the previous snapshot stays in place.
        """
        try:
            self.snapshot = load_snapshot(self.config)
            return True
        except Exception as exc:  # noqa: BLE001 - keep serving the old snapshot
            print(f"reload failed, keeping previous snapshot: {exc}", file=sys.stderr)
            return False


def concept_payload(concept: Concept) -> dict:
    """The wire form of a concept; key set and ordering are part of the contract."""
    return {
        "ark": render(concept.id),
        "scheme": concept.scheme_id,
        "prefLabel": concept.pref_label,
        "altLabels": sorted(concept.alt_labels),
        "broader": sorted(render(a) for a in concept.broader),
        "narrower": sorted(render(a) for a in concept.narrower),
        "related": sorted(render(a) for a in concept.related),
        "source": None if concept.source is None else {
            "page": concept.source.page,
            "entryId": concept.source.entry_id,
        },
    }


def erc_record(concept: Concept, scheme: ConceptScheme, resolver_host: str,
               full: bool = False) -> str:
    """Kernel metadata for inflections: exactly four who/what/when/where lines,
    plus the persistence policy block when the full form is requested."""
    lines = [
        f"who: {scheme.title}",
        f"what: {concept.pref_label}",
        f"when: {scheme.edition_year}",
        f"where: {concept_uri(concept.id, resolver_host)}",
    ]
    if full:
        lines += [
            "",
            "policy: Identifiers in this namespace are assigned once and never reassigned.",
            "policy: Each vocabulary edition is immutable; a term's labels and links do",
            "policy: not change within an edition. New editions receive new identifiers.",
        ]
    return "\n".join(lines) + "\n"


def _turtle_literal(s: str) -> str:
    s = s.replace("\\", "\\\\").replace('"', '\\"')
    s = s.replace("\n", "\\n").replace("\r", "\\r").replace("\t", "\\t")
    return f'"{s}"'


def concept_turtle(concept: Concept, scheme: ConceptScheme, resolver_host: str) -> str:
    """SKOS Turtle for a single concept."""
    subject = f"<{concept_uri(concept.id, resolver_host)}>"
    props = [("a", "skos:Concept"),
             ("skos:prefLabel", _turtle_literal(concept.pref_label))]
    for alt in sorted(concept.alt_labels):
        props.append(("skos:altLabel", _turtle_literal(alt)))
    for rel in ("broader", "narrower", "related"):
        for target in sorted(concept.relation(rel), key=lambda a: (a.name, a.naan)):
            props.append((f"skos:{rel}", f"<{concept_uri(target, resolver_host)}>"))
    props.append(("skos:inScheme", f"<{scheme_uri(scheme.scheme_id, resolver_host)}>"))
    body = " ;\n".join(f"    {p} {o}" for p, o in props)
    return f"@prefix skos: <{SKOS_NS}> .\n\n{subject}\n{body} .\n"


def _html_escape(s: str) -> str:
    return (s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;"))


def concept_html(concept: Concept, scheme: ConceptScheme, config: ServiceConfig) -> str:
    ark = render(concept.id)
    rows = [f"<h1>{_html_escape(concept.pref_label)}</h1>",
            f"<p><code>{_html_escape(ark)}</code> in scheme "
            f"<em>{_html_escape(scheme.title)}</em> ({scheme.edition_year})</p>"]
    if concept.alt_labels:
        alts = ", ".join(_html_escape(a) for a in sorted(concept.alt_labels))
        rows.append(f"<p>Also known as: {alts}</p>")
    for rel in ("broader", "narrower", "related"):
        targets = sorted(concept.relation(rel), key=lambda a: (a.name, a.naan))
        if targets:
            links = ", ".join(
                f'<a href="/{_html_escape(render(t))}">{_html_escape(render(t))}</a>'
                for t in targets)
            rows.append(f"<p>{rel}: {links}</p>")
    n2t = config.n2t_base + ark
    rows.append(f'<p>Alternative resolution: <a href="{_html_escape(n2t)}">'
                f"{_html_escape(n2t)}</a></p>")
    body = "\n".join(rows)
    return ("<!DOCTYPE html>\n<html lang=\"en\"><head><meta charset=\"utf-8\"/>"
            f"<title>{_html_escape(concept.pref_label)}</title></head>\n"
            f"<body>\n{body}\n</body></html>\n")


class ResolverHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "vocab-pipeline"

    @property
    def state(self) -> ResolverState:
        return self.server.state  # type: ignore[attr-defined]

    def log_message(self, format, *args):
        pass  # default per-request logging is noise for a library-embedded server

    # -- plumbing ---------------------------------------------------------

    def _send(self, status: int, content_type: str, body: bytes) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status: int, payload) -> None:
        body = (json.dumps(payload, ensure_ascii=False) + "\n").encode("utf-8")
        self._send(status, "application/json; charset=utf-8", body)

    def _error(self, status: int, message: str) -> None:
        self._send_json(status, {"error": message})

    # -- routing ----------------------------------------------------------

    def do_GET(self):
        if self.path.startswith("/ark:"):
            self._resolve_ark(self.path[1:])
            return
        parts = urllib.parse.urlsplit(self.path)
        if parts.path == "/api/v1/schemes":
            self._schemes()
        elif parts.path == "/api/v1/search":
            self._search(urllib.parse.parse_qs(parts.query))
        elif parts.path.startswith("/api/v1/concepts/"):
            self._related(parts.path)
        else:
            self._error(404, "not found")

    def do_POST(self):
        parts = urllib.parse.urlsplit(self.path)
        if parts.path == "/api/v1/index":
            self._index()
        else:
            self._error(404, "not found")

    # -- ARK resolution ---------------------------------------------------

    def _resolve_ark(self, raw: str) -> None:
        inflection = Inflection.NONE
        if raw.endswith("??"):
            inflection, raw = Inflection.FULL, raw[:-2]
        elif raw.endswith("?"):
            inflection, raw = Inflection.BRIEF, raw[:-1]
        try:
            ark = normalize(parse_ark(urllib.parse.unquote(raw)))
        except InvalidArk as exc:
            self._error(400, f"invalid ARK: {exc}")
            return
        if inflection is Inflection.NONE:
            inflection = ark.inflection

        found = self.state.snapshot.find(ark)
        if found is None:
            self._error(404, "not found")
            return
        scheme, concept = found
        host = self.state.config.resolver_host

        if inflection is not Inflection.NONE:
            text = erc_record(concept, scheme, host, full=inflection is Inflection.FULL)
            self._send(200, "text/plain; charset=utf-8", text.encode("utf-8"))
            return

        representation = self._pick_representation(ark.qualifier)
        if representation is None:
            self._error(404, f"unknown qualifier {ark.qualifier!r}")
            return
        if representation == "turtle":
            body = concept_turtle(concept, scheme, host).encode("utf-8")
            self._send(200, "text/turtle; charset=utf-8", body)
        elif representation == "html":
            body = concept_html(concept, scheme, self.state.config).encode("utf-8")
            self._send(200, "text/html; charset=utf-8", body)
        else:
            self._send_json(200, concept_payload(concept))

    def _pick_representation(self, qualifier: str | None) -> str | None:
        """Format qualifier wins over content negotiation; unknown -> None."""
        if qualifier == "skos":
            return "turtle"
        if qualifier == "json":
            return "json"
        if qualifier is not None:
            return None
        accept = self.headers.get("Accept", "")
        for part in accept.split(","):
            media = part.split(";", 1)[0].strip().lower()
            if media == "application/json":
                return "json"
            if media == "text/turtle":
                return "turtle"
            if media == "text/html":
                return "html"
        return "json"

    # -- API endpoints ------------------------------------------------------

    def _schemes(self) -> None:
        payload = [
            {
                "schemeId": s.scheme_id,
                "title": s.title,
                "editionYear": s.edition_year,
                "conceptCount": len(s.concepts),
            }
            for s in self.state.snapshot.schemes
        ]
        self._send_json(200, payload)

    def _selected_schemes(self, query) -> list[ConceptScheme] | None:
        wanted = query.get("scheme", [None])[0]
        if wanted is None:
            return list(self.state.snapshot.schemes)
        scheme = self.state.snapshot.by_id.get(wanted)
        if scheme is None:
            return None
        return [scheme]

    def _search(self, query) -> None:
        q = query.get("q", [""])[0]
        needle = normalize_label(q)
        if not needle:
            self._error(400, "query parameter q must be non-empty")
            return
        try:
            limit = int(query.get("limit", ["20"])[0])
        except ValueError:
            self._error(400, "limit must be an integer")
            return
        schemes = self._selected_schemes(query)
        if schemes is None:
            self._error(400, f"unknown scheme {query.get('scheme')[0]!r}")
            return

        hits = {}
        for scheme in schemes:
            for key, entries in scheme.label_index.items():
                if needle not in key:
                    continue
                for entry in entries:
                    rank = (0 if entry.kind is LabelKind.PREF else 1, key,
                            entry.ark.name, entry.ark.naan)
                    current = hits.get((scheme.scheme_id, entry.ark))
                    if current is None or rank < current[0]:
                        hits[(scheme.scheme_id, entry.ark)] = (rank, scheme, entry)
        ranked = sorted(hits.values(), key=lambda item: item[0])[:max(limit, 0)]
        payload = []
        for rank, scheme, entry in ranked:
            item = concept_payload(scheme.concepts[entry.ark])
            item["labelKind"] = entry.kind.value
            item["matchedLabel"] = entry.label
            payload.append(item)
        self._send_json(200, payload)

    def _related(self, path: str) -> None:
        tail = path[len("/api/v1/concepts/"):]
        pieces = tail.split("/")
        if len(pieces) != 3:
            self._error(404, "not found")
            return
        naan, name, relation = pieces
        if relation not in ("broader", "narrower", "related"):
            self._error(400, f"unknown relation {relation!r}")
            return
        try:
            ark = normalize(parse_ark(f"ark:/{naan}/{urllib.parse.unquote(name)}"))
        except InvalidArk as exc:
            self._error(400, f"invalid ARK: {exc}")
            return
        found = self.state.snapshot.find(ark)
        if found is None:
            self._error(404, "not found")
            return
        scheme, concept = found
        payload = []
        for target in traverse(scheme, concept.id, relation, depth=1):
            neighbour = scheme.concepts.get(target)
            if neighbour is not None:
                payload.append(concept_payload(neighbour))
        self._send_json(200, payload)

    def _index(self) -> None:
        length = int(self.headers.get("Content-Length", 0) or 0)
        if length > self.state.config.max_index_bytes:
            self._error(413, "request body exceeds the size cap")
            return
        body = self.rfile.read(length)
        try:
            request = json.loads(body)
        except (UnicodeDecodeError, json.JSONDecodeError):
            self._error(400, "request body must be a JSON object")
            return
        if not isinstance(request, dict):
            self._error(400, "request body must be a JSON object")
            return
        text = request.get("text", "")
        if not isinstance(text, str) or not text.strip():
            self._error(400, "text must be a non-empty string")
            return
        format = request.get("format", "txt")
        if format not in ("txt", "html"):
            self._error(400, f"unknown format {format!r}")
            return
        scheme_id = request.get("scheme", self.state.config.default_scheme)
        scheme = self.state.snapshot.by_id.get(scheme_id)
        if scheme is None:
            self._error(400, f"unknown scheme {scheme_id!r}")
            return
        max_terms = request.get("maxTerms", 25)
        if not isinstance(max_terms, int) or max_terms < 0:
            self._error(400, "maxTerms must be a non-negative integer")
            return
        uninvert = bool(request.get("uninvert", False))

        try:
            plain = extract_text(text, format)
        except InvalidEncoding as exc:
            self._error(400, str(exc))
            return
        phrases = rake_extract(plain, self.state.rake_params)
        results = match_vocabulary(phrases, scheme, uninvert=uninvert)[:max_terms]
        self._send_json(200, [result_to_dict(r) for r in results])


class ResolverServer(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, config: ServiceConfig):
        self.state = ResolverState(config)
        super().__init__((config.host, config.port), ResolverHandler)

    def reload(self) -> bool:
        return self.state.reload()


def build_server(config: ServiceConfig) -> ResolverServer:
    """Validate the config by loading every scheme, then bind the listener."""
    return ResolverServer(config)
