"""SKOS RDF/XML serialization and parsing with a lossless round trip.

The on-disk format is a fixed RDF/XML profile (see docs/skos-format.md):
one skos:ConceptScheme node carrying the scheme metadata, then one
skos:Concept element per concept with prefLabel/altLabel literals and
broader/narrower/related resource links. Serialization is byte-stable:
concepts in ascending ARK-name order, properties in a fixed order, labels
sorted. Parsing tolerates unknown properties (warning) and completes
half-asserted inverse links (warning).
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from xml.sax.saxutils import escape, quoteattr

from .ark import ArkId, InvalidArk, normalize, parse_ark, render
from .model import (
    ConceptScheme,
    Diagnostic,
    DiagnosticCode,
    InvalidScheme,
    MalformedXml,
    SchemeBuilder,
    Severity,
    SourceRef,
    check_scheme,
)

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
SKOS_NS = "http://www.w3.org/2004/02/skos/core#"
DCT_NS = "http://purl.org/dc/terms/"
VP_NS = "https://vocab-pipeline.example/ns#"

DEFAULT_RESOLVER_HOST = "id.example.org"

# survives XML line-end normalization (see quoteattr for attributes)
_TEXT_ENTITIES = {"\r": "&#13;"}


def concept_uri(ark: ArkId, resolver_host: str) -> str:
    return f"https://{resolver_host}/{render(ark)}"


def scheme_uri(scheme_id: str, resolver_host: str) -> str:
    return f"https://{resolver_host}/scheme/{scheme_id}"


def serialize_skos(scheme: ConceptScheme, resolver_host: str = DEFAULT_RESOLVER_HOST) -> bytes:
    """Render a scheme as RDF/XML; byte-identical for the same scheme and host."""
    problems = check_scheme(scheme)
    if problems:
        raise InvalidScheme("; ".join(problems))

    def text(s: str) -> str:
        return escape(s, _TEXT_ENTITIES)

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<rdf:RDF xmlns:rdf={quoteattr(RDF_NS)} xmlns:skos={quoteattr(SKOS_NS)}'
        f' xmlns:dct={quoteattr(DCT_NS)} xmlns:vp={quoteattr(VP_NS)}>',
        f'  <skos:ConceptScheme rdf:about={quoteattr(scheme_uri(scheme.scheme_id, resolver_host))}'
        f' vp:schemeId={quoteattr(scheme.scheme_id)}'
        f' vp:editionYear={quoteattr(str(scheme.edition_year))}'
        f' vp:naan={quoteattr(scheme.naan)}>',
        f'    <dct:title>{text(scheme.title)}</dct:title>',
        '  </skos:ConceptScheme>',
    ]
    in_scheme = quoteattr(scheme_uri(scheme.scheme_id, resolver_host))
    for ark in sorted(scheme.concepts, key=lambda a: (a.name, a.naan)):
        concept = scheme.concepts[ark]
        attrs = [f'rdf:about={quoteattr(concept_uri(ark, resolver_host))}']
        if concept.source is not None:
            if concept.source.page is not None:
                attrs.append(f'vp:sourcePage={quoteattr(str(concept.source.page))}')
            if concept.source.entry_id is not None:
                attrs.append(f'vp:sourceEntry={quoteattr(concept.source.entry_id)}')
        lines.append(f'  <skos:Concept {" ".join(attrs)}>')
        lines.append(f'    <skos:prefLabel>{text(concept.pref_label)}</skos:prefLabel>')
        for alt in sorted(concept.alt_labels):
            lines.append(f'    <skos:altLabel>{text(alt)}</skos:altLabel>')
        for rel in ("broader", "narrower", "related"):
            for target in sorted(concept.relation(rel), key=lambda a: (a.name, a.naan)):
                uri = quoteattr(concept_uri(target, resolver_host))
                lines.append(f'    <skos:{rel} rdf:resource={uri}/>')
        lines.append(f'    <skos:inScheme rdf:resource={in_scheme}/>')
        lines.append('  </skos:Concept>')
    lines.append('</rdf:RDF>')
    lines.append('')
    return "\n".join(lines).encode("utf-8")


def _local(tag) -> str:
    if not isinstance(tag, str):
        return ""
    return tag.rpartition("}")[2]


def _attr(node, name: str) -> str | None:
    for key, value in node.attrib.items():
        if _local(key) == name:
            return value
    return None


def parse_skos(document: bytes | str) -> tuple[ConceptScheme, list[Diagnostic]]:
    """Reconstruct a scheme from RDF/XML produced by serialize_skos.

    Unknown properties are ignored with warnings; a concept without a
    prefLabel is dropped with an error diagnostic; one-directional
    broader/narrower assertions are completed with a warning.
    """
    if isinstance(document, str):
        document = document.encode("utf-8")
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        line, column = exc.position
        raise MalformedXml(f"not well-formed XML: {exc}", line=line, column=column) from exc

    scheme_node = None
    concept_nodes = []
    for node in root:
        name = _local(node.tag)
        if name == "ConceptScheme" and scheme_node is None:
            scheme_node = node
        elif name == "Concept":
            concept_nodes.append(node)
    if scheme_node is None:
        raise MalformedXml("no skos:ConceptScheme element found")

    scheme_id = _attr(scheme_node, "schemeId") or "scheme"
    naan = _attr(scheme_node, "naan") or ""
    year_raw = _attr(scheme_node, "editionYear") or ""
    bad_year = None
    try:
        edition_year = int(year_raw)
    except ValueError:
        bad_year = year_raw
        edition_year = 0
    title = scheme_id
    for child in scheme_node:
        if _local(child.tag) == "title":
            title = (child.text or "").strip() or scheme_id

    builder = SchemeBuilder(scheme_id, title, edition_year, naan)
    if bad_year is not None:
        builder.diag(DiagnosticCode.UNKNOWN_ELEMENT, Severity.WARNING,
                     f"unreadable editionYear {bad_year!r}; using 0")

    for node in concept_nodes:
        _read_concept(node, builder)

    return builder.build(warn_on_completed_inverse=True)


def _parse_concept_ref(raw: str) -> ArkId:
    return normalize(parse_ark(raw)).base()


def _read_concept(node, builder: SchemeBuilder) -> None:
    about = _attr(node, "about")
    if not about:
        builder.diag(DiagnosticCode.INVALID_ID, Severity.ERROR,
                     "skos:Concept without rdf:about dropped")
        return
    try:
        ark = _parse_concept_ref(about)
    except InvalidArk as exc:
        builder.diag(DiagnosticCode.INVALID_ID, Severity.ERROR,
                     f"skos:Concept with unparseable id {about!r} dropped ({exc})")
        return

    pref_labels: list[str] = []
    alt_labels: list[str] = []
    links: list[tuple[str, ArkId]] = []
    for child in node:
        name = _local(child.tag)
        if name == "prefLabel":
            pref_labels.append(child.text or "")
        elif name == "altLabel":
            alt_labels.append(child.text or "")
        elif name in ("broader", "narrower", "related"):
            resource = _attr(child, "resource")
            if resource is None:
                builder.diag(DiagnosticCode.INVALID_ID, Severity.WARNING,
                             f"skos:{name} without rdf:resource on {ark} ignored")
                continue
            try:
                links.append((name, _parse_concept_ref(resource)))
            except InvalidArk as exc:
                builder.diag(DiagnosticCode.INVALID_ID, Severity.WARNING,
                             f"skos:{name} target {resource!r} on {ark} ignored ({exc})")
        elif name == "inScheme":
            pass  # scheme identity comes from the ConceptScheme node
        else:
            builder.diag(DiagnosticCode.UNKNOWN_ELEMENT, Severity.WARNING,
                         f"unknown property <{name}> on {ark} ignored")

    if not pref_labels:
        builder.diag(DiagnosticCode.MISSING_PREF_LABEL, Severity.ERROR,
                     f"concept {ark} has no skos:prefLabel; dropped")
        return
    if len(pref_labels) > 1:
        builder.diag(DiagnosticCode.MULTIPLE_PREF_LABELS, Severity.WARNING,
                     f"concept {ark} has {len(pref_labels)} prefLabels; first kept")

    page_raw = _attr(node, "sourcePage")
    entry_raw = _attr(node, "sourceEntry")
    page = int(page_raw) if page_raw is not None and page_raw.isdigit() else None
    source = None
    if page is not None or entry_raw is not None:
        source = SourceRef(page=page, entry_id=entry_raw)

    added = builder.add_concept(ark, pref_labels[0], source=source)
    if added is None:
        return
    for alt in alt_labels:
        builder.add_alt_label(added, alt)
    for relation, target in links:
        builder.link_oneway(added, relation, target)
