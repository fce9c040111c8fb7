import random
import re

import pytest
from hypothesis import given, settings, strategies as st

from genutil import build_scheme, random_scheme
from vocab_pipeline.ark import ArkId
from vocab_pipeline.model import (
    Concept,
    ConceptScheme,
    DiagnosticCode,
    InvalidScheme,
    MalformedXml,
    Severity,
    SourceRef,
)
from vocab_pipeline.skos import parse_skos, serialize_skos


def rdf_doc(concepts_xml: str, scheme_attrs: str = "") -> str:
    return f"""<?xml version="1.0" encoding="UTF-8"?>
<rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#"
         xmlns:skos="http://www.w3.org/2004/02/skos/core#"
         xmlns:dct="http://purl.org/dc/terms/"
         xmlns:vp="https://vocab-pipeline.example/ns#">
  <skos:ConceptScheme rdf:about="https://h.example/scheme/s1"
      vp:schemeId="s1" vp:editionYear="1910" vp:naan="99152" {scheme_attrs}>
    <dct:title>Sample</dct:title>
  </skos:ConceptScheme>
{concepts_xml}
</rdf:RDF>"""


A1 = "https://h.example/ark:/99152/b4000";  A2 = "https://h.example/ark:/99152/b4111"


def test_serialize_single_concept_element():
    scheme, _ = build_scheme([{"pref": "Optics"}])
    xml = serialize_skos(scheme).decode("utf-8")
    assert xml.count("<skos:Concept ") == 1
    assert xml.count("<skos:prefLabel>") == 1
    assert "<skos:prefLabel>Optics</skos:prefLabel>" in xml


def test_serialize_alt_label_element():
    scheme, _ = build_scheme([{"pref": "Optics", "alts": ["Aberration"]}])
    xml = serialize_skos(scheme).decode("utf-8")
    assert "<skos:altLabel>Aberration</skos:altLabel>" in xml


def test_serialize_is_byte_deterministic():
    scheme, _ = build_scheme([
        {"pref": "Optics", "alts": ["Aberration", "Rays"]},
        {"pref": "Chemistry", "related": ["Optics"]},
    ])
    assert serialize_skos(scheme) == serialize_skos(scheme)


def test_serialize_orders_concepts_by_ark_name():
    scheme, _ = build_scheme([{"pref": "Zebras"}, {"pref": "Apples"}])
    xml = serialize_skos(scheme).decode("utf-8")
    uris = re.findall(r'<skos:Concept rdf:about="([^"]+)"', xml)
    assert uris == sorted(uris)


def test_serialize_rejects_inconsistent_scheme():
    ark = ArkId("99152", "b4000")
    other = ArkId("99152", "b4111")
    concepts = {
        ark: Concept(id=ark, pref_label="A", broader={other}, scheme_id="s"),
        other: Concept(id=other, pref_label="B", scheme_id="s"),  # missing inverse
    }
    scheme = ConceptScheme("s", "S", 1910, "99152", concepts)
    with pytest.raises(InvalidScheme):
        serialize_skos(scheme)


def test_round_trip_simple_fixture():
    scheme, _ = build_scheme([
        {"pref": "Optics", "alts": ["Aberration"], "source": SourceRef(page=9, entry_id="e1")},
        {"pref": "Chemistry", "related": ["Optics"]},
        {"pref": "Alchemy", "broader": ["Chemistry"]},
    ])
    parsed, diags = parse_skos(serialize_skos(scheme))
    assert parsed == scheme
    assert diags == []


def test_round_trip_200_random_schemes_and_determinism():
    rng = random.Random(20260811)
    for _ in range(40):
        scheme = random_scheme(rng)
        blob = serialize_skos(scheme)
        assert blob == serialize_skos(scheme)
        parsed, _ = parse_skos(blob)
        assert parsed == scheme


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_round_trip_property(seed):
    scheme = random_scheme(random.Random(seed), max_concepts=12)
    parsed, _ = parse_skos(serialize_skos(scheme))
    assert parsed == scheme


def test_round_trip_is_host_independent():
    scheme, _ = build_scheme([
        {"pref": "Optics"},
        {"pref": "Chemistry", "related": ["Optics"]},
    ])
    from_a, _ = parse_skos(serialize_skos(scheme, resolver_host="a.example"))
    from_b, _ = parse_skos(serialize_skos(scheme, resolver_host="b.example:8080"))
    assert from_a == from_b == scheme


def test_parse_completes_missing_inverse_with_warning():
    doc = rdf_doc(f"""
  <skos:Concept rdf:about="{A1}">
    <skos:prefLabel>Alchemy</skos:prefLabel>
    <skos:broader rdf:resource="{A2}"/>
  </skos:Concept>
  <skos:Concept rdf:about="{A2}">
    <skos:prefLabel>Chemistry</skos:prefLabel>
  </skos:Concept>""")
    scheme, diags = parse_skos(doc)
    alchemy = scheme.concepts[ArkId("99152", "b4000")]
    chemistry = scheme.concepts[ArkId("99152", "b4111")]
    assert alchemy.broader == {chemistry.id}
    assert chemistry.narrower == {alchemy.id}
    assert any(d.code is DiagnosticCode.MISSING_INVERSE for d in diags)


def test_parse_keeps_first_of_multiple_pref_labels():
    doc = rdf_doc(f"""
  <skos:Concept rdf:about="{A1}">
    <skos:prefLabel>Optics</skos:prefLabel>
    <skos:prefLabel>Photics</skos:prefLabel>
  </skos:Concept>""")
    scheme, diags = parse_skos(doc)
    concept = scheme.concepts[ArkId("99152", "b4000")]
    assert concept.pref_label == "Optics"
    assert any(d.code is DiagnosticCode.MULTIPLE_PREF_LABELS and
               d.severity is Severity.WARNING for d in diags)


def test_parse_drops_concept_without_pref_label():
    doc = rdf_doc(f"""
  <skos:Concept rdf:about="{A1}">
    <skos:altLabel>Nameless</skos:altLabel>
  </skos:Concept>""")
    scheme, diags = parse_skos(doc)
    assert scheme.concepts == {}
    assert any(d.code is DiagnosticCode.MISSING_PREF_LABEL and
               d.severity is Severity.ERROR for d in diags)


def test_parse_warns_on_unknown_property():
    doc = rdf_doc(f"""
  <skos:Concept rdf:about="{A1}">
    <skos:prefLabel>Optics</skos:prefLabel>
    <skos:scopeNote>not ours</skos:scopeNote>
  </skos:Concept>""")
    scheme, diags = parse_skos(doc)
    assert len(scheme.concepts) == 1
    assert any(d.code is DiagnosticCode.UNKNOWN_ELEMENT for d in diags)


def test_parse_reads_scheme_metadata():
    scheme, _ = parse_skos(rdf_doc(""))
    assert scheme.scheme_id == "s1"
    assert scheme.title == "Sample"
    assert scheme.edition_year == 1910
    assert scheme.naan == "99152"


def test_parse_malformed_xml():
    with pytest.raises(MalformedXml):
        parse_skos(b"<rdf:RDF")


def test_parse_requires_concept_scheme_node():
    with pytest.raises(MalformedXml):
        parse_skos(b"<x/>")


def test_parse_dangling_relation_target_warns_and_is_kept():
    doc = rdf_doc(f"""
  <skos:Concept rdf:about="{A1}">
    <skos:prefLabel>Optics</skos:prefLabel>
    <skos:related rdf:resource="https://h.example/ark:/99152/b4zzz"/>
  </skos:Concept>""")
    scheme, diags = parse_skos(doc)
    concept = scheme.concepts[ArkId("99152", "b4000")]
    assert concept.related == {ArkId("99152", "b4zzz")}
    assert any(d.code is DiagnosticCode.DANGLING_REF for d in diags)


def test_source_attributes_round_trip():
    scheme, _ = build_scheme([
        {"pref": "Optics", "source": SourceRef(page=12, entry_id="e7")},
        {"pref": "Rays", "source": SourceRef(entry_id="e8")},
    ])
    parsed, _ = parse_skos(serialize_skos(scheme))
    by_pref = {c.pref_label: c for c in parsed.concepts.values()}
    assert by_pref["Optics"].source == SourceRef(page=12, entry_id="e7")
    assert by_pref["Rays"].source == SourceRef(entry_id="e8")


def test_labels_with_xml_metacharacters_round_trip():
    scheme, _ = build_scheme([
        {"pref": 'Q&A <"quoted"> étude', "alts": ["it's & that's", "a<b>c"]},
    ])
    parsed, _ = parse_skos(serialize_skos(scheme))
    assert parsed == scheme
