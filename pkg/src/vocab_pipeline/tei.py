"""TEI-subset parsing of printed vocabulary entries, and compilation to a scheme.

The input convention is a small fixed slice of TEI: <entry> elements holding a
<form><term> headword and repeatable <xr type="..."><term> cross-references,
with <pb n="..."/> page breaks. Element names are matched by local name, so
namespaced and namespace-free documents both work; anything richer than the
subset is ignored with a warning rather than rejected.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from enum import Enum

from . import ark as arkmod
from .model import (
    ConceptScheme,
    Diagnostic,
    DiagnosticCode,
    MalformedXml,
    SchemeBuilder,
    Severity,
    SourceRef,
    normalize_label,
)

_XML_ID = "{http://www.w3.org/XML/1998/namespace}id"


class RefKind(Enum):
    SEE = "see"
    SEE_ALSO = "seeAlso"
    SEE_FROM = "seeFrom"
    SEE_ALSO_FROM = "seeAlsoFrom"


@dataclass(frozen=True)
class CrossRef:
    kind: RefKind
    target: str


@dataclass
class VocabEntry:
    entry_id: str
    headword: str
    refs: list[CrossRef] = field(default_factory=list)
    page: int | None = None


def _local(tag) -> str:
    if not isinstance(tag, str):  # comments / processing instructions
        return ""
    return tag.rpartition("}")[2]


def _term_text(element) -> str:
    return " ".join("".join(element.itertext()).split())


def parse_tei(document: bytes | str) -> tuple[list[VocabEntry], list[Diagnostic]]:
    """Extract vocabulary entries from a TEI document, in document order.

    Raises MalformedXml for unparseable input; every lesser irregularity
    becomes a Diagnostic.
    """
    if isinstance(document, str):
        document = document.encode("utf-8")
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        line, column = exc.position
        raise MalformedXml(f"not well-formed XML: {exc.msg if hasattr(exc, 'msg') else exc}",
                           line=line, column=column) from exc

    entries: list[VocabEntry] = []
    diagnostics: list[Diagnostic] = []
    page: int | None = None
    counter = 0

    for node in root.iter():
        name = _local(node.tag)
        if name == "pb":
            n = node.get("n", "")
            page = int(n) if n.isdigit() else page
        elif name == "entry":
            counter += 1
            entry_id = node.get(_XML_ID) or node.get("id") or f"entry-{counter}"
            entry = _read_entry(node, entry_id, page, diagnostics)
            if entry is not None:
                entries.append(entry)
    return entries, diagnostics


def _read_entry(node, entry_id: str, page: int | None,
                diagnostics: list[Diagnostic]) -> VocabEntry | None:
    headword = ""
    refs: list[CrossRef] = []
    for child in node:
        name = _local(child.tag)
        if name == "form":
            headword = _term_text(child)
        elif name == "xr":
            kind_attr = child.get("type", "")
            try:
                kind = RefKind(kind_attr)
            except ValueError:
                diagnostics.append(Diagnostic(
                    DiagnosticCode.UNKNOWN_ELEMENT, Severity.WARNING,
                    f"cross-reference with unknown type {kind_attr!r} ignored", entry_id))
                continue
            target = _term_text(child)
            if not target:
                diagnostics.append(Diagnostic(
                    DiagnosticCode.EMPTY_LABEL, Severity.WARNING,
                    f"{kind.value} reference with empty target ignored", entry_id))
                continue
            refs.append(CrossRef(kind, target))
        elif name == "pb":
            pass  # handled by the document-order walk in parse_tei
        else:
            diagnostics.append(Diagnostic(
                DiagnosticCode.UNKNOWN_ELEMENT, Severity.WARNING,
                f"element <{name}> inside entry ignored", entry_id))
    if not headword:
        diagnostics.append(Diagnostic(
            DiagnosticCode.EMPTY_LABEL, Severity.ERROR,
            "entry has no headword; dropped", entry_id))
        return None
    return VocabEntry(entry_id=entry_id, headword=headword, refs=refs, page=page)


class HierarchyMode(Enum):
    RELATED = "related"
    HIERARCHICAL = "hierarchical"


def compile_scheme(
    entries: list[VocabEntry],
    scheme_id: str,
    edition_year: int,
    naan: str,
    hierarchy_mode: HierarchyMode = HierarchyMode.RELATED,
    title: str | None = None,
) -> tuple[ConceptScheme, list[Diagnostic]]:
    """Apply the printed-vocabulary conversion rules and build a scheme.

    Pass 1 creates an authorized concept (with a freshly minted ARK) for every
    entry that carries no `see` reference. Pass 2 resolves cross-references:

    * see B        -> the headword becomes an altLabel of B
    * seeFrom A    -> A becomes an altLabel of the entry's concept
    * seeAlso X    -> related link, or narrower(X) in hierarchical mode
    * seeAlsoFrom X-> related link, or broader(X) in hierarchical mode

    Reference targets without a concept of their own get a stub concept and a
    DANGLING_REF warning, so no cross-reference is lost. The whole procedure
    is deterministic: identical input yields an identical scheme, minted ARKs
    included.
    """
    builder = SchemeBuilder(scheme_id, title if title is not None else scheme_id,
                            edition_year, naan)
    minter = arkmod.MinterState(naan=naan)

    def mint_next() -> arkmod.ArkId:
        nonlocal minter
        minted, minter = arkmod.mint(minter)
        return minted

    # pass 1: authorized concepts, in entry order
    by_entry: dict[str, arkmod.ArkId] = {}
    for entry in entries:
        if any(r.kind is RefKind.SEE for r in entry.refs):
            continue
        source = SourceRef(page=entry.page, entry_id=entry.entry_id)
        ark = builder.add_concept(mint_next(), entry.headword, source=source,
                                  entry_id=entry.entry_id)
        if ark is not None:
            by_entry[entry.entry_id] = ark

    def resolve_target(target: str, entry_id: str) -> arkmod.ArkId | None:
        if not target.strip():
            builder.diag(DiagnosticCode.EMPTY_LABEL, Severity.WARNING,
                         "reference with blank target ignored", entry_id)
            return None
        found = builder.find_pref(target)
        if found is not None:
            return found
        stub = builder.add_concept(mint_next(), target.strip(), entry_id=entry_id)
        builder.diag(DiagnosticCode.DANGLING_REF, Severity.WARNING,
                     f"no entry for referenced term {target.strip()!r}; stub created",
                     entry_id)
        return stub

    # pass 2: cross-references, in entry order
    for entry in entries:
        own = by_entry.get(entry.entry_id)
        if own is None:
            # non-authorized entry: its headword redirects to every see target
            for ref in entry.refs:
                if ref.kind is not RefKind.SEE:
                    builder.diag(DiagnosticCode.IGNORED_REF, Severity.WARNING,
                                 f"{ref.kind.value} reference on the non-authorized "
                                 f"entry {entry.headword!r} ignored", entry.entry_id)
                    continue
                if normalize_label(ref.target) == normalize_label(entry.headword):
                    builder.diag(DiagnosticCode.SELF_REFERENCE, Severity.WARNING,
                                 f"{entry.headword!r} refers to itself", entry.entry_id)
                    continue
                target = resolve_target(ref.target, entry.entry_id)
                if target is not None:
                    builder.add_alt_label(target, entry.headword, entry.entry_id)
            continue
        for ref in entry.refs:
            if ref.kind is RefKind.SEE_FROM:
                builder.add_alt_label(own, ref.target, entry.entry_id)
                continue
            target = resolve_target(ref.target, entry.entry_id)
            if target is None:
                continue
            if ref.kind is RefKind.SEE_ALSO:
                relation = ("related" if hierarchy_mode is HierarchyMode.RELATED
                            else "narrower")
            else:  # SEE_ALSO_FROM
                relation = ("related" if hierarchy_mode is HierarchyMode.RELATED
                            else "broader")
            builder.link(own, relation, target, entry.entry_id)

    return builder.build()
