"""In-memory SKOS-style concept graph with label and identifier lookup.

A ConceptScheme is immutable once built: construct one through SchemeBuilder,
which enforces the structural invariants (unique authorized labels, no
self-links, broader/narrower kept as exact inverses) and reports anything
irregular as Diagnostics instead of failing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .ark import ArkId, normalize

RELATIONS = ("broader", "narrower", "related")

_INVERSE = {"broader": "narrower", "narrower": "broader", "related": "related"}


class MalformedXml(ValueError):
    """Fatal XML parse failure, with source position when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class UnknownConcept(KeyError):
    pass


class InvalidScheme(ValueError):
    pass


class AmbiguousLabel(LookupError):
    """A label is an alternate label of two or more concepts."""

    def __init__(self, label: str, candidates: list[ArkId]):
        super().__init__(f"label {label!r} is ambiguous among {len(candidates)} concepts")
        self.label = label
        self.candidates = candidates


class DiagnosticCode(Enum):
    DUPLICATE_PREF = "DUPLICATE_PREF"
    PREF_ALT_CONFLICT = "PREF_ALT_CONFLICT"
    DANGLING_REF = "DANGLING_REF"
    SELF_REFERENCE = "SELF_REFERENCE"
    EMPTY_LABEL = "EMPTY_LABEL"
    DUPLICATE_ID = "DUPLICATE_ID"
    INVALID_ID = "INVALID_ID"
    IGNORED_REF = "IGNORED_REF"
    UNKNOWN_ELEMENT = "UNKNOWN_ELEMENT"
    MISSING_PREF_LABEL = "MISSING_PREF_LABEL"
    MULTIPLE_PREF_LABELS = "MULTIPLE_PREF_LABELS"
    MISSING_INVERSE = "MISSING_INVERSE"


class Severity(Enum):
    WARNING = "warning"
    ERROR = "error"


@dataclass(frozen=True)
class Diagnostic:
    code: DiagnosticCode
    severity: Severity
    message: str
    entry_id: str | None = None

    def __str__(self) -> str:
        where = f" [{self.entry_id}]" if self.entry_id else ""
        return f"{self.severity.value}: {self.code.value}:{where} {self.message}"


def has_errors(diagnostics: list[Diagnostic]) -> bool:
    return any(d.severity is Severity.ERROR for d in diagnostics)


@dataclass(frozen=True)
class SourceRef:
    """Provenance back to the digitized source: page number and/or entry id."""

    page: int | None = None
    entry_id: str | None = None

    def __post_init__(self):
        if self.page is None and self.entry_id is None:
            raise ValueError("SourceRef needs a page or an entry id")
        if self.page is not None and self.page < 1:
            raise ValueError("page must be positive")


class LabelKind(Enum):
    PREF = "pref"
    ALT = "alt"


def normalize_label(s: str) -> str:
    """Case-fold, collapse whitespace and strip terminal .,;: punctuation.

    This is the single normalization applied on both sides of every label
    comparison: index keys, lookups, and cross-reference target matching.
    """
    s = " ".join(s.casefold().split())
    return s.rstrip(".,;:").rstrip()


@dataclass
class Concept:
    """One authorized vocabulary term."""

    id: ArkId
    pref_label: str
    alt_labels: set[str] = field(default_factory=set)
    broader: set[ArkId] = field(default_factory=set)
    narrower: set[ArkId] = field(default_factory=set)
    related: set[ArkId] = field(default_factory=set)
    scheme_id: str = ""
    source: SourceRef | None = None

    def relation(self, name: str) -> set[ArkId]:
        if name not in RELATIONS:
            raise ValueError(f"unknown relation {name!r}")
        return getattr(self, name)


@dataclass(frozen=True)
class LabelEntry:
    ark: ArkId
    kind: LabelKind
    label: str  # original form, as stored on the concept


@dataclass
class ConceptScheme:
    """A dated vocabulary edition. Treat as immutable after construction."""

    scheme_id: str
    title: str
    edition_year: int
    naan: str
    concepts: dict[ArkId, Concept]
    label_index: dict[str, tuple[LabelEntry, ...]] = field(compare=False, default_factory=dict)

    def __len__(self) -> int:
        return len(self.concepts)


def get_concept(scheme: ConceptScheme, ark: ArkId) -> Concept | None:
    """Look up by identifier; hyphens and case in the id are insignificant."""
    return scheme.concepts.get(normalize(ark).base())


def find_by_label(scheme: ConceptScheme, label: str) -> tuple[Concept, LabelKind] | None:
    """Find the concept a label names, preferring authorized (pref) matches.

    Raises AmbiguousLabel when the label is an altLabel of several concepts
    and a prefLabel of none.
    """
    entries = scheme.label_index.get(normalize_label(label))
    if not entries:
        return None
    for e in entries:
        if e.kind is LabelKind.PREF:
            return scheme.concepts[e.ark], LabelKind.PREF
    candidates = sorted({e.ark for e in entries}, key=lambda a: (a.name, a.naan))
    if len(candidates) > 1:
        raise AmbiguousLabel(label, candidates)
    return scheme.concepts[candidates[0]], LabelKind.ALT


def traverse(scheme: ConceptScheme, ark: ArkId, relation: str, depth: int) -> list[ArkId]:
    """Breadth-first closure along one relation, up to `depth` hops.

    The start id is excluded; each ring is ordered by ARK name so the result
    is deterministic. Ids that point outside the scheme appear in the result
    but are not expanded.
    """
    if relation not in RELATIONS:
        raise ValueError(f"unknown relation {relation!r}")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    start = normalize(ark).base()
    if start not in scheme.concepts:
        raise UnknownConcept(str(ark))

    seen = {start}
    frontier = [start]
    out: list[ArkId] = []
    for _ in range(depth):
        ring: set[ArkId] = set()
        for node in frontier:
            concept = scheme.concepts.get(node)
            if concept is None:
                continue
            ring.update(concept.relation(relation) - seen)
        if not ring:
            break
        ordered = sorted(ring, key=lambda a: (a.name, a.naan))
        out.extend(ordered)
        seen.update(ring)
        frontier = ordered
    return out


def check_scheme(scheme: ConceptScheme) -> list[str]:
    """Full-scan verification of the structural invariants; returns violations."""
    problems = []
    seen_prefs: dict[str, ArkId] = {}
    for ark, c in scheme.concepts.items():
        if not c.pref_label.strip():
            problems.append(f"{ark}: empty prefLabel")
        if c.pref_label in c.alt_labels:
            problems.append(f"{ark}: prefLabel {c.pref_label!r} repeated in altLabels")
        norm = normalize_label(c.pref_label)
        if norm in seen_prefs:
            problems.append(f"{ark}: prefLabel duplicates {seen_prefs[norm]}")
        seen_prefs[norm] = ark
        for rel in RELATIONS:
            targets = c.relation(rel)
            if ark in targets:
                problems.append(f"{ark}: self-link via {rel}")
            for tgt in targets:
                other = scheme.concepts.get(tgt)
                if other is not None and ark not in other.relation(_INVERSE[rel]):
                    problems.append(f"{ark} -{rel}-> {tgt} has no inverse")
    return problems


class SchemeBuilder:
    """Accumulates concepts and links, then builds a consistent ConceptScheme.

    Irregular input never raises: duplicates, conflicts and self-references
    are resolved by the documented rules and reported as Diagnostics.
    """

    def __init__(self, scheme_id: str, title: str, edition_year: int, naan: str):
        self.scheme_id = scheme_id
        self.title = title
        self.edition_year = edition_year
        self.naan = naan
        self._concepts: dict[ArkId, Concept] = {}
        self._by_pref: dict[str, ArkId] = {}
        self._diagnostics: list[Diagnostic] = []

    def diag(self, code: DiagnosticCode, severity: Severity, message: str,
             entry_id: str | None = None) -> None:
        self._diagnostics.append(Diagnostic(code, severity, message, entry_id))

    def find_pref(self, label: str) -> ArkId | None:
        return self._by_pref.get(normalize_label(label))

    def add_concept(self, ark: ArkId, pref_label: str, source: SourceRef | None = None,
                    entry_id: str | None = None) -> ArkId | None:
        """Register an authorized concept. Returns its id, or None if rejected.

        First occurrence of a normalized prefLabel wins; later ones are
        dropped with a DUPLICATE_PREF error. A repeated id is likewise
        dropped (DUPLICATE_ID).
        """
        ark = normalize(ark).base()
        label = pref_label.strip()
        if not label:
            self.diag(DiagnosticCode.EMPTY_LABEL, Severity.ERROR,
                      "concept with empty prefLabel dropped", entry_id)
            return None
        if ark in self._concepts:
            self.diag(DiagnosticCode.DUPLICATE_ID, Severity.ERROR,
                      f"duplicate concept id {ark}; first occurrence kept", entry_id)
            return None
        norm = normalize_label(label)
        existing = self._by_pref.get(norm)
        if existing is not None:
            self.diag(DiagnosticCode.DUPLICATE_PREF, Severity.ERROR,
                      f"duplicate authorized term {label!r}; first occurrence kept",
                      entry_id)
            return None
        self._concepts[ark] = Concept(id=ark, pref_label=label, scheme_id=self.scheme_id,
                                      source=source)
        self._by_pref[norm] = ark
        return ark

    def add_alt_label(self, ark: ArkId, label: str, entry_id: str | None = None) -> None:
        concept = self._concepts[ark]
        label = label.strip()
        if not label:
            self.diag(DiagnosticCode.EMPTY_LABEL, Severity.WARNING,
                      "empty alternate label ignored", entry_id)
            return
        if normalize_label(label) == normalize_label(concept.pref_label):
            self.diag(DiagnosticCode.SELF_REFERENCE, Severity.WARNING,
                      f"alternate label {label!r} restates the authorized term "
                      f"{concept.pref_label!r}; ignored", entry_id)
            return
        concept.alt_labels.add(label)

    def link(self, a: ArkId, relation: str, b: ArkId, entry_id: str | None = None) -> None:
        """Add a relation and its inverse. Self-links are dropped with a warning."""
        if relation not in RELATIONS:
            raise ValueError(f"unknown relation {relation!r}")
        if a == b:
            self.diag(DiagnosticCode.SELF_REFERENCE, Severity.WARNING,
                      f"self-referential {relation} link on {a} dropped", entry_id)
            return
        self._concepts[a].relation(relation).add(b)
        if b in self._concepts:
            self._concepts[b].relation(_INVERSE[relation]).add(a)

    def link_oneway(self, a: ArkId, relation: str, b: ArkId) -> None:
        """Record exactly what an input document asserted; build() completes inverses."""
        if a == b:
            self.diag(DiagnosticCode.SELF_REFERENCE, Severity.WARNING,
                      f"self-referential {relation} link on {a} dropped")
            return
        self._concepts[a].relation(relation).add(b)

    def _complete_inverses(self, warn: bool) -> None:
        for ark, c in self._concepts.items():
            for rel in RELATIONS:
                for tgt in sorted(c.relation(rel), key=lambda a: (a.name, a.naan)):
                    other = self._concepts.get(tgt)
                    if other is None:
                        self.diag(DiagnosticCode.DANGLING_REF, Severity.WARNING,
                                  f"{ark} {rel} {tgt}: target not in scheme")
                        continue
                    inverse = other.relation(_INVERSE[rel])
                    if ark not in inverse:
                        inverse.add(ark)
                        if warn:
                            self.diag(DiagnosticCode.MISSING_INVERSE, Severity.WARNING,
                                      f"completed {tgt} {_INVERSE[rel]} {ark} "
                                      f"(only {ark} {rel} {tgt} was asserted)")

    def _build_label_index(self) -> dict[str, tuple[LabelEntry, ...]]:
        index: dict[str, list[LabelEntry]] = {}
        order = sorted(self._concepts, key=lambda a: (a.name, a.naan))
        for ark in order:
            c = self._concepts[ark]
            index.setdefault(normalize_label(c.pref_label), []).append(
                LabelEntry(ark, LabelKind.PREF, c.pref_label))
        for ark in order:
            c = self._concepts[ark]
            for alt in sorted(c.alt_labels):
                norm = normalize_label(alt)
                entries = index.setdefault(norm, [])
                if any(e.kind is LabelKind.PREF for e in entries):
                    pref = next(e for e in entries if e.kind is LabelKind.PREF)
                    if pref.ark != ark:
                        self.diag(DiagnosticCode.PREF_ALT_CONFLICT, Severity.WARNING,
                                  f"{alt!r} is the authorized term of {pref.ark} and an "
                                  f"alternate label of {ark}; lookups prefer {pref.ark}")
                entries.append(LabelEntry(ark, LabelKind.ALT, alt))
        return {k: tuple(v) for k, v in index.items()}

    def build(self, warn_on_completed_inverse: bool = False) -> tuple[ConceptScheme, list[Diagnostic]]:
        self._complete_inverses(warn=warn_on_completed_inverse)
        scheme = ConceptScheme(
            scheme_id=self.scheme_id,
            title=self.title,
            edition_year=self.edition_year,
            naan=self.naan,
            concepts=self._concepts,
            label_index=self._build_label_index(),
        )
        return scheme, list(self._diagnostics)
