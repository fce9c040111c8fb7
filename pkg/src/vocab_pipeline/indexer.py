"""Keyphrase extraction (RAKE) and matching of phrases against a scheme.

The pipeline mirrors the classic automatic-indexing sequence: reduce the
input to plain text, carve candidate phrases out of sentences at stopwords
and punctuation, score them from word degree/frequency statistics, then look
the candidates up in the vocabulary's label index. Scores are kept as exact
rationals so results are reproducible bit for bit.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from html import escape as html_escape
from html.parser import HTMLParser
from importlib import resources

from .ark import ArkId, parse_ark, render
from .model import ConceptScheme, LabelEntry, LabelKind, normalize_label

__all__ = [
    "RakeParams", "WordStats", "ScoredPhrase", "IndexResult",
    "InvalidEncoding", "EmptyResults",
    "extract_text", "normalize_label", "rake_extract", "match_vocabulary",
    "tag_cloud", "load_stoplist", "default_stoplist",
    "result_to_dict", "results_from_json",
]

_SENTENCE_RE = re.compile(r"[.!?;:\n]+")
_TOKEN_RE = re.compile(r"\w+(?:[-']\w+)*")
_NUMERIC_RE = re.compile(r"\d+")


class InvalidEncoding(ValueError):
    pass


class EmptyResults(ValueError):
    pass


def load_stoplist(path: str) -> frozenset[str]:
    """Read a stoplist file: one word per line, '#' starts a comment."""
    words = set()
    with open(path, encoding="utf-8") as f:
        for line in f:
            word = line.split("#", 1)[0].strip()
            if word:
                words.add(word.casefold())
    return frozenset(words)


@lru_cache(maxsize=1)
def default_stoplist() -> frozenset[str]:
    """The bundled general-English stoplist (~570 words)."""
    text = resources.files(__package__).joinpath("stoplists/english.txt").read_text("utf-8")
    words = set()
    for line in text.splitlines():
        word = line.split("#", 1)[0].strip()
        if word:
            words.add(word.casefold())
    return frozenset(words)


@dataclass(frozen=True)
class RakeParams:
    min_char_length: int = 3
    max_words_per_phrase: int = 4
    min_keyword_frequency: int = 1
    stoplist: frozenset[str] = field(default_factory=default_stoplist)

    def __post_init__(self):
        if min(self.min_char_length, self.max_words_per_phrase,
               self.min_keyword_frequency) < 1:
            raise ValueError("RAKE parameters must all be >= 1")
        if not self.stoplist:
            raise ValueError("stoplist must not be empty")


@dataclass(frozen=True)
class WordStats:
    word: str
    freq: int
    deg: int

    @property
    def score(self) -> Fraction:
        return Fraction(self.deg, self.freq)


@dataclass(frozen=True)
class ScoredPhrase:
    words: tuple[str, ...]
    score: Fraction

    @property
    def text(self) -> str:
        return " ".join(self.words)


@dataclass(frozen=True)
class IndexResult:
    concept_id: ArkId
    matched_label: str
    label_kind: LabelKind
    score: float
    pref_label: str


class _HtmlText(HTMLParser):
    """Best-effort text extraction: drops tags and script/style content."""

    _SKIP = {"script", "style"}

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.chunks: list[str] = []
        self._skipping = 0

    def handle_starttag(self, tag, attrs):
        if tag in self._SKIP:
            self._skipping += 1

    def handle_endtag(self, tag):
        if tag in self._SKIP and self._skipping:
            self._skipping -= 1

    def handle_data(self, data):
        if not self._skipping:
            self.chunks.append(data)


def extract_text(data: bytes | str, format: str = "txt") -> str:
    """Reduce an input document to plain text.

    txt input passes through unchanged; html input is stripped of markup,
    script and style content, with entities decoded and whitespace collapsed.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InvalidEncoding(f"input is not valid UTF-8: {exc}") from exc
    if format == "txt":
        return data
    if format == "html":
        parser = _HtmlText()
        parser.feed(data)
        parser.close()
        return " ".join("".join(parser.chunks).split())
    raise ValueError(f"unknown format {format!r}")


def _candidate_phrases(text: str, params: RakeParams) -> list[tuple[str, ...]]:
    """Split into candidate phrases at sentence bounds, stopwords and punctuation.

    Words shorter than the minimum length and purely numeric tokens are
    dropped from their phrase; phrases longer than the word cap are discarded.
    """
    phrases: list[tuple[str, ...]] = []
    for sentence in _SENTENCE_RE.split(text):
        current: list[str] = []
        pos = 0
        for match in _TOKEN_RE.finditer(sentence):
            gap = sentence[pos:match.start()]
            pos = match.end()
            if current and gap.strip():
                phrases.append(tuple(current))
                current = []
            word = match.group().casefold()
            if word in params.stoplist:
                if current:
                    phrases.append(tuple(current))
                    current = []
                continue
            if len(word) < params.min_char_length or _NUMERIC_RE.fullmatch(word):
                continue
            current.append(word)
        if current:
            phrases.append(tuple(current))
    return [p for p in phrases if len(p) <= params.max_words_per_phrase]


def word_stats(phrases: list[tuple[str, ...]]) -> dict[str, WordStats]:
    """Per-word frequency and degree over the candidate phrases.

    Every occurrence of a word contributes the word count of its phrase to
    the word's degree, so words living in long phrases score high.
    """
    freq: Counter[str] = Counter()
    deg: Counter[str] = Counter()
    for phrase in phrases:
        for word in phrase:
            freq[word] += 1
            deg[word] += len(phrase)
    return {w: WordStats(w, freq[w], deg[w]) for w in freq}


def rake_extract(text: str, params: RakeParams | None = None) -> list[ScoredPhrase]:
    """Extract scored keyphrases, best first; ties break on phrase text."""
    if params is None:
        params = RakeParams()
    phrases = _candidate_phrases(text, params)
    if not phrases:
        return []
    stats = word_stats(phrases)
    counts = Counter(phrases)
    seen: dict[tuple[str, ...], ScoredPhrase] = {}
    for phrase in phrases:
        if phrase in seen or counts[phrase] < params.min_keyword_frequency:
            continue
        score = sum((stats[w].score for w in phrase), Fraction(0))
        seen[phrase] = ScoredPhrase(phrase, score)
    return sorted(seen.values(), key=lambda sp: (-sp.score, sp.text))


def _lookup(scheme: ConceptScheme, key: str) -> list[LabelEntry]:
    """Index entries for a normalized label; an authorized match shadows all
    alternates, and an ambiguous alternate yields every candidate."""
    entries = scheme.label_index.get(key)
    if not entries:
        return []
    for e in entries:
        if e.kind is LabelKind.PREF:
            return [e]
    picked: dict[ArkId, LabelEntry] = {}
    for e in entries:
        picked.setdefault(e.ark, e)
    return list(picked.values())


def match_vocabulary(phrases: list[ScoredPhrase], scheme: ConceptScheme,
                     uninvert: bool = False) -> list[IndexResult]:
    """Match phrases against the scheme's labels, one result per concept.

    Alternate-label hits resolve to the authorized concept; each concept
    keeps its best phrase score. With uninvert=True an inverted heading
    "A, B" also matches the phrase "b a".
    """
    best: dict[ArkId, IndexResult] = {}
    for sp in phrases:
        keys = [normalize_label(sp.text)]
        if uninvert and len(sp.words) >= 2:
            for cut in range(1, len(sp.words)):
                head = " ".join(sp.words[cut:])
                tail = " ".join(sp.words[:cut])
                keys.append(normalize_label(f"{head}, {tail}"))
        for key in keys:
            for entry in _lookup(scheme, key):
                concept = scheme.concepts[entry.ark]
                score = float(sp.score)
                previous = best.get(entry.ark)
                if previous is None or score > previous.score:
                    best[entry.ark] = IndexResult(
                        concept_id=entry.ark,
                        matched_label=entry.label,
                        label_kind=entry.kind,
                        score=score,
                        pref_label=concept.pref_label,
                    )
    return sorted(best.values(), key=lambda r: (-r.score, r.pref_label))


def result_to_dict(result: IndexResult) -> dict:
    return {
        "ark": render(result.concept_id),
        "prefLabel": result.pref_label,
        "matchedLabel": result.matched_label,
        "labelKind": result.label_kind.value,
        "score": result.score,
    }


def results_from_json(data: bytes | str) -> list[IndexResult]:
    raw = json.loads(data)
    return [
        IndexResult(
            concept_id=parse_ark(item["ark"]),
            matched_label=item["matchedLabel"],
            label_kind=LabelKind(item["labelKind"]),
            score=item["score"],
            pref_label=item["prefLabel"],
        )
        for item in raw
    ]


def _size_class(score: float, lo: float, hi: float) -> int:
    if hi == lo:
        return 3
    return 1 + round(4 * (score - lo) / (hi - lo))


def tag_cloud(results: list[IndexResult], format: str = "json") -> bytes:
    """Weighted rendering of matched terms.

    json emits the full result list; html renders each authorized label in
    one of five size classes, linearly interpolated between the lowest and
    highest score (a single score lands everything in the middle class).
    """
    if format == "json":
        payload = [result_to_dict(r) for r in results]
        return (json.dumps(payload, ensure_ascii=False, indent=2) + "\n").encode("utf-8")
    if format != "html":
        raise ValueError(f"unknown format {format!r}")
    if not results:
        raise EmptyResults("cannot render a tag cloud from zero results")
    scores = [r.score for r in results]
    lo, hi = min(scores), max(scores)
    spans = []
    for r in results:
        cls = _size_class(r.score, lo, hi)
        title = html_escape(f"{render(r.concept_id)} score={r.score:g}", quote=True)
        spans.append(f'    <span class="tag size-{cls}" title="{title}">'
                     f'{html_escape(r.pref_label)}</span>')
    body = "\n".join(spans)
    page = (
        "<!DOCTYPE html>\n"
        '<html lang="en">\n<head>\n<meta charset="utf-8"/>\n'
        "<title>Tag cloud</title>\n"
        "<style>\n"
        ".tag { margin: 0.2em; display: inline-block; }\n"
        ".size-1 { font-size: 0.8em; }\n"
        ".size-2 { font-size: 1.0em; }\n"
        ".size-3 { font-size: 1.3em; }\n"
        ".size-4 { font-size: 1.7em; }\n"
        ".size-5 { font-size: 2.2em; }\n"
        "</style>\n</head>\n<body>\n  <div class=\"cloud\">\n"
        f"{body}\n"
        "  </div>\n</body>\n</html>\n"
    )
    return page.encode("utf-8")
