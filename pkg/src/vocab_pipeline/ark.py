"""ARK identifier handling: parsing, normalization, minting and validation.

ARKs here follow the NOID conventions: names are drawn from a 29-character
betanumeric alphabet (no vowels, no 'l') and carry a trailing check
character computed over the NAAN and name body.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
from dataclasses import dataclass, replace
from enum import Enum

# Betanumeric alphabet used for names and check-character arithmetic.
ALPHABET = "0123456789bcdfghjkmnpqrstvwxz"
RADIX = len(ALPHABET)  # 29, prime

_ORDINALS = {c: i for i, c in enumerate(ALPHABET)}

# Characters parse_ark tolerates inside a name before normalization:
# alphabet chars, their uppercase forms, and insignificant hyphens.
_NAME_CHARS = set(ALPHABET) | {c.upper() for c in ALPHABET} | {"-"}

_URL_RE = re.compile(r"^https?://[^/]+/", re.IGNORECASE)


class InvalidArk(ValueError):
    """Raised when a string cannot be parsed as an ARK."""


class MinterExhausted(RuntimeError):
    """Raised when a minter has used its entire name space."""


class Inflection(Enum):
    NONE = ""
    BRIEF = "?"
    FULL = "??"


@dataclass(frozen=True)
class ArkId:
    """A parsed ARK: NAAN, name, and optional qualifier/inflection."""

    naan: str
    name: str
    qualifier: str | None = None
    inflection: Inflection = Inflection.NONE

    def base(self) -> "ArkId":
        """Identity core: the same NAAN/name with qualifier and inflection stripped."""
        if self.qualifier is None and self.inflection is Inflection.NONE:
            return self
        return ArkId(self.naan, self.name)

    def __str__(self) -> str:
        return render(self)


def ordinal(c: str) -> int:
    """Position of c in the betanumeric alphabet; 0 for any other character."""
    return _ORDINALS.get(c, 0)


def parse_ark(s: str) -> ArkId:
    """Parse an ARK from a bare identifier or a resolver URL.

    Accepts "ark:/NAAN/NAME", "ark:NAAN/NAME" and "http(s)://host/ark:/NAAN/NAME".
    A trailing "?" or "??" is captured as the inflection; anything after the
    name's next "/" is kept verbatim as the qualifier.
    """
    s = s.strip()
    s = _URL_RE.sub("", s)

    if s[:4].lower() != "ark:":
        raise InvalidArk(f"no 'ark:' token in {s!r}")
    rest = s[4:]
    if rest.startswith("/"):
        rest = rest[1:]

    inflection = Inflection.NONE
    if rest.endswith("??"):
        inflection = Inflection.FULL
        rest = rest[:-2]
    elif rest.endswith("?"):
        inflection = Inflection.BRIEF
        rest = rest[:-1]

    naan, _, tail = rest.partition("/")
    name, slash, qualifier = tail.partition("/")

    if not naan:
        raise InvalidArk("empty NAAN")
    if not naan.isascii() or not naan.isdigit():
        raise InvalidArk(f"NAAN must be digits, got {naan!r}")
    if not name:
        raise InvalidArk("empty name")
    bad = sorted(set(name) - _NAME_CHARS)
    if bad:
        raise InvalidArk(f"illegal character(s) {bad} in name {name!r}")

    return ArkId(
        naan=naan,
        name=name,
        qualifier=qualifier if slash else None,
        inflection=inflection,
    )


def normalize(ark: ArkId) -> ArkId:
    """Canonical form: lowercased NAAN and name, hyphens deleted from the name.

    Idempotent; qualifier and inflection are left untouched.
    """
    return replace(ark, naan=ark.naan.lower(), name=ark.name.lower().replace("-", ""))


def render(ark: ArkId) -> str:
    """Canonical string form "ark:/NAAN/NAME[/qualifier][?|??]"."""
    out = f"ark:/{ark.naan}/{ark.name}"
    if ark.qualifier is not None:
        out += f"/{ark.qualifier}"
    return out + ark.inflection.value


def check_char(naan: str, body: str) -> str:
    """NOID-style check character over "NAAN/body".

    Each character contributes ordinal * position (1-based over the whole
    string, '/' included with ordinal 0); the sum mod 29 indexes the alphabet.
    """
    if not body:
        raise ValueError("empty body")
    s = f"{naan}/{body}"
    total = sum(ordinal(c) * i for i, c in enumerate(s, start=1))
    return ALPHABET[total % RADIX]


def validate(ark: ArkId, strict: bool = False) -> tuple[bool, list[str]]:
    """Grammar check, plus check-character verification when strict.

    Returns (ok, reasons); reasons is empty when ok. Expects a normalized id.
    """
    reasons = []
    if not ark.naan or not ark.naan.isascii() or not ark.naan.isdigit():
        reasons.append(f"NAAN must be a non-empty digit string, got {ark.naan!r}")
    if not ark.name:
        reasons.append("name is empty")
    else:
        bad = sorted(set(ark.name) - set(ALPHABET))
        if bad:
            reasons.append(f"character(s) {bad} outside the betanumeric alphabet")
    if strict and not reasons:
        if len(ark.name) < 2:
            reasons.append("name too short to carry a check character")
        else:
            expected = check_char(ark.naan, ark.name[:-1])
            if ark.name[-1] != expected:
                reasons.append(
                    f"check character mismatch: expected {expected!r}, got {ark.name[-1]!r}"
                )
    return (not reasons, reasons)


@dataclass
class MinterState:
    """Deterministic minter over the betanumeric alphabet.

    Names are prefix + blade + check char, where the blade is the base-29
    encoding of an affine permutation of the counter. The multiplier is
    coprime with 29, so every counter value yields a distinct blade.
    """

    naan: str
    prefix: str = "b4"
    blade_length: int = 6
    counter: int = 0
    multiplier: int = 1537771
    offset: int = 12345

    @property
    def capacity(self) -> int:
        return RADIX**self.blade_length

    def __post_init__(self):
        if self.blade_length < 1:
            raise ValueError("blade_length must be >= 1")
        if self.multiplier % RADIX == 0:
            raise ValueError("multiplier must be coprime with the radix")
        if not 0 <= self.counter <= self.capacity:
            raise ValueError("counter out of range")


def _encode_blade(value: int, width: int) -> str:
    digits = []
    for _ in range(width):
        value, r = divmod(value, RADIX)
        digits.append(ALPHABET[r])
    return "".join(reversed(digits))


def mint(state: MinterState) -> tuple[ArkId, MinterState]:
    """Mint the next ARK; returns the id and the advanced state."""
    if state.counter >= state.capacity:
        raise MinterExhausted(f"minter capacity {state.capacity} exhausted")
    permuted = (state.multiplier * state.counter + state.offset) % state.capacity
    body = state.prefix + _encode_blade(permuted, state.blade_length)
    name = body + check_char(state.naan, body)
    return ArkId(state.naan, name), replace(state, counter=state.counter + 1)


def load_minter_state(path: str) -> MinterState:
    with open(path, encoding="utf-8") as f:
        raw = json.load(f)
    return MinterState(
        naan=raw["naan"],
        prefix=raw["prefix"],
        blade_length=raw["bladeLength"],
        counter=raw["counter"],
    )


def save_minter_state(state: MinterState, path: str) -> None:
    """Write the state file atomically (temp file + rename)."""
    payload = {
        "naan": state.naan,
        "prefix": state.prefix,
        "bladeLength": state.blade_length,
        "counter": state.counter,
    }
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".minter-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            json.dump(payload, f)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
