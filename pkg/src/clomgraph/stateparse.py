"""Text grammar for scene states.

Canonical form::

    2PP | LC+RC | Flat
    Pie | - | Crumpled
    PP+Pie | LC_1@LH | SemiFolded

A grasp type is a ``+``-joined list of units, each optionally prefixed by a
replication count >= 2.  A unit is one or two geometries among ``P``, ``L``,
``Pi`` (``Π`` accepted), each optionally suffixed ``e`` for extrinsic.
Bindings are ``-`` or a ``+``-joined list of ``LOC[_layer][@hand]``.

The lenient reader also accepts the inline forms found in prose, e.g.
``(2PP, LC+RC, Flat)`` and ``2PP-LC+RC-Flat``.
"""

from __future__ import annotations

import re
from typing import Iterable, Optional

from .model import (
    DEFAULT_LOCATIONS,
    HANDS,
    ClothConfig,
    GraspBinding,
    GraspGeometry,
    GraspType,
    GraspUnit,
    SceneState,
    Shape,
)

# Likely typos seen in transcribed labels; reported as hints, never auto-corrected.
_LOCATION_HINTS = {"RL": "RC", "LR": "LC"}


class StateParseError(ValueError):
    """Base class for state grammar errors.

    ``offset`` is the byte offset (UTF-8) into the parsed text.
    """

    def __init__(self, message: str, text: str = "", pos: int = 0):
        self.text = text
        self.pos = pos
        self.offset = len(text[:pos].encode("utf-8"))
        super().__init__(f"{message} (at byte {self.offset})")


class StateSyntaxError(StateParseError):
    def __init__(self, expected: Iterable[str], text: str = "", pos: int = 0, found: str = ""):
        self.expected = frozenset(expected)
        self.found = found
        what = repr(found) if found else "end of input"
        super().__init__(
            f"expected one of {sorted(self.expected)}, found {what}", text, pos
        )


class _TokenError(StateParseError):
    kind = "token"

    def __init__(self, token: str, text: str = "", pos: int = 0, hint: str = ""):
        self.token = token
        self.hint = hint
        message = f"unknown {self.kind} {token!r}"
        if hint:
            message += f" (did you mean {hint!r}?)"
        super().__init__(message, text, pos)


class UnknownGeometry(_TokenError):
    kind = "grasp geometry"


class UnknownLocation(_TokenError):
    kind = "grasp location"


class UnknownConfig(_TokenError):
    kind = "cloth configuration"


_CONFIG_ALIASES = {c.name: c for c in ClothConfig}
_LENIENT_CONFIG_ALIASES = {"Semi-Folded": ClothConfig.SemiFolded, "Semi-Flat": ClothConfig.SemiFlat}


class _Scanner:
    """Character scanner over one field of the input, with absolute positions."""

    def __init__(self, text: str, start: int, end: int):
        self.text = text
        self.pos = start
        self.end = end

    def skip_ws(self):
        while self.pos < self.end and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < self.end else ""

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= self.end

    def take(self, pattern: re.Pattern) -> Optional[str]:
        m = pattern.match(self.text, self.pos, self.end)
        if not m:
            return None
        self.pos = m.end()
        return m.group(0)

    def fail(self, expected: Iterable[str]):
        found = self.text[self.pos:self.end].split()[0] if not self.at_end() else ""
        raise StateSyntaxError(expected, self.text, self.pos, found)


_INT = re.compile(r"[0-9]{1,6}")
MAX_UNIT_COUNT = 64
_WORD = re.compile(r"[A-Za-zΠ][A-Za-z0-9Π]*")
_LOC = re.compile(r"[A-Za-z][A-Za-z0-9]*")
_CONFIG_WORD = re.compile(r"[A-Za-z][A-Za-z0-9-]*")
_GEOM = re.compile(r"(Pi|Π|P|L)(e?)")


def _split_geometries(token: str) -> Optional[list[GraspGeometry]]:
    geoms = []
    pos = 0
    while pos < len(token):
        m = _GEOM.match(token, pos)
        if not m:
            return None
        shape = Shape.Pi if m.group(1) in ("Pi", "Π") else Shape[m.group(1)]
        geoms.append(GraspGeometry(shape, bool(m.group(2))))
        pos = m.end()
    return geoms


def _parse_unit_run(sc: _Scanner) -> list[GraspUnit]:
    sc.skip_ws()
    count = 1
    count_pos = sc.pos
    digits = sc.take(_INT)
    if digits is not None:
        count = int(digits)
        if not 2 <= count <= MAX_UNIT_COUNT:
            raise StateSyntaxError([f"count in 2..{MAX_UNIT_COUNT}"], sc.text, count_pos, digits)
        sc.skip_ws()
    word_pos = sc.pos
    word = sc.take(_WORD)
    if word is None:
        sc.fail(["P", "L", "Pi"])
    geoms = _split_geometries(word)
    if geoms is None:
        raise UnknownGeometry(word, sc.text, word_pos)
    if len(geoms) > 2:
        raise StateSyntaxError(["at most two geometries per unit"], sc.text, word_pos, word)
    return [GraspUnit(tuple(geoms))] * count


def _parse_grasp_type(sc: _Scanner) -> GraspType:
    units = _parse_unit_run(sc)
    while True:
        sc.skip_ws()
        if sc.peek() != "+":
            break
        sc.pos += 1
        units.extend(_parse_unit_run(sc))
    if not sc.at_end():
        sc.fail(["+", "end of grasp type"])
    return GraspType(tuple(units))


def _parse_binding(sc: _Scanner, vocabulary, lenient: bool) -> GraspBinding:
    sc.skip_ws()
    loc_pos = sc.pos
    loc = sc.take(_LOC)
    if loc is None:
        sc.fail(["-", "location"])
    if vocabulary is not None and loc not in vocabulary:
        hint = _LOCATION_HINTS.get(loc, "") if lenient else ""
        raise UnknownLocation(loc, sc.text, loc_pos, hint)
    layer = None
    hand = None
    sc.skip_ws()
    if sc.peek() == "_":
        sc.pos += 1
        sc.skip_ws()
        int_pos = sc.pos
        digits = sc.take(_INT)
        if digits is None or int(digits) < 1:
            raise StateSyntaxError(["layer index >= 1"], sc.text, int_pos, digits or "")
        layer = int(digits)
        sc.skip_ws()
    if sc.peek() == "@":
        sc.pos += 1
        sc.skip_ws()
        hand_pos = sc.pos
        word = sc.take(_WORD)
        if word not in HANDS:
            raise StateSyntaxError(HANDS, sc.text, hand_pos, word or "")
        hand = word
    return GraspBinding(loc, layer, hand)


def _parse_bindings(sc: _Scanner, vocabulary, lenient: bool) -> tuple[GraspBinding, ...]:
    sc.skip_ws()
    if sc.peek() == "-":
        sc.pos += 1
        if not sc.at_end():
            sc.fail(["end of bindings"])
        return ()
    if lenient and sc.at_end():
        return ()
    bindings = [_parse_binding(sc, vocabulary, lenient)]
    while True:
        sc.skip_ws()
        if sc.peek() != "+":
            break
        sc.pos += 1
        bindings.append(_parse_binding(sc, vocabulary, lenient))
    if not sc.at_end():
        sc.fail(["+", "_", "@", "end of bindings"])
    return tuple(bindings)


def _parse_config(sc: _Scanner, lenient: bool) -> ClothConfig:
    sc.skip_ws()
    pos = sc.pos
    word = sc.take(_CONFIG_WORD)
    if word is None:
        sc.fail(list(_CONFIG_ALIASES))
    if not sc.at_end():
        sc.fail(["end of state"])
    if word in _CONFIG_ALIASES:
        return _CONFIG_ALIASES[word]
    if lenient and word in _LENIENT_CONFIG_ALIASES:
        return _LENIENT_CONFIG_ALIASES[word]
    raise UnknownConfig(word, sc.text, pos)


def _field_spans(text: str, lenient: bool) -> list[tuple[int, int]]:
    """Locate the three fields; returns (start, end) index pairs."""
    start, end = 0, len(text)
    if lenient:
        stripped_l = len(text) - len(text.lstrip())
        stripped_r = len(text.rstrip())
        if text[stripped_l:stripped_l + 1] == "(" and text[stripped_r - 1:stripped_r] == ")":
            start, end = stripped_l + 1, stripped_r - 1
    body = text[start:end]
    seps = [i for i, ch in enumerate(body) if ch == "|"]
    if len(seps) != 2 and lenient:
        seps = [i for i, ch in enumerate(body) if ch == ","]
        if len(seps) != 2:
            dashes = [i for i, ch in enumerate(body) if ch == "-"]
            # Outer dashes delimit the fields; anything between is the bindings field.
            seps = [dashes[0], dashes[-1]] if len(dashes) >= 2 else dashes
    if len(seps) != 2:
        pos = end
        expected = ["|"] if not lenient else ["|", ",", "-"]
        if len(seps) > 2:
            pos = start + seps[2]
            raise StateSyntaxError(["end of state"], text, pos, text[pos])
        raise StateSyntaxError(expected, text, pos)
    a, b = seps
    return [(start, start + a), (start + a + 1, start + b), (start + b + 1, end)]


def parse_state(
    text: str, vocabulary: Optional[Iterable[str]] = DEFAULT_LOCATIONS, lenient: bool = False
) -> SceneState:
    """Parse a scene state. Raises a :class:`StateParseError` subclass on failure.

    ``vocabulary=None`` accepts any well-formed location token.
    """
    vocab = None if vocabulary is None else frozenset(vocabulary)
    (g0, g1), (b0, b1), (c0, c1) = _field_spans(text, lenient)
    grasp = _parse_grasp_type(_Scanner(text, g0, g1))
    bindings = _parse_bindings(_Scanner(text, b0, b1), vocab, lenient)
    config = _parse_config(_Scanner(text, c0, c1), lenient)
    return SceneState(grasp, bindings, config)


def parse_grasp_type(text: str) -> GraspType:
    return _parse_grasp_type(_Scanner(text, 0, len(text)))


def parse_binding(text: str, vocabulary: Iterable[str] = DEFAULT_LOCATIONS) -> GraspBinding:
    sc = _Scanner(text, 0, len(text))
    binding = _parse_binding(sc, frozenset(vocabulary), lenient=False)
    if not sc.at_end():
        sc.fail(["_", "@", "end of binding"])
    return binding


def serialize_state(state: SceneState) -> str:
    return state.render()
