"""Reader and writer for ``.clom`` trial annotation files.

A file is a header block of ``#key: value`` lines followed by one
TAB-separated row per segment::

    #format: clom/1
    #subject: s01
    #task: napkin
    #trial: 1
    #clap: 2.350
    0.000	Pie | - | Crumpled	Grasp corner
    4.210	PP | LC | Crumpled	Trace edge
    7.905	2PP | LC+RC | Crumpled	-

The final row carries ``-`` as its action.  Times are seconds from the start
of the video.
"""

from __future__ import annotations

import math
import re
from typing import Iterable, Optional

from .model import DEFAULT_LOCATIONS, ManipulationPrimitive, Segment, Trial, lint_state
from .stateparse import StateParseError, parse_state

FORMAT_TAG = "clom/1"
REQUIRED_KEYS = ("subject", "task", "trial")
KNOWN_KEYS = ("format", "subject", "task", "trial", "clap", "cloth")

_HEADER_RE = re.compile(r"#\s*([A-Za-z_][A-Za-z0-9_-]*)\s*:\s*(.*)$")


class AnnotationError(ValueError):
    """Annotation file error.

    ``row`` is the 1-based segment row; ``line`` the 1-based line in the file.
    """

    def __init__(self, message: str, row: int, line: int):
        self.row = row
        self.line = line
        super().__init__(f"row {row} (line {line}): {message}")


class HeaderMissing(AnnotationError):
    pass


class HeaderError(AnnotationError):
    pass


class RowFormatError(AnnotationError):
    pass


class RowStateError(AnnotationError):
    def __init__(self, cause: StateParseError, row: int, line: int):
        self.cause = cause
        super().__init__(f"bad state: {cause}", row, line)


class NonMonotonicTime(AnnotationError):
    def __init__(self, row: int, line: int, previous: float, current: float):
        super().__init__(f"start time {current} does not exceed previous {previous}", row, line)


class DuplicateConsecutiveState(AnnotationError):
    def __init__(self, row: int, line: int, state):
        super().__init__(f"state {state} repeats the previous row; segments change at each state change", row, line)


class DanglingAction(AnnotationError):
    def __init__(self, row: int, line: int, action: str):
        super().__init__(f"final row carries action {action!r}; expected '-'", row, line)


class MissingAction(AnnotationError):
    def __init__(self, row: int, line: int):
        super().__init__("non-final row has no action", row, line)


class TooFewRows(AnnotationError):
    pass


def _parse_time(text: str, row: int, line: int, what: str = "start time") -> float:
    try:
        value = float(text)
    except ValueError:
        raise RowFormatError(f"{what} {text!r} is not a number", row, line) from None
    if not math.isfinite(value) or value < 0:
        raise RowFormatError(f"{what} {text!r} must be finite and >= 0", row, line)
    return value


def parse_trial(text: str, vocabulary: Iterable[str] = DEFAULT_LOCATIONS, lenient: bool = False) -> Trial:
    header: dict[str, str] = {}
    header_lines: dict[str, int] = {}
    rows: list[tuple[int, float, object, Optional[str]]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        if line.lstrip().startswith("#"):
            m = _HEADER_RE.match(line.strip())
            if not m:
                continue  # plain comment
            if rows:
                raise HeaderError("header line after segment rows", len(rows), lineno)
            key, value = m.group(1).lower(), m.group(2).strip()
            if key in header:
                raise HeaderError(f"duplicate header key {key!r}", 1, lineno)
            header[key] = value
            header_lines[key] = lineno
            continue

        row = len(rows) + 1
        if not header:
            raise HeaderMissing("segment rows before any header", row, lineno)
        fields = line.split("\t")
        if len(fields) != 3:
            raise RowFormatError(f"expected 3 TAB-separated fields, got {len(fields)}", row, lineno)
        t_start = _parse_time(fields[0].strip(), row, lineno)
        try:
            state = parse_state(fields[1], vocabulary, lenient=lenient)
        except StateParseError as exc:
            raise RowStateError(exc, row, lineno) from exc
        action = " ".join(fields[2].split())
        rows.append((lineno, t_start, state, None if action in ("", "-") else action))

    if not header:
        raise HeaderMissing("no header block", 1, 1)
    for key in REQUIRED_KEYS:
        if key not in header:
            raise HeaderMissing(f"required header key {key!r} missing", 1, 1)
    if "format" in header and header["format"] != FORMAT_TAG:
        raise HeaderError(f"unsupported format {header['format']!r}", 1, header_lines["format"])
    try:
        trial_index = int(header["trial"])
    except ValueError:
        raise HeaderError(f"trial index {header['trial']!r} is not an integer", 1, header_lines["trial"]) from None
    if trial_index < 1:
        raise HeaderError("trial index must be >= 1", 1, header_lines["trial"])
    clap = None
    if "clap" in header:
        clap = _parse_time(header["clap"], 1, header_lines["clap"], what="clap time")

    if len(rows) < 2:
        raise TooFewRows(f"need at least 2 segment rows, got {len(rows)}", max(len(rows), 1), rows[-1][0] if rows else 1)
    for i in range(1, len(rows)):
        lineno, t, state, _ = rows[i]
        _, t_prev, state_prev, _ = rows[i - 1]
        if not t > t_prev:
            raise NonMonotonicTime(i + 1, lineno, t_prev, t)
        if state == state_prev:
            raise DuplicateConsecutiveState(i + 1, lineno, state)
    for i, (lineno, _, _, action) in enumerate(rows[:-1], start=1):
        if action is None:
            raise MissingAction(i, lineno)
    if rows[-1][3] is not None:
        raise DanglingAction(len(rows), rows[-1][0], rows[-1][3])

    metadata = {k: v for k, v in header.items() if k not in ("subject", "task", "trial", "clap")}
    return Trial(
        subject_id=header["subject"],
        task_id=header["task"],
        trial_index=trial_index,
        segments=tuple(Segment(t, s, a) for _, t, s, a in rows),
        clap_video_time=clap,
        metadata=metadata,
    )


def primitives_of(trial: Trial) -> list[ManipulationPrimitive]:
    return trial.primitives()


def lint_trial(trial: Trial) -> list[tuple[int, str]]:
    """Soft warnings as (row, message) pairs."""
    out = []
    for row, seg in enumerate(trial.segments, start=1):
        out.extend((row, msg) for msg in lint_state(seg.state))
    return out


def format_trial(trial: Trial) -> str:
    lines = [
        f"#format: {FORMAT_TAG}",
        f"#subject: {trial.subject_id}",
        f"#task: {trial.task_id}",
        f"#trial: {trial.trial_index}",
    ]
    if trial.clap_video_time is not None:
        lines.append(f"#clap: {trial.clap_video_time:.3f}")
    for key, value in sorted(trial.metadata.items()):
        if key != "format":
            lines.append(f"#{key}: {value}")
    for seg in trial.segments:
        lines.append(f"{seg.t_start:.3f}\t{seg.state.render()}\t{seg.action or '-'}")
    return "\n".join(lines) + "\n"
