"""Core value types: grasp notation, scene states, primitives, trials and graphs.

Every type here is an immutable value.  Multiset-valued fields (grasp units,
bindings) are stored as sorted tuples so that dataclass equality coincides
with equality of the canonical text rendering.
"""

from __future__ import annotations

import enum
import re
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Optional

DEFAULT_LOCATIONS: tuple[str, ...] = ("LC", "RC", "FL", "FR", "I")
HANDS: tuple[str, ...] = ("LH", "RH")


class Shape(enum.IntEnum):
    """Prehension geometry. The integer value is the canonical sort order."""

    P = 0
    L = 1
    Pi = 2


class ClothConfig(enum.IntEnum):
    Crumpled = 0
    Flat = 1
    Folded = 2
    SemiFolded = 3
    SemiFlat = 4


@dataclass(frozen=True, order=True)
class GraspGeometry:
    shape: Shape
    extrinsic: bool = False

    @property
    def token(self) -> str:
        return self.shape.name + ("e" if self.extrinsic else "")


@dataclass(frozen=True)
class GraspUnit:
    """One or two opposing geometries.

    Two geometries form a prehensile unit (two virtual fingers); a single
    geometry is a support contact opposed by gravity, e.g. cloth on a table.
    """

    geometries: tuple[GraspGeometry, ...]

    def __post_init__(self):
        geoms = tuple(sorted(self.geometries))
        if not 1 <= len(geoms) <= 2:
            raise ValueError(f"a grasp unit has 1 or 2 geometries, got {len(geoms)}")
        object.__setattr__(self, "geometries", geoms)

    @property
    def prehensile(self) -> bool:
        return len(self.geometries) == 2

    @property
    def involves_hand(self) -> bool:
        return any(not g.extrinsic for g in self.geometries)

    @property
    def token(self) -> str:
        return "".join(g.token for g in self.geometries)

    def sort_key(self):
        return tuple((g.shape, g.extrinsic) for g in self.geometries)

    def __lt__(self, other: "GraspUnit") -> bool:
        return self.sort_key() < other.sort_key()


@dataclass(frozen=True)
class GraspType:
    units: tuple[GraspUnit, ...]

    def __post_init__(self):
        if not self.units:
            raise ValueError("a grasp type needs at least one unit")
        object.__setattr__(self, "units", tuple(sorted(self.units, key=GraspUnit.sort_key)))

    def render(self) -> str:
        return self._text

    # Values are immutable, so the rendering is computed once per instance.
    @cached_property
    def _text(self) -> str:
        runs = []
        counts = Counter(self.units)
        seen = set()
        for unit in self.units:
            if unit in seen:
                continue
            seen.add(unit)
            n = counts[unit]
            runs.append(f"{n}{unit.token}" if n > 1 else unit.token)
        return "+".join(runs)

    def sort_key(self):
        return tuple(u.sort_key() for u in self.units)


def location_key(location: str) -> tuple[int, str]:
    # Default tokens keep their fixed order; extension tokens follow alphabetically
    # so the ordering does not depend on which vocabulary is active.
    if location in DEFAULT_LOCATIONS:
        return (DEFAULT_LOCATIONS.index(location), "")
    return (len(DEFAULT_LOCATIONS), location)


_LOCATION_RE = re.compile(r"[A-Za-z][A-Za-z0-9]*\Z")


@dataclass(frozen=True)
class GraspBinding:
    """A grasped cloth location. ``layer=None`` means all layers are held."""

    location: str
    layer: Optional[int] = None
    hand: Optional[str] = None

    def __post_init__(self):
        if not _LOCATION_RE.match(self.location):
            raise ValueError(f"invalid location token {self.location!r}")
        if self.layer is not None and self.layer < 1:
            raise ValueError(f"layer index must be >= 1, got {self.layer}")
        if self.hand is not None and self.hand not in HANDS:
            raise ValueError(f"hand must be one of {HANDS}, got {self.hand!r}")

    def render(self) -> str:
        text = self.location
        if self.layer is not None:
            text += f"_{self.layer}"
        if self.hand is not None:
            text += f"@{self.hand}"
        return text

    def sort_key(self):
        return (
            location_key(self.location),
            0 if self.layer is None else self.layer,
            -1 if self.hand is None else HANDS.index(self.hand),
        )


@dataclass(frozen=True)
class SceneState:
    """The tuple (grasp type, grasp bindings, cloth configuration)."""

    grasp_type: GraspType
    bindings: tuple[GraspBinding, ...]
    config: ClothConfig

    def __post_init__(self):
        object.__setattr__(self, "bindings", tuple(sorted(self.bindings, key=GraspBinding.sort_key)))
        object.__setattr__(self, "config", ClothConfig(self.config))

    def render(self) -> str:
        return self._text

    @cached_property
    def _text(self) -> str:
        bindings = "+".join(b.render() for b in self.bindings) or "-"
        return f"{self.grasp_type.render()} | {bindings} | {self.config.name}"

    __str__ = render

    def sort_key(self):
        return (
            self.grasp_type.sort_key(),
            tuple(b.sort_key() for b in self.bindings),
            int(self.config),
        )

    def __lt__(self, other: "SceneState") -> bool:
        return self.sort_key() < other.sort_key()

    def __le__(self, other: "SceneState") -> bool:
        return self == other or self < other

    def __gt__(self, other: "SceneState") -> bool:
        return other < self

    def __ge__(self, other: "SceneState") -> bool:
        return other <= self


def lint_state(state: SceneState) -> list[str]:
    """Soft consistency checks. Returns human-readable warnings."""
    warnings = []
    if not state.bindings and any(u.involves_hand for u in state.grasp_type.units):
        warnings.append(
            f"state {state} has a hand-held grasp unit but no grasp locations"
        )
    return warnings


def state_equal(a: SceneState, b: SceneState) -> bool:
    return a.render() == b.render()


def normalize_label(label: str) -> str:
    """Collapse whitespace and put the label in sentence case.

    Labels compare case-insensitively, so a single canonical casing is kept.
    """
    words = label.split()
    if not words:
        raise ValueError("motion label must be non-empty")
    text = " ".join(words).lower()
    return text[0].upper() + text[1:]


@dataclass(frozen=True)
class ManipulationPrimitive:
    origin: SceneState
    destination: SceneState
    motion_label: str

    def __post_init__(self):
        if self.origin == self.destination:
            raise ValueError(f"primitive origin and destination are both {self.origin}")
        object.__setattr__(self, "motion_label", normalize_label(self.motion_label))

    def sort_key(self):
        return (self.origin.sort_key(), self.destination.sort_key(), self.motion_label)

    def __lt__(self, other: "ManipulationPrimitive") -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        return f"{self.origin} --[{self.motion_label}]--> {self.destination}"


@dataclass(frozen=True)
class Segment:
    t_start: float
    state: SceneState
    action: Optional[str] = None


@dataclass(frozen=True)
class Trial:
    subject_id: str
    task_id: str
    trial_index: int
    segments: tuple[Segment, ...]
    clap_video_time: Optional[float] = None
    metadata: Mapping[str, str] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        if self.trial_index < 1:
            raise ValueError("trial_index must be >= 1")
        if not segs:
            raise ValueError("a trial needs at least one segment")
        for i, (prev, cur) in enumerate(zip(segs, segs[1:]), start=1):
            if not cur.t_start > prev.t_start:
                raise ValueError(f"segment {i + 1}: start times must strictly increase")
            if cur.state == prev.state:
                raise ValueError(f"segment {i + 1}: repeats the previous state")
        for i, seg in enumerate(segs[:-1], start=1):
            if not seg.action:
                raise ValueError(f"segment {i}: missing action")
        if segs[-1].action:
            raise ValueError("the last segment must not carry an action")

    @property
    def key(self) -> tuple[str, str, int]:
        return (self.task_id, self.subject_id, self.trial_index)

    def primitives(self) -> list[ManipulationPrimitive]:
        return [
            ManipulationPrimitive(a.state, b.state, a.action)
            for a, b in zip(self.segments, self.segments[1:])
        ]


@dataclass(frozen=True)
class KinematicStats:
    v_max: float
    v_mean: float
    a_max: float
    a_mean: float


@dataclass(frozen=True, order=True)
class Occurrence:
    task_id: str
    subject_id: str
    trial_index: int
    segment_index: int


@dataclass(frozen=True)
class EdgeRecord:
    occurrences: tuple[Occurrence, ...]
    stats: Optional[Mapping[str, KinematicStats]] = None

    def __post_init__(self):
        if not self.occurrences:
            raise ValueError("an edge needs at least one occurrence")
        object.__setattr__(self, "occurrences", tuple(sorted(self.occurrences)))

    @property
    def multiplicity(self) -> int:
        return len(self.occurrences)


@dataclass(frozen=True)
class CloMGraph:
    """States and primitives observed in demonstrations, with multiplicities.

    ``symmetry`` records the canonicalization applied when the graph was built
    (a plain flag mapping) so downstream steps can re-derive segment indices.
    """

    nodes: frozenset
    edges: Mapping[ManipulationPrimitive, EdgeRecord]
    trial_count: int = 0
    symmetry: Optional[Mapping[str, bool]] = None

    def __post_init__(self):
        object.__setattr__(self, "nodes", frozenset(self.nodes))
        object.__setattr__(self, "edges", dict(sorted(self.edges.items())))
        for prim in self.edges:
            if prim.origin not in self.nodes or prim.destination not in self.nodes:
                raise ValueError(f"edge endpoint missing from nodes: {prim}")

    @classmethod
    def from_edges(cls, edges, trial_count=0, symmetry=None) -> "CloMGraph":
        nodes = {s for p in edges for s in (p.origin, p.destination)}
        return cls(frozenset(nodes), edges, trial_count, symmetry)

    def sorted_nodes(self) -> list[SceneState]:
        return sorted(self.nodes, key=SceneState.sort_key)

    def multiplicity(self, prim: ManipulationPrimitive) -> int:
        return self.edges[prim].multiplicity

    def out_edges(self, state: SceneState) -> list[ManipulationPrimitive]:
        return [p for p in self.edges if p.origin == state]

    def out_multiplicity(self, state: SceneState) -> int:
        return sum(rec.multiplicity for p, rec in self.edges.items() if p.origin == state)

    def transition_probability(self, prim: ManipulationPrimitive) -> Fraction:
        return Fraction(self.multiplicity(prim), self.out_multiplicity(prim.origin))

    @property
    def total_multiplicity(self) -> int:
        return sum(rec.multiplicity for rec in self.edges.values())
