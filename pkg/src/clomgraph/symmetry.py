"""Left/right and near/far simplifications of scene states.

A state is canonicalized by first projecting away ignored detail (hands,
layers) and then taking the representative with the smallest text rendering
over its orbit under the enabled symmetries.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace

from .model import GraspBinding, SceneState, Segment, Trial

_MIRROR_LOCATIONS = {"LC": "RC", "RC": "LC", "FL": "FR", "FR": "FL"}
_MIRROR_HANDS = {"LH": "RH", "RH": "LH"}
_ROTATE_LOCATIONS = {"LC": "FR", "FR": "LC", "RC": "FL", "FL": "RC"}


@dataclass(frozen=True)
class SymmetryConfig:
    drop_hands: bool = True
    mirror_lr: bool = True
    rotate_180: bool = False
    drop_layers: bool = False

    @classmethod
    def identity(cls) -> "SymmetryConfig":
        return cls(drop_hands=False, mirror_lr=False, rotate_180=False, drop_layers=False)

    def as_dict(self) -> dict[str, bool]:
        return asdict(self)


def _map_bindings(state: SceneState, locations: dict, hands: dict) -> SceneState:
    bindings = tuple(
        GraspBinding(locations.get(b.location, b.location), b.layer, hands.get(b.hand, b.hand))
        for b in state.bindings
    )
    return SceneState(state.grasp_type, bindings, state.config)


def mirror_lr(state: SceneState) -> SceneState:
    """Swap left and right: LC<->RC, FL<->FR and LH<->RH."""
    return _map_bindings(state, _MIRROR_LOCATIONS, _MIRROR_HANDS)


def rotate_180(state: SceneState) -> SceneState:
    """Turn the cloth half a revolution: LC<->FR, RC<->FL. Hands are unchanged."""
    return _map_bindings(state, _ROTATE_LOCATIONS, {})


def project(state: SceneState, cfg: SymmetryConfig) -> SceneState:
    if not (cfg.drop_hands or cfg.drop_layers):
        return state
    bindings = tuple(
        GraspBinding(b.location, None if cfg.drop_layers else b.layer, None if cfg.drop_hands else b.hand)
        for b in state.bindings
    )
    return SceneState(state.grasp_type, bindings, state.config)


def orbit(state: SceneState, cfg: SymmetryConfig) -> list[SceneState]:
    members = [state]
    if cfg.mirror_lr:
        members += [mirror_lr(s) for s in members]
    if cfg.rotate_180:
        members += [rotate_180(s) for s in members]
    return members


def canonicalize(state: SceneState, cfg: SymmetryConfig) -> SceneState:
    return min(orbit(project(state, cfg), cfg), key=SceneState.render)


@dataclass(frozen=True)
class Merge:
    """Record of a segment absorbed into its predecessor."""

    segment_index: int  # 0-based index in the input trial
    t_start: float
    state: SceneState
    dropped_action: str


def canonicalize_trial(trial: Trial, cfg: SymmetryConfig) -> tuple[Trial, list[Merge]]:
    """Canonicalize every segment state and merge adjacent segments that coincide.

    The merged segment keeps the earlier start time and the later segment's
    outgoing action.
    """
    segments: list[Segment] = []
    merges: list[Merge] = []
    for i, seg in enumerate(trial.segments):
        state = canonicalize(seg.state, cfg)
        if segments and segments[-1].state == state:
            prev = segments[-1]
            merges.append(Merge(i, seg.t_start, state, prev.action or ""))
            segments[-1] = Segment(prev.t_start, state, seg.action)
        else:
            segments.append(Segment(seg.t_start, state, seg.action))
    if not merges and all(a.state == b.state for a, b in zip(segments, trial.segments)):
        return trial, merges
    return replace(trial, segments=tuple(segments)), merges
