"""Synthetic demonstration corpora sampled from a ground-truth graph.

Each trial is a random walk from a start state to an absorbing state.  The
walk is written out as a ``.clom`` annotation and a matching motion table in
which both hands blend between random waypoints with raised-cosine profiles,
preceded by a sharp clap.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .annotation import format_trial
from .export import SCHEMA, SchemaMismatch
from .model import ManipulationPrimitive, SceneState, Segment, Trial
from .motion import format_motion, validate_track
from .stateparse import parse_state


class NoAbsorbingState(ValueError):
    pass


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class GroundTruth:
    """Transition weights per edge (normalized per origin), start distribution, goals."""

    edges: Mapping[ManipulationPrimitive, float]
    start: Mapping[SceneState, float]
    absorbing: frozenset

    def probabilities(self) -> dict[ManipulationPrimitive, float]:
        totals = defaultdict(float)
        for prim, w in self.edges.items():
            totals[prim.origin] += w
        return {p: w / totals[p.origin] for p, w in self.edges.items()}


def ground_truth_from_json(text: str, vocabulary=None) -> GroundTruth:
    data = json.loads(text)
    if not isinstance(data, dict) or data.get("schema") != SCHEMA:
        raise SchemaMismatch(f"expected schema {SCHEMA!r}")
    edges = {}
    for item in data["edges"]:
        prim = ManipulationPrimitive(
            parse_state(item["origin"], vocabulary), parse_state(item["destination"], vocabulary), item["label"]
        )
        edges[prim] = float(item["prob"])
    start = {parse_state(s["state"], vocabulary): float(s["prob"]) for s in data.get("start", [])}
    absorbing = frozenset(parse_state(s, vocabulary) for s in data.get("absorbing", []))
    return GroundTruth(edges, start, absorbing)


def ground_truth_to_json(gt: GroundTruth) -> str:
    nodes = {s for p in gt.edges for s in (p.origin, p.destination)} | set(gt.start) | set(gt.absorbing)
    data = {
        "schema": SCHEMA,
        "trial_count": 0,
        "symmetry": None,
        "nodes": [s.render() for s in sorted(nodes)],
        "edges": [
            {"origin": p.origin.render(), "destination": p.destination.render(), "label": p.motion_label,
             "occurrences": [], "prob": w}
            for p, w in sorted(gt.edges.items())
        ],
        "start": [{"state": s.render(), "prob": w} for s, w in sorted(gt.start.items())],
        "absorbing": [s.render() for s in sorted(gt.absorbing)],
    }
    return json.dumps(data, indent=2) + "\n"


@dataclass(frozen=True)
class CorpusConfig:
    task_id: str = "napkin"
    n_subjects: int = 8
    rate_hz: float = 50.0
    segment_duration: tuple[float, float] = (1.0, 3.0)
    clap_video_time: tuple[float, float] = (1.0, 3.0)
    clap_motion_time: tuple[float, float] = (0.8, 2.0)
    clap_lead: tuple[float, float] = (1.0, 2.0)
    tail: tuple[float, float] = (1.0, 2.0)
    clap_amplitude: float = 0.08  # metres
    clap_width: float = 0.04  # seconds
    max_steps: int = 200
    cloth: str = "synthetic"


@dataclass(frozen=True)
class CorpusFile:
    stem: str
    annotation: str
    motion: str
    trial: Trial = field(compare=False, repr=False)


def _walk(gt: GroundTruth, probs, out, rng: np.random.Generator, max_steps: int):
    starts = sorted(gt.start)
    weights = np.array([gt.start[s] for s in starts], dtype=float)
    state = starts[rng.choice(len(starts), p=weights / weights.sum())]
    steps = []
    while state not in gt.absorbing:
        if len(steps) >= max_steps:
            raise CorpusError(f"walk exceeded {max_steps} steps without absorbing")
        options = out.get(state)
        if not options:
            raise CorpusError(f"dead end at non-absorbing state {state}")
        p = np.array([probs[o] for o in options])
        prim = options[rng.choice(len(options), p=p / p.sum())]
        steps.append(prim)
        state = prim.destination
    return steps


def _hand_path(times, seg_motion_starts, waypoints):
    """Raised-cosine blends from waypoint i to i+1 over segment i."""
    pos = np.repeat(waypoints[:1], len(times), axis=0)
    for i in range(len(seg_motion_starts) - 1):
        t0, t1 = seg_motion_starts[i], seg_motion_starts[i + 1]
        tau = np.clip((times - t0) / (t1 - t0), 0.0, 1.0)
        blend = 0.5 * (1 - np.cos(np.pi * tau))
        active = times >= t0
        pos[active] = waypoints[i] + blend[active, None] * (waypoints[i + 1] - waypoints[i])
    return pos


def _waypoints(rng: np.random.Generator, n: int, side: float) -> np.ndarray:
    x = side * rng.uniform(0.05, 0.35, n)
    y = rng.uniform(0.3, 0.6, n)
    z = rng.uniform(0.8, 1.3, n)
    return np.column_stack([x, y, z])


def generate_corpus(gt: GroundTruth, n_trials: int, seed: int, cfg: Optional[CorpusConfig] = None) -> list[CorpusFile]:
    cfg = cfg or CorpusConfig()
    if not gt.absorbing:
        raise NoAbsorbingState("ground truth has no absorbing goal state")
    if not gt.start:
        raise CorpusError("ground truth has no start distribution")
    rng = np.random.default_rng(seed)
    probs = gt.probabilities()
    out = defaultdict(list)
    for prim in sorted(gt.edges):
        out[prim.origin].append(prim)

    files = []
    for i in range(n_trials):
        subject = f"s{i % cfg.n_subjects + 1:02d}"
        index = i // cfg.n_subjects + 1
        steps = _walk(gt, probs, out, rng, cfg.max_steps)
        states = [steps[0].origin] + [p.destination for p in steps] if steps else None
        if states is None:
            raise CorpusError("walk started in an absorbing state; trials need at least one primitive")

        clap_video = round(rng.uniform(*cfg.clap_video_time), 3)
        clap_motion = rng.uniform(*cfg.clap_motion_time)
        t = clap_video + rng.uniform(*cfg.clap_lead)
        starts = []
        for _ in states:
            starts.append(round(t, 3))
            t += rng.uniform(*cfg.segment_duration)
        end_video = starts[-1] + rng.uniform(*cfg.tail)
        actions = [p.motion_label for p in steps] + [None]
        trial = Trial(
            subject_id=subject,
            task_id=cfg.task_id,
            trial_index=index,
            segments=tuple(Segment(ts, s, a) for ts, s, a in zip(starts, states, actions)),
            clap_video_time=clap_video,
            metadata={"cloth": cfg.cloth},
        )

        to_motion = lambda v: v - clap_video + clap_motion  # noqa: E731
        n_samples = int(np.floor(to_motion(end_video) * cfg.rate_hz)) + 1
        times = np.arange(n_samples) / cfg.rate_hz
        seg_motion = [to_motion(s) for s in starts] + [to_motion(end_video)]
        # The last waypoint is where the hands rest during the final segment.
        lh = _hand_path(times, seg_motion[:-1], _waypoints(rng, len(states), -1.0))
        rh = _hand_path(times, seg_motion[:-1], _waypoints(rng, len(states), 1.0))
        bump = cfg.clap_amplitude * np.exp(-(((times - clap_motion) / cfg.clap_width) ** 2))
        lh[:, 0] += bump
        rh[:, 0] -= bump
        track = validate_track(times, lh, rh)
        files.append(
            CorpusFile(f"{cfg.task_id}_{subject}_t{index}", format_trial(trial), format_motion(track), trial)
        )
    return files
