"""Hand trajectories: loading, clap synchronization, slicing and kinematics.

Differentiation pipeline (shared by clap detection and edge statistics):
positions are smoothed by a centered moving average of width ``2w+1``;
velocity is the central difference of the smoothed positions and
acceleration the second central difference, i.e. the central difference of
half-step velocities.  Samples without a full stencil are dropped, so a
slice of ``n`` samples yields ``n - 2w - 2`` velocity and acceleration
samples.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, replace
from typing import Mapping, Optional, Sequence

import numpy as np

from .graph import ClomWarning
from .model import CloMGraph, KinematicStats, Trial
from .symmetry import SymmetryConfig, canonicalize_trial

COLUMNS = ("time", "lh_x", "lh_y", "lh_z", "rh_x", "rh_y", "rh_z")
SPACING_TOLERANCE = 0.01
DEFAULT_HALF_WIDTH = 2
DEFAULT_CLAP_WINDOW = 20.0
AMBIGUOUS_RATIO = 0.95
AMBIGUOUS_SEPARATION = 0.5
PEAK_TIE_RTOL = 1e-9


class MotionError(ValueError):
    pass


class MissingColumn(MotionError):
    def __init__(self, column: str):
        self.column = column
        super().__init__(f"missing column {column!r}")


class NonUniformSampling(MotionError):
    pass


class TooFewSamples(MotionError):
    pass


class WindowOutOfRange(MotionError):
    pass


class SliceTooShort(MotionError):
    pass


class AmbiguousPeak(ClomWarning):
    pass


class SegmentOutsideTrack(ClomWarning):
    pass


@dataclass(frozen=True, eq=False)
class MotionTrack:
    times: np.ndarray
    lh: np.ndarray  # (n, 3) metres
    rh: np.ndarray
    rate_hz: float

    @property
    def start(self) -> float:
        return float(self.times[0])

    @property
    def end(self) -> float:
        return float(self.times[-1])

    def shifted(self, dt: float) -> "MotionTrack":
        return replace(self, times=self.times + dt)


def validate_track(times, lh, rh) -> MotionTrack:
    times = np.asarray(times, dtype=float)
    lh = np.asarray(lh, dtype=float).reshape(-1, 3)
    rh = np.asarray(rh, dtype=float).reshape(-1, 3)
    if len(times) < 2:
        raise TooFewSamples(f"need at least 2 samples, got {len(times)}")
    if not (len(times) == len(lh) == len(rh)):
        raise MotionError("time and position columns differ in length")
    if not (np.all(np.isfinite(times)) and np.all(np.isfinite(lh)) and np.all(np.isfinite(rh))):
        raise MotionError("non-finite value in motion data")
    dt = np.diff(times)
    nominal = (times[-1] - times[0]) / (len(times) - 1)
    if nominal <= 0 or np.any(dt <= 0):
        raise NonUniformSampling("sample times must strictly increase")
    deviation = float(np.max(np.abs(dt - nominal)) / nominal)
    if deviation > SPACING_TOLERANCE:
        raise NonUniformSampling(
            f"sample spacing deviates {deviation:.1%} from nominal {nominal:.6g} s (limit {SPACING_TOLERANCE:.0%})"
        )
    return MotionTrack(times, lh, rh, 1.0 / nominal)


def load_motion(table_text: str) -> MotionTrack:
    """Parse a comma-separated table with header ``time,lh_x,...,rh_z``."""
    reader = csv.reader(io.StringIO(table_text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise MissingColumn(COLUMNS[0]) from None
    for col in COLUMNS:
        if col not in header:
            raise MissingColumn(col)
    extra = [h for h in header if h not in COLUMNS]
    if extra:
        warnings.warn(f"ignoring extra motion columns {extra}", ClomWarning, stacklevel=2)
    idx = [header.index(c) for c in COLUMNS]
    values = []
    for lineno, row in enumerate(reader, start=2):
        if not row or not "".join(row).strip():
            continue
        try:
            values.append([float(row[i]) for i in idx])
        except (ValueError, IndexError):
            raise MotionError(f"line {lineno}: malformed row") from None
    if len(values) < 2:
        raise TooFewSamples(f"need at least 2 samples, got {len(values)}")
    data = np.array(values)
    return validate_track(data[:, 0], data[:, 1:4], data[:, 4:7])


def format_motion(track: MotionTrack, decimals: int = 4) -> str:
    lines = [",".join(COLUMNS)]
    fmt = f"{{:.{decimals}f}}"
    for t, l, r in zip(track.times, track.lh, track.rh):
        lines.append(",".join(fmt.format(v) for v in (t, *l, *r)))
    return "\n".join(lines) + "\n"


def smooth(positions: np.ndarray, half_width: int) -> np.ndarray:
    if half_width == 0:
        return positions
    # Per-window sums (not a running cumsum) so equal inputs give equal outputs bit for bit.
    windows = np.lib.stride_tricks.sliding_window_view(positions, 2 * half_width + 1, axis=0)
    return windows.mean(axis=-1)


def derivatives(positions: np.ndarray, dt: float, half_width: int = DEFAULT_HALF_WIDTH):
    """Velocity and acceleration vectors; both aligned to sample index ``w+1`` onwards."""
    s = smooth(positions, half_width)
    vel = (s[2:] - s[:-2]) / (2 * dt)
    acc = (s[2:] - 2 * s[1:-1] + s[:-2]) / (dt * dt)
    return vel, acc


def summed_acceleration(track: MotionTrack, half_width: int = DEFAULT_HALF_WIDTH):
    """Times and |a_lh| + |a_rh| over samples with a full stencil."""
    dt = 1.0 / track.rate_hz
    _, acc_l = derivatives(track.lh, dt, half_width)
    _, acc_r = derivatives(track.rh, dt, half_width)
    mag = np.linalg.norm(acc_l, axis=1) + np.linalg.norm(acc_r, axis=1)
    off = half_width + 1
    return track.times[off:off + len(mag)], mag


@dataclass(frozen=True)
class SyncResult:
    """``video_time = motion_time - offset + clap_video_time``."""

    offset: float
    peak_value: float
    peak_time: float
    ambiguous: bool = False

    def to_motion_time(self, video_time: float, clap_video_time: float) -> float:
        return video_time - clap_video_time + self.offset

    def to_video_time(self, motion_time: float, clap_video_time: float) -> float:
        return motion_time - self.offset + clap_video_time


def detect_clap(
    track: MotionTrack,
    window: Optional[tuple[float, float]] = None,
    half_width: int = DEFAULT_HALF_WIDTH,
) -> SyncResult:
    """Locate the clap as the global peak of summed hand acceleration.

    Ties go to the earliest sample.  A rival local peak within 5% of the
    maximum and more than 0.5 s away triggers a :class:`ClomWarning`.
    """
    if window is None:
        window = (track.start, min(track.start + DEFAULT_CLAP_WINDOW, track.end))
    lo, hi = window
    if not (track.start <= lo < hi <= track.end):
        raise WindowOutOfRange(f"window {window} outside track span [{track.start}, {track.end}]")
    times, mag = summed_acceleration(track, half_width)
    mask = (times >= lo) & (times <= hi)
    if not mask.any():
        raise WindowOutOfRange(f"window {window} holds no differentiable samples")
    t_win, a_win = times[mask], mag[mask]
    # Peaks equal up to float noise count as ties; the earliest one wins.
    i = int(np.flatnonzero(a_win >= a_win.max() * (1 - PEAK_TIE_RTOL))[0])
    peak_t, peak_a = float(t_win[i]), float(a_win[i])

    padded = np.concatenate([[-np.inf], a_win, [-np.inf]])
    local_max = (padded[1:-1] >= padded[:-2]) & (padded[1:-1] >= padded[2:])
    rivals = local_max & (np.abs(t_win - peak_t) > AMBIGUOUS_SEPARATION)
    ambiguous = bool(rivals.any() and a_win[rivals].max() >= AMBIGUOUS_RATIO * peak_a)
    if ambiguous:
        warnings.warn(
            f"ambiguous clap peak: rival within {1 - AMBIGUOUS_RATIO:.0%} of max; chose t={peak_t:.3f}",
            AmbiguousPeak,
            stacklevel=2,
        )
    return SyncResult(offset=peak_t, peak_value=peak_a, peak_time=peak_t, ambiguous=ambiguous)


@dataclass(frozen=True, eq=False)
class MotionSlice:
    segment_index: int
    times: np.ndarray
    lh: np.ndarray
    rh: np.ndarray
    rate_hz: float

    def __len__(self) -> int:
        return len(self.times)


def segment_motion(track: MotionTrack, trial: Trial, sync: SyncResult) -> list[MotionSlice]:
    """Cut the track into half-open slices, one per trial segment."""
    if trial.clap_video_time is None:
        raise MotionError(f"trial {trial.key} has no clap time")
    tol = 1e-6 / track.rate_hz
    starts = [sync.to_motion_time(s.t_start, trial.clap_video_time) for s in trial.segments]
    bounds = starts + [track.end + 1.0 / track.rate_hz]
    slices = []
    for i in range(len(starts)):
        lo, hi = bounds[i], bounds[i + 1]
        if lo < track.start - tol or (i < len(starts) - 1 and hi > track.end + tol) or lo > track.end:
            warnings.warn(
                f"segment {i} of trial {trial.key} maps to [{lo:.3f}, {hi:.3f}) outside the track; truncated",
                SegmentOutsideTrack,
                stacklevel=2,
            )
        a = int(np.searchsorted(track.times, lo - tol, side="left"))
        b = int(np.searchsorted(track.times, hi - tol, side="left"))
        slices.append(MotionSlice(i, track.times[a:b], track.lh[a:b], track.rh[a:b], track.rate_hz))
    return slices


def _stats(positions: np.ndarray, dt: float, half_width: int) -> KinematicStats:
    vel, acc = derivatives(positions, dt, half_width)
    v = np.linalg.norm(vel, axis=1)
    a = np.linalg.norm(acc, axis=1)
    return KinematicStats(float(v.max()), float(v.mean()), float(a.max()), float(a.mean()))


def kinematics(sl: MotionSlice, half_width: int = DEFAULT_HALF_WIDTH) -> dict[str, KinematicStats]:
    """Per-hand max/mean speed and acceleration magnitude over a slice."""
    need = 2 * half_width + 3
    if len(sl) < need:
        raise SliceTooShort(f"slice has {len(sl)} samples, need {need}")
    dt = 1.0 / sl.rate_hz
    return {"LH": _stats(sl.lh, dt, half_width), "RH": _stats(sl.rh, dt, half_width)}


def mean_stats(per_occurrence: Sequence[Mapping[str, KinematicStats]]) -> dict[str, KinematicStats]:
    out = {}
    for hand in ("LH", "RH"):
        rows = [occ[hand] for occ in per_occurrence]
        out[hand] = KinematicStats(
            *(math.fsum(getattr(r, f) for r in rows) / len(rows) for f in ("v_max", "v_mean", "a_max", "a_mean"))
        )
    return out


def attach_stats(
    g: CloMGraph,
    trials: Sequence[Trial],
    tracks: Sequence[MotionTrack],
    half_width: int = DEFAULT_HALF_WIDTH,
    symmetry: Optional[SymmetryConfig] = None,
) -> CloMGraph:
    """Average per-occurrence kinematics onto each edge.

    ``tracks[i]`` belongs to ``trials[i]``.  Trials are canonicalized with
    ``symmetry`` (default: the configuration recorded in ``g``) so that the
    segment indices stored in the edge provenance line up.
    """
    if len(trials) != len(tracks):
        raise ValueError("each trial needs exactly one motion track")
    if symmetry is None:
        symmetry = SymmetryConfig(**g.symmetry) if g.symmetry else SymmetryConfig()

    slices: dict[tuple, tuple[Trial, list[MotionSlice]]] = {}
    for trial, track in zip(trials, tracks):
        if trial.clap_video_time is None:
            warnings.warn(f"trial {trial.key} has no clap time; skipped", ClomWarning, stacklevel=2)
            continue
        canon, _ = canonicalize_trial(trial, symmetry)
        sync = detect_clap(track, half_width=half_width)
        slices[trial.key] = (canon, segment_motion(track, canon, sync))

    edges = {}
    for prim, rec in g.edges.items():
        scored = []
        for occ in rec.occurrences:
            key = (occ.task_id, occ.subject_id, occ.trial_index)
            if key not in slices:
                continue
            canon, trial_slices = slices[key]
            if occ.segment_index >= len(trial_slices) or canon.segments[occ.segment_index].state != prim.origin:
                warnings.warn(f"occurrence {occ} does not match trial segments; skipped", ClomWarning, stacklevel=2)
                continue
            try:
                scored.append(kinematics(trial_slices[occ.segment_index], half_width))
            except SliceTooShort as exc:
                warnings.warn(f"{occ}: {exc}", ClomWarning, stacklevel=2)
        edges[prim] = replace(rec, stats=mean_stats(scored) if scored else None)
    return CloMGraph(g.nodes, edges, g.trial_count, g.symmetry)
