"""CloM graph construction and queries.

The graph keeps one edge per distinct (origin, destination, motion label)
triple, with the list of trial segments where it was observed.
"""

from __future__ import annotations

import heapq
import math
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .model import (
    CloMGraph,
    EdgeRecord,
    ManipulationPrimitive,
    Occurrence,
    SceneState,
    Trial,
    normalize_label,
)
from .symmetry import SymmetryConfig, canonicalize_trial

DEFAULT_MAX_EXPLORED = 10_000


class ClomWarning(UserWarning):
    """Non-fatal diagnostics (empty corpus, missing label, truncated search...)."""


@dataclass(frozen=True)
class BuildOptions:
    symmetry: SymmetryConfig = field(default_factory=SymmetryConfig)
    task_filter: Optional[tuple[str, ...]] = None


def _partial_counts(trial: Trial, cfg: SymmetryConfig) -> dict[ManipulationPrimitive, list[Occurrence]]:
    canon, _ = canonicalize_trial(trial, cfg)
    counts: dict[ManipulationPrimitive, list[Occurrence]] = defaultdict(list)
    for i, prim in enumerate(canon.primitives()):
        counts[prim].append(Occurrence(trial.task_id, trial.subject_id, trial.trial_index, i))
    return counts


def build_graph(trials: Iterable[Trial], opts: Optional[BuildOptions] = None) -> CloMGraph:
    opts = opts or BuildOptions()
    selected = [t for t in trials if opts.task_filter is None or t.task_id in opts.task_filter]
    if not selected:
        warnings.warn("empty corpus: no trials to build a graph from", ClomWarning, stacklevel=2)
    merged: dict[ManipulationPrimitive, list[Occurrence]] = defaultdict(list)
    for trial in selected:
        for prim, occ in _partial_counts(trial, opts.symmetry).items():
            merged[prim].extend(occ)
    edges = {prim: EdgeRecord(tuple(occ)) for prim, occ in merged.items()}
    return CloMGraph.from_edges(edges, len(selected), opts.symmetry.as_dict())


def _with_edges(g: CloMGraph, edges) -> CloMGraph:
    return CloMGraph.from_edges(edges, g.trial_count, g.symmetry)


def filter_graph(g: CloMGraph, min_support: int) -> CloMGraph:
    """Keep edges observed at least ``min_support`` times."""
    if min_support < 1:
        raise ValueError("min_support must be >= 1")
    return _with_edges(g, {p: r for p, r in g.edges.items() if r.multiplicity >= min_support})


def subgraph_by_label(g: CloMGraph, label: str, absorbing: Iterable[SceneState] = ()) -> CloMGraph:
    """Edges carrying ``label`` plus everything reachable after them.

    Expansion stops at states in ``absorbing``; edges into them are kept.
    """
    target = normalize_label(label)
    absorbing = frozenset(absorbing)
    seeds = [p for p in g.edges if p.motion_label == target]
    if not seeds:
        warnings.warn(f"label {target!r} not found in graph", ClomWarning, stacklevel=2)
        return _with_edges(g, {})

    out = defaultdict(list)
    for p in g.edges:
        out[p.origin].append(p)
    keep = set(seeds)
    stack = [p.destination for p in seeds if p.destination not in absorbing]
    visited = set(stack)
    while stack:
        node = stack.pop()
        for p in out[node]:
            keep.add(p)
            nxt = p.destination
            if nxt not in absorbing and nxt not in visited:
                visited.add(nxt)
                stack.append(nxt)
    return _with_edges(g, {p: g.edges[p] for p in keep})


@dataclass(frozen=True)
class StrategyPath:
    edges: tuple[ManipulationPrimitive, ...]
    likelihood: Fraction
    bottleneck_support: int

    @property
    def length(self) -> int:
        return len(self.edges)

    @property
    def states(self) -> list[SceneState]:
        return [self.edges[0].origin] + [e.destination for e in self.edges]


def path_tiebreak(edges: Sequence[ManipulationPrimitive]) -> tuple:
    """Lexicographic key on edge labels, then on the visited states' text."""
    return (
        tuple(e.motion_label for e in edges),
        tuple(e.destination.render() for e in edges),
    )


def rank_strategies(
    g: CloMGraph,
    start: SceneState,
    goal: SceneState,
    k: int,
    max_explored: int = DEFAULT_MAX_EXPLORED,
) -> list[StrategyPath]:
    """Top-``k`` simple paths from ``start`` to ``goal`` by empirical likelihood.

    Best-first search: extending a path never raises its likelihood and always
    increases its length, so complete paths are popped in final rank order
    (likelihood desc, length asc, then :func:`path_tiebreak`).
    """
    if k < 1 or start == goal or start not in g.nodes or goal not in g.nodes:
        return []
    out = defaultdict(list)
    for p in g.edges:
        out[p.origin].append(p)
    out_mult = {s: sum(g.multiplicity(p) for p in ps) for s, ps in out.items()}

    heap = [(-Fraction(1), 0, path_tiebreak(()), ())]
    results: list[StrategyPath] = []
    explored = 0
    while heap and len(results) < k:
        neg_lik, length, _, edges = heapq.heappop(heap)
        node = edges[-1].destination if edges else start
        if node == goal:
            results.append(StrategyPath(edges, -neg_lik, min(g.multiplicity(e) for e in edges)))
            continue
        explored += 1
        if explored > max_explored:
            warnings.warn(
                f"strategy search stopped after {max_explored} partial paths; ranking may be incomplete",
                ClomWarning,
                stacklevel=2,
            )
            break
        visited = {start} | {e.destination for e in edges}
        for p in out[node]:
            if p.destination in visited:
                continue
            lik = -neg_lik * Fraction(g.multiplicity(p), out_mult[node])
            new = edges + (p,)
            heapq.heappush(heap, (-lik, length + 1, path_tiebreak(new), new))
    return results


@dataclass(frozen=True)
class ComplexityMetrics:
    node_count: int
    edge_count: int
    total_multiplicity: int
    sink_count: int
    mean_out_degree: float
    mean_out_entropy_bits: float
    edges_per_trial: Optional[float]


def out_entropy_bits(multiplicities: Sequence[int]) -> float:
    total = sum(multiplicities)
    return -sum((m / total) * math.log2(m / total) for m in multiplicities if m)


def complexity_metrics(g: CloMGraph) -> ComplexityMetrics:
    """Size and branching measures of a graph.

    Averages run over non-sink nodes; entropy is weighted by each node's
    outgoing multiplicity.  ``edges_per_trial`` is the mean number of
    observed primitives per trial.
    """
    out = defaultdict(list)
    for p, rec in g.edges.items():
        out[p.origin].append(rec.multiplicity)
    non_sinks = [s for s in g.nodes if out[s]]
    total = g.total_multiplicity
    mean_degree = sum(len(out[s]) for s in non_sinks) / len(non_sinks) if non_sinks else 0.0
    entropy = (
        sum(sum(out[s]) * out_entropy_bits(out[s]) for s in non_sinks) / total if total else 0.0
    )
    return ComplexityMetrics(
        node_count=len(g.nodes),
        edge_count=len(g.edges),
        total_multiplicity=total,
        sink_count=len(g.nodes) - len(non_sinks),
        mean_out_degree=mean_degree,
        mean_out_entropy_bits=entropy,
        edges_per_trial=total / g.trial_count if g.trial_count else None,
    )
