"""Graph serialization: Graphviz DOT for reading, JSON for pipelines."""

from __future__ import annotations

import hashlib
import json
import math
from typing import Optional

from .model import CloMGraph, EdgeRecord, KinematicStats, ManipulationPrimitive, Occurrence
from .stateparse import parse_state

SCHEMA = "clom-graph/1"
HANDS = ("LH", "RH")
_STAT_FIELDS = ("v_max", "v_mean", "a_max", "a_mean")
_PENWIDTH = {"red": "2.5", "orange": "1.8", "black": "1.0"}


class SchemaMismatch(ValueError):
    pass


def node_id(text: str) -> str:
    return "n" + hashlib.sha1(text.encode("utf-8")).hexdigest()[:10]


def default_thresholds(trial_count: int) -> tuple[int, int]:
    """(red, orange) = (ceil(n/2), ceil(n/4)), at least 1."""
    return max(1, math.ceil(trial_count / 2)), max(1, math.ceil(trial_count / 4))


def edge_color(count: int, red: int, orange: int) -> str:
    if count >= red:
        return "red"
    if count >= orange:
        return "orange"
    return "black"


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def format_stats(stats) -> str:
    return "; ".join(
        f"v {s.v_max:.2f}/{s.v_mean:.2f}, a {s.a_max:.2f}/{s.a_mean:.2f} ({hand})"
        for hand, s in ((h, stats[h]) for h in HANDS if h in stats)
    )


def export_dot(g: CloMGraph, red_threshold: Optional[int] = None, orange_threshold: Optional[int] = None) -> str:
    red, orange = default_thresholds(g.trial_count)
    red = red if red_threshold is None else red_threshold
    orange = orange if orange_threshold is None else orange_threshold
    lines = ["digraph clom {"]
    if g.nodes:
        lines += ["  rankdir=LR;", "  node [shape=box];"]
    for state in g.sorted_nodes():
        text = state.render()
        lines.append(f'  {node_id(text)} [label="{_dot_escape(text)}"];')
    for prim, rec in g.edges.items():
        label = _dot_escape(f"{prim.motion_label} ({rec.multiplicity})")
        if rec.stats:
            label += "\\n" + _dot_escape(format_stats(rec.stats))
        color = edge_color(rec.multiplicity, red, orange)
        lines.append(
            f"  {node_id(prim.origin.render())} -> {node_id(prim.destination.render())} "
            f'[label="{label}", color={color}, penwidth={_PENWIDTH[color]}];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def graph_to_dict(g: CloMGraph) -> dict:
    edges = []
    for prim, rec in g.edges.items():
        item = {
            "origin": prim.origin.render(),
            "destination": prim.destination.render(),
            "label": prim.motion_label,
            "multiplicity": rec.multiplicity,
            "occurrences": [
                {"task": o.task_id, "subject": o.subject_id, "trial": o.trial_index, "segment": o.segment_index}
                for o in rec.occurrences
            ],
        }
        if rec.stats is not None:
            item["stats"] = {h: {f: getattr(rec.stats[h], f) for f in _STAT_FIELDS} for h in HANDS if h in rec.stats}
        edges.append(item)
    return {
        "schema": SCHEMA,
        "trial_count": g.trial_count,
        "symmetry": dict(g.symmetry) if g.symmetry is not None else None,
        "nodes": [s.render() for s in g.sorted_nodes()],
        "edges": edges,
    }


def export_json(g: CloMGraph) -> str:
    return json.dumps(graph_to_dict(g), indent=2, ensure_ascii=False) + "\n"


def check_schema(data: dict) -> None:
    if not isinstance(data, dict) or data.get("schema") != SCHEMA:
        found = data.get("schema") if isinstance(data, dict) else type(data).__name__
        raise SchemaMismatch(f"expected schema {SCHEMA!r}, found {found!r}")


def graph_from_dict(data: dict, vocabulary=None) -> CloMGraph:
    check_schema(data)
    kw = {"vocabulary": vocabulary}
    edges = {}
    for item in data["edges"]:
        prim = ManipulationPrimitive(
            parse_state(item["origin"], **kw), parse_state(item["destination"], **kw), item["label"]
        )
        occ = tuple(
            Occurrence(o["task"], o["subject"], int(o["trial"]), int(o["segment"])) for o in item["occurrences"]
        )
        if "multiplicity" in item and item["multiplicity"] != len(occ):
            raise ValueError(f"edge {prim}: multiplicity {item['multiplicity']} != {len(occ)} occurrences")
        stats = None
        if "stats" in item:
            stats = {h: KinematicStats(**{f: float(v[f]) for f in _STAT_FIELDS}) for h, v in item["stats"].items()}
        edges[prim] = EdgeRecord(occ, stats)
    nodes = frozenset(parse_state(s, **kw) for s in data["nodes"])
    return CloMGraph(nodes, edges, int(data["trial_count"]), data.get("symmetry"))


def import_json(text: str, vocabulary=None) -> CloMGraph:
    return graph_from_dict(json.loads(text), vocabulary)
