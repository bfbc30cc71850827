"""Run the full analysis on the bundled ``data/paperlike`` corpus.

Prints graph sizes before and after support filtering, complexity metrics
and the top strategies from the crumpled start to the folded goal, and
writes DOT and JSON files next to ``--out``.

    python scripts/run_paperlike.py [--min-support 3] [--out build/paperlike]
"""

import argparse
import json
from pathlib import Path

from clomgraph.annotation import parse_trial
from clomgraph.export import default_thresholds, export_dot, export_json
from clomgraph.graph import BuildOptions, build_graph, complexity_metrics, filter_graph, rank_strategies
from clomgraph.motion import attach_stats, load_motion
from clomgraph.stateparse import parse_state
from clomgraph.symmetry import SymmetryConfig

ROOT = Path(__file__).resolve().parent.parent
START, GOAL = "Pie | - | Crumpled", "Pie | - | Folded"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--data", default=str(ROOT / "data" / "paperlike"))
    ap.add_argument("--out", default=str(ROOT / "build" / "paperlike"))
    ap.add_argument("--min-support", type=int, default=3)
    ap.add_argument("-k", type=int, default=3)
    args = ap.parse_args()

    data, out = Path(args.data), Path(args.out)
    stems = sorted(p.stem for p in data.glob("*.clom"))
    trials = [parse_trial((data / f"{s}.clom").read_text(encoding="utf-8")) for s in stems]
    tracks = [load_motion((data / f"{s}.csv").read_text(encoding="utf-8")) for s in stems]

    full = build_graph(trials, BuildOptions(SymmetryConfig()))
    kept = attach_stats(filter_graph(full, args.min_support), trials, tracks)
    red, orange = default_thresholds(full.trial_count)
    print(f"trials: {full.trial_count}  (red >= {red}, orange >= {orange})")
    print(f"full graph:      {len(full.nodes):3d} nodes {len(full.edges):3d} edges")
    print(f"min support {args.min_support}:  {len(kept.nodes):3d} nodes {len(kept.edges):3d} edges")
    print("metrics:", json.dumps(complexity_metrics(kept).__dict__))

    print(f"top {args.k} strategies {START!r} -> {GOAL!r}:")
    for i, path in enumerate(rank_strategies(kept, parse_state(START), parse_state(GOAL), args.k), 1):
        labels = " > ".join(e.motion_label for e in path.edges)
        print(f"  {i}. p={float(path.likelihood):.4f} ({path.likelihood})  {labels}")

    out.mkdir(parents=True, exist_ok=True)
    (out / "graph.json").write_text(export_json(kept), encoding="utf-8")
    (out / "graph.dot").write_text(export_dot(kept), encoding="utf-8")
    print(f"wrote {out / 'graph.json'} and {out / 'graph.dot'}")


if __name__ == "__main__":
    main()
