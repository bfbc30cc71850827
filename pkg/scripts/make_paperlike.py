"""Regenerate the bundled ``data/paperlike`` corpus.

The ground truth mimics a napkin-folding task: a crumpled-on-table phase,
a hanging two-corner hub, then repeated folds on the table.  Running this
script again with the recorded seed reproduces the files byte for byte.

    python scripts/make_paperlike.py [--out data/paperlike]
"""

import argparse
from pathlib import Path

from clomgraph.corpusgen import GroundTruth, generate_corpus, ground_truth_to_json
from clomgraph.model import ManipulationPrimitive
from clomgraph.stateparse import parse_state
from clomgraph.symmetry import SymmetryConfig, canonicalize

SEED = 20210524
N_TRIALS = 24

STATES = {
    "C0": "Pie | - | Crumpled",
    "C1": "PP+Pie | LC | Crumpled",
    "C2": "PP+Pie | I | Crumpled",
    "H1": "PP | LC | Crumpled",
    "H1i": "PP | I | Crumpled",
    "H2": "2PP | LC+RC | Crumpled",
    "HUB": "2PP | LC+RC | Flat",
    "F0": "Pie | - | Flat",
    "T1": "2PP+Pie | LC+RC | Flat",
    "T2": "2PP+Pie | FL+FR | SemiFolded",
    "T3": "Pie | - | SemiFolded",
    "T4": "2PP+Pie | LC_1+RC_1 | SemiFolded",
    "T5": "2PP+Pie | FL+FR | Folded",
    "END": "Pie | - | Folded",
}

EDGES = [
    ("C0", "C1", "Grasp corner", 0.55),
    ("C0", "C2", "Grasp interior", 0.30),
    ("C0", "H1", "Pick up corner", 0.15),
    ("C1", "H1", "Lift", 1.0),
    ("C2", "H1i", "Lift", 1.0),
    ("H1i", "H1", "Trace edge", 0.7),
    ("H1i", "C0", "Drop", 0.3),
    ("H1", "H2", "Trace edge", 0.6),
    ("H1", "H2", "Grasp second corner", 0.3),
    ("H1", "HUB", "Trace edge", 0.1),
    ("H2", "HUB", "Unfold in the air", 1.0),
    ("HUB", "F0", "Place flat on table", 0.4),
    ("HUB", "T1", "Place on table", 0.6),
    ("F0", "T1", "Grasp corners", 1.0),
    ("T1", "T2", "Fold on table", 1.0),
    ("T2", "T3", "Release", 1.0),
    ("T3", "T4", "Grasp corners", 1.0),
    ("T4", "T2", "Fold on table", 0.5),
    ("T4", "T5", "Fold on table", 0.5),
    ("T5", "END", "Release", 1.0),
]


def ground_truth() -> GroundTruth:
    states = {k: parse_state(v) for k, v in STATES.items()}
    for key, s in states.items():
        assert canonicalize(s, SymmetryConfig()) == s, f"{key} is not canonical"
    edges = {ManipulationPrimitive(states[a], states[b], m): p for a, b, m, p in EDGES}
    return GroundTruth(edges, {states["C0"]: 1.0}, frozenset({states["END"]}))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data" / "paperlike"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    gt = ground_truth()
    (out / "ground_truth.json").write_text(ground_truth_to_json(gt), encoding="utf-8")
    for f in generate_corpus(gt, N_TRIALS, SEED):
        (out / f"{f.stem}.clom").write_text(f.annotation, encoding="utf-8")
        (out / f"{f.stem}.csv").write_text(f.motion, encoding="utf-8")
    (out / "SEED").write_text(f"{SEED}\n", encoding="utf-8")
    print(f"wrote {N_TRIALS} trials to {out} (seed {SEED})")


if __name__ == "__main__":
    main()
