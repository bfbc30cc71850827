import math
import random
import warnings
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clomgraph.graph import (
    BuildOptions,
    ClomWarning,
    build_graph,
    complexity_metrics,
    filter_graph,
    rank_strategies,
    subgraph_by_label,
)
from clomgraph.model import CloMGraph, EdgeRecord, ManipulationPrimitive, Occurrence, Segment, Trial
from clomgraph.stateparse import parse_state
from clomgraph.symmetry import SymmetryConfig, canonicalize

from conftest import random_state, random_trial
from oracles import oracle_ranking, tally_triples

IDENTITY = BuildOptions(SymmetryConfig.identity())
S = {
    "A": "Pie | - | Crumpled",
    "B": "PP | I | Crumpled",
    "C": "PP | LC | Crumpled",
    "D": "2PP | LC+RC | Crumpled",
    "E": "2PP | LC+RC | Flat",
    "F": "Pie | - | Flat",
    "G": "2PP+Pie | LC+RC | Flat",
    "H": "Pie | - | Folded",
}
ST = {k: parse_state(v) for k, v in S.items()}


def make_graph(rows, trial_count=10):
    """rows: (origin key, destination key, label, multiplicity)."""
    edges = {}
    for n, (a, b, label, m) in enumerate(rows):
        occ = tuple(Occurrence("t", f"s{n}", 1, i) for i in range(m))
        edges[ManipulationPrimitive(ST[a], ST[b], label)] = EdgeRecord(occ)
    return CloMGraph.from_edges(edges, trial_count)


def trial_from(keys_and_labels, subject="s01", index=1):
    keys = keys_and_labels[::2]
    labels = keys_and_labels[1::2]
    segs = tuple(
        Segment(float(i), ST[k], labels[i] if i < len(labels) else None) for i, k in enumerate(keys)
    )
    return Trial(subject, "napkin", index, segs)


# --- build -------------------------------------------------------------------


def test_identical_tuples_accumulate():
    t1 = trial_from(["A", "Grasp", "B"], "s01")
    t2 = trial_from(["A", "Grasp", "B"], "s02")
    g = build_graph([t1, t2], IDENTITY)
    assert len(g.edges) == 1
    (rec,) = g.edges.values()
    assert rec.multiplicity == 2
    assert [o.subject_id for o in rec.occurrences] == ["s01", "s02"]


def test_empty_corpus_warns():
    with pytest.warns(ClomWarning):
        g = build_graph([])
    assert not g.nodes and not g.edges and g.trial_count == 0


def test_parallel_edges_kept_distinct():
    t = trial_from(["A", "Grasp", "B", "Drop", "A", "Pinch", "B"])
    g = build_graph([t], IDENTITY)
    assert len(g.edges) == 3
    assert {p.motion_label for p in g.edges} == {"Grasp", "Drop", "Pinch"}


def test_task_filter():
    t1 = trial_from(["A", "Grasp", "B"])
    t2 = Trial("s01", "tablecloth", 1, t1.segments)
    g = build_graph([t1, t2], BuildOptions(SymmetryConfig.identity(), ("tablecloth",)))
    assert g.trial_count == 1
    assert {o.task_id for r in g.edges.values() for o in r.occurrences} == {"tablecloth"}


def test_canonicalization_before_counting():
    t1 = Trial("s01", "n", 1, (Segment(0, parse_state("Pie | - | Crumpled"), "Grasp"),
                               Segment(1, parse_state("PP | RC@RH | Crumpled"), None)))
    t2 = Trial("s02", "n", 1, (Segment(0, parse_state("Pie | - | Crumpled"), "Grasp"),
                               Segment(1, parse_state("PP | LC@LH | Crumpled"), None)))
    g = build_graph([t1, t2])
    assert len(g.edges) == 1 and g.total_multiplicity == 2
    assert build_graph([t1, t2], IDENTITY).total_multiplicity == 2
    assert len(build_graph([t1, t2], IDENTITY).edges) == 2


def _random_corpus(rng, n_states=12, max_trials=50):
    pool = [random_state(rng) for _ in range(n_states)]
    labels = ["Grasp", "Trace edge", "Lift", "Place flat on table"]
    return [random_trial(rng, pool, labels, f"s{i:02d}", 1) for i in range(rng.randint(1, max_trials))]


@pytest.mark.parametrize("seed", range(10))
def test_build_matches_flat_tally(seed):
    rng = random.Random(seed)
    trials = _random_corpus(rng)
    for cfg in (SymmetryConfig.identity(), SymmetryConfig()):
        g = build_graph(trials, BuildOptions(cfg))
        nodes, counts = tally_triples(trials, lambda s: canonicalize(s, cfg))
        got = {(p.origin.render(), p.destination.render(), p.motion_label.lower()): r.multiplicity
               for p, r in g.edges.items()}
        assert got == dict(counts)
        assert {s.render() for s in g.nodes} == nodes


@settings(max_examples=30, deadline=None)
@given(st.randoms(use_true_random=False))
def test_build_is_order_invariant_and_conserves_counts(rnd):
    trials = _random_corpus(random.Random(rnd.random()), max_trials=15)
    g = build_graph(trials)
    shuffled = list(trials)
    rnd.shuffle(shuffled)
    assert build_graph(shuffled) == g
    from clomgraph.symmetry import canonicalize_trial

    expected = sum(len(canonicalize_trial(t, SymmetryConfig())[0].segments) - 1 for t in trials)
    assert g.total_multiplicity == expected


# --- filter ------------------------------------------------------------------


def test_filter_keeps_strong_edge_only():
    g = make_graph([("A", "B", "x", 5), ("C", "D", "y", 2)])
    f = filter_graph(g, 3)
    assert [p.motion_label for p in f.edges] == ["X"]
    assert f.nodes == {ST["A"], ST["B"]}


def test_filter_identity_and_empty():
    g = make_graph([("A", "B", "x", 5), ("B", "C", "y", 2)])
    assert filter_graph(g, 1) == g
    empty = filter_graph(g, 6)
    assert not empty.edges and not empty.nodes


def test_filter_preserves_provenance():
    g = make_graph([("A", "B", "x", 5), ("B", "C", "y", 2)])
    f = filter_graph(g, 3)
    for p, r in f.edges.items():
        assert r == g.edges[p]


# --- subgraph ----------------------------------------------------------------

SIX = [
    ("A", "B", "Grasp interior", 4),
    ("A", "C", "Pick up corner", 2),
    ("B", "C", "Trace edge", 3),
    ("C", "D", "Trace edge", 5),
    ("D", "E", "Unfold in the air", 6),
    ("E", "F", "Place flat on table", 7),
    ("F", "A", "Crumple", 2),
]


def _edge_set(g):
    inv = {v: k for k, v in S.items()}
    return {(inv[p.origin.render()], inv[p.destination.render()]) for p in g.edges}


def test_trace_edge_closure_stops_at_absorbing():
    g = make_graph(SIX)
    sub = subgraph_by_label(g, "Trace edge", {ST["F"]})
    # hand closure: seeds B->C, C->D; from C: C->D; from D: D->E; from E: E->F; F absorbing.
    assert _edge_set(sub) == {("B", "C"), ("C", "D"), ("D", "E"), ("E", "F")}
    assert sub.nodes == {ST[k] for k in "BCDEF"}
    for p, r in sub.edges.items():
        assert r.multiplicity == g.edges[p].multiplicity


def test_trace_edge_closure_without_absorbing_reaches_everything():
    sub = subgraph_by_label(make_graph(SIX), "trace EDGE", set())
    assert _edge_set(sub) == {(a, b) for a, b, _, _ in SIX}


def test_absorbing_everything_keeps_only_labeled_edges():
    g = make_graph(SIX)
    sub = subgraph_by_label(g, "Trace edge", set(g.nodes))
    assert _edge_set(sub) == {("B", "C"), ("C", "D")}


def test_missing_label_gives_empty_graph():
    with pytest.warns(ClomWarning):
        sub = subgraph_by_label(make_graph(SIX), "Shake", set())
    assert not sub.edges and not sub.nodes


# --- ranking -----------------------------------------------------------------


def test_chain_single_path():
    g = make_graph([("A", "B", "x", 2), ("B", "C", "y", 2)])
    (path,) = rank_strategies(g, ST["A"], ST["C"], 5)
    assert path.likelihood == 1 and path.length == 2 and path.bottleneck_support == 2


def test_diamond_brute_force():
    g = make_graph([("A", "B", "p", 3), ("A", "C", "q", 1), ("B", "D", "r", 3), ("C", "D", "s", 1)])
    # enumeration: A-B-D = 3/4 * 3/3, A-C-D = 1/4 * 1/1
    paths = rank_strategies(g, ST["A"], ST["D"], 5)
    assert [p.likelihood for p in paths] == [Fraction(3, 4), Fraction(1, 4)]
    assert [s.render() for s in paths[0].states] == [S["A"], S["B"], S["D"]]


def test_goal_equal_start_is_empty():
    g = make_graph([("A", "B", "x", 2), ("B", "A", "y", 2)])
    assert rank_strategies(g, ST["A"], ST["A"], 3) == []


def test_unreachable_is_empty():
    g = make_graph([("A", "B", "x", 2), ("C", "D", "y", 2)])
    assert rank_strategies(g, ST["A"], ST["D"], 3) == []


def test_ties_prefer_shorter_then_labels():
    g = make_graph([
        ("A", "D", "z", 1), ("A", "B", "y", 1), ("A", "C", "a", 2),
        ("B", "D", "x", 1), ("C", "E", "x", 1), ("C", "D", "b", 1),
    ])
    paths = rank_strategies(g, ST["A"], ST["D"], 10)
    # A-C-D = 1/2*1/2 = 1/4 ; A-D = 1/4 ; A-B-D = 1/4
    assert [p.likelihood for p in paths] == [Fraction(1, 4)] * 3
    assert [p.length for p in paths] == [1, 2, 2]
    assert [p.edges[0].motion_label for p in paths] == ["Z", "A", "Y"]


def test_search_cap_warns():
    g = make_graph([("A", "B", "x", 1), ("B", "C", "y", 1), ("C", "D", "z", 1)])
    with pytest.warns(ClomWarning):
        assert rank_strategies(g, ST["A"], ST["D"], 1, max_explored=1) == []


def random_small_graph(rng, n_nodes=None):
    keys = list(S)[: n_nodes or rng.randint(2, 8)]
    rows = []
    labels = ["a", "b", "c"]
    for a in keys:
        for b in keys:
            if a != b and rng.random() < 0.35:
                for label in rng.sample(labels, rng.randint(1, 2)):
                    rows.append((a, b, label, rng.randint(1, 6)))
    return make_graph(rows) if rows else make_graph([("A", "B", "a", 1)])


@pytest.mark.parametrize("seed", range(40))
def test_ranking_matches_enumeration(seed):
    rng = random.Random(seed)
    g = random_small_graph(rng)
    nodes = g.sorted_nodes()
    for start in nodes:
        for goal in nodes:
            expected = oracle_ranking(g, start, goal)
            got = rank_strategies(g, start, goal, k=10**6)
            assert [(p.likelihood, [(e.origin, e.destination, e.motion_label) for e in p.edges]) for p in got] == expected


def test_out_probabilities_sum_to_one():
    g = random_small_graph(random.Random(3), 8)
    for s in g.nodes:
        outs = g.out_edges(s)
        if outs:
            assert sum(g.transition_probability(p) for p in outs) == 1


# --- metrics -----------------------------------------------------------------


def test_metrics_single_edge():
    m = complexity_metrics(make_graph([("A", "B", "x", 3)], trial_count=3))
    assert m.node_count == 2 and m.edge_count == 1 and m.sink_count == 1
    assert m.mean_out_entropy_bits == 0
    assert m.mean_out_degree == 1
    assert m.edges_per_trial == 1


def test_metrics_uniform_branch_is_one_bit():
    m = complexity_metrics(make_graph([("A", "B", "x", 2), ("A", "C", "y", 2)]))
    assert m.mean_out_entropy_bits == pytest.approx(1.0)
    assert m.mean_out_degree == 2


def test_metrics_weighted_entropy():
    g = make_graph([("A", "B", "x", 1), ("A", "C", "y", 3), ("B", "C", "z", 4)], trial_count=4)
    m = complexity_metrics(g)
    h_a = -(0.25 * math.log2(0.25) + 0.75 * math.log2(0.75))
    assert m.mean_out_entropy_bits == pytest.approx(4 * h_a / 8)
    assert m.mean_out_degree == pytest.approx(1.5)
    assert m.total_multiplicity == 8 and m.edges_per_trial == 2


def test_metrics_empty_graph():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        m = complexity_metrics(build_graph([]))
    assert m.node_count == 0 and m.edges_per_trial is None and m.mean_out_entropy_bits == 0


def test_folding_more_complex_than_tablecloth():
    # folding task (32 nodes, 65 edges) versus tablecloth task (17 nodes, 32 edges)
    rng = random.Random(0)

    def synthetic(n_nodes, n_edges):
        pool = [random_state(rng) for _ in range(n_nodes)]
        while len(set(pool)) < n_nodes:
            pool = [random_state(rng) for _ in range(n_nodes)]
        # a ring touches every node; chords top the edge count up
        pairs = [(pool[i], pool[(i + 1) % n_nodes]) for i in range(n_nodes)]
        pairs += [(pool[i % n_nodes], pool[(i * 7 + 3) % n_nodes]) for i in range(4 * n_edges)]
        edges = {}
        for i, (a, b) in enumerate(pairs):
            if len(edges) == n_edges:
                break
            if a != b:
                edges[ManipulationPrimitive(a, b, f"m{i % 3}")] = EdgeRecord((Occurrence("t", "s", 1, i),))
        return CloMGraph.from_edges(edges, 24)

    fold = complexity_metrics(synthetic(32, 65))
    cloth = complexity_metrics(synthetic(17, 32))
    assert (fold.node_count, fold.edge_count) == (32, 65)
    assert (cloth.node_count, cloth.edge_count) == (17, 32)
    assert fold.node_count > cloth.node_count and fold.edge_count > cloth.edge_count
