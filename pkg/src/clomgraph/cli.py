"""Command-line front end.

Graphs travel between subcommands as ``clom-graph/1`` JSON on stdin/stdout::

    clom build data/paperlike/*.clom --min-support 3 | clom stats --motion-dir data/paperlike | clom export-dot

Settings come from, in increasing precedence: built-in defaults, the config
file named by ``$CLOM_CONFIG`` or ``--config``, and command-line flags.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from pathlib import Path
from typing import Optional

from . import __version__
from .annotation import AnnotationError, lint_trial, parse_trial
from .corpusgen import CorpusError, NoAbsorbingState, generate_corpus, ground_truth_from_json
from .export import SchemaMismatch, export_dot, export_json, import_json
from .graph import BuildOptions, ClomWarning, build_graph, complexity_metrics, filter_graph, rank_strategies, subgraph_by_label
from .model import DEFAULT_LOCATIONS
from .motion import DEFAULT_HALF_WIDTH, MotionError, attach_stats, load_motion
from .stateparse import StateParseError, parse_state
from .symmetry import SymmetryConfig, canonicalize

EXIT_OK, EXIT_INVALID, EXIT_USAGE = 0, 1, 2
CONFIG_ENV = "CLOM_CONFIG"

BOOL_KEYS = ("drop_hands", "mirror_lr", "rotate_180", "drop_layers", "lenient")
INT_KEYS = ("smoothing_half_width", "red_threshold", "orange_threshold", "min_support")
LIST_KEYS = ("locations",)


class UsageError(Exception):
    pass


class InvalidInput(Exception):
    pass


def _parse_bool(key: str, value: str) -> bool:
    low = value.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"config key {key!r}: expected a boolean, got {value!r}")


def read_config(path: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"--config: cannot read {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.replace("-", "_")
        if key in BOOL_KEYS:
            out[key] = _parse_bool(key, value)
        elif key in INT_KEYS:
            try:
                out[key] = int(value)
            except ValueError:
                raise UsageError(f"{path}:{lineno}: {key} must be an integer") from None
        elif key in LIST_KEYS:
            out[key] = tuple(v.strip() for v in value.split(",") if v.strip())
        else:
            raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
    return out


def effective_settings(args) -> dict:
    settings = {}
    path = args.config or os.environ.get(CONFIG_ENV)
    if path:
        settings.update(read_config(path))
    for key in BOOL_KEYS + INT_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return settings


def _vocabulary(settings) -> tuple[str, ...]:
    extra = settings.get("locations", ())
    return DEFAULT_LOCATIONS + tuple(x for x in extra if x not in DEFAULT_LOCATIONS)


def _symmetry(settings) -> SymmetryConfig:
    base = SymmetryConfig()
    return SymmetryConfig(**{k: settings.get(k, getattr(base, k)) for k in base.as_dict()})


def _read_text(path: Optional[str]) -> str:
    if path in (None, "-"):
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc}") from None


def _load_graph(path: Optional[str], settings):
    text = _read_text(path)
    try:
        return import_json(text, vocabulary=None)
    except SchemaMismatch as exc:
        raise InvalidInput(str(exc)) from None
    except (ValueError, KeyError, TypeError) as exc:
        raise InvalidInput(f"bad graph JSON: {exc}") from None


def _load_trials(paths, settings):
    trials = []
    for path in paths:
        try:
            trials.append(parse_trial(_read_text(path), _vocabulary(settings), settings.get("lenient", False)))
        except AnnotationError as exc:
            raise InvalidInput(f"{path}:{exc.line}: {exc}") from None
    return trials


def _write(text: str):
    sys.stdout.write(text)


def cmd_validate(args, settings) -> int:
    status = EXIT_OK
    for path in args.files:
        try:
            trial = parse_trial(_read_text(path), _vocabulary(settings), settings.get("lenient", False))
        except AnnotationError as exc:
            print(f"{path}:{exc.line}: error: {exc}", file=sys.stderr)
            status = EXIT_INVALID
            continue
        except InvalidInput as exc:
            print(f"error: {exc}", file=sys.stderr)
            status = EXIT_INVALID
            continue
        for row, msg in lint_trial(trial):
            print(f"{path}: row {row}: warning: {msg}", file=sys.stderr)
        _write(f"{path}\tok\t{len(trial.segments) - 1} primitives\n")
    return status


def cmd_build(args, settings) -> int:
    trials = _load_trials(args.files, settings)
    opts = BuildOptions(_symmetry(settings), tuple(args.task) if args.task else None)
    g = build_graph(trials, opts)
    if settings.get("min_support"):
        g = filter_graph(g, settings["min_support"])
    _write(export_json(g))
    return EXIT_OK


def cmd_filter(args, settings) -> int:
    k = settings.get("min_support")
    if k is None or k < 1:
        raise UsageError("--min-support: required, must be >= 1")
    _write(export_json(filter_graph(_load_graph(args.graph, settings), k)))
    return EXIT_OK


def _state_arg(flag: str, text: str, settings, g):
    try:
        state = parse_state(text, _vocabulary(settings), lenient=True)
    except StateParseError as exc:
        raise UsageError(f"{flag}: {exc}") from None
    cfg = SymmetryConfig(**g.symmetry) if g.symmetry else SymmetryConfig.identity()
    return canonicalize(state, cfg)


def cmd_subgraph(args, settings) -> int:
    g = _load_graph(args.graph, settings)
    absorbing = [_state_arg("--absorbing", s, settings, g) for s in args.absorbing]
    _write(export_json(subgraph_by_label(g, args.label, absorbing)))
    return EXIT_OK


def cmd_stats(args, settings) -> int:
    g = _load_graph(args.graph, settings)
    motion_dir = Path(args.motion_dir)
    if not motion_dir.is_dir():
        raise UsageError(f"--motion-dir: {motion_dir} is not a directory")
    files = args.annotations or sorted(str(p) for p in motion_dir.glob("*.clom"))
    trials = _load_trials(files, settings)
    tracks = []
    for path in files:
        csv_path = motion_dir / (Path(path).stem + ".csv")
        try:
            tracks.append(load_motion(_read_text(str(csv_path))))
        except MotionError as exc:
            raise InvalidInput(f"{csv_path}: {exc}") from None
    w = settings.get("smoothing_half_width", DEFAULT_HALF_WIDTH)
    _write(export_json(attach_stats(g, trials, tracks, half_width=w)))
    return EXIT_OK


def cmd_plan(args, settings) -> int:
    g = _load_graph(args.graph, settings)
    start = _state_arg("--from", args.start, settings, g)
    goal = _state_arg("--to", args.goal, settings, g)
    if args.k < 1:
        raise UsageError("-k: must be >= 1")
    paths = rank_strategies(g, start, goal, args.k, max_explored=args.max_explored)
    out = [
        {
            "rank": i,
            "likelihood": f"{float(p.likelihood):.6f}",
            "likelihood_exact": str(p.likelihood),
            "length": p.length,
            "bottleneck_support": p.bottleneck_support,
            "states": [s.render() for s in p.states],
            "labels": [e.motion_label for e in p.edges],
        }
        for i, p in enumerate(paths, start=1)
    ]
    _write(json.dumps(out, indent=2) + "\n")
    return EXIT_OK


def cmd_metrics(args, settings) -> int:
    m = complexity_metrics(_load_graph(args.graph, settings))
    _write(json.dumps(m.__dict__, indent=2) + "\n")
    return EXIT_OK


def cmd_export_dot(args, settings) -> int:
    g = _load_graph(args.graph, settings)
    _write(export_dot(g, settings.get("red_threshold"), settings.get("orange_threshold")))
    return EXIT_OK


def cmd_gen_corpus(args, settings) -> int:
    try:
        gt = ground_truth_from_json(_read_text(args.ground_truth), vocabulary=None)
    except (ValueError, KeyError) as exc:
        raise InvalidInput(f"{args.ground_truth}: {exc}") from None
    try:
        files = generate_corpus(gt, args.n_trials, args.seed)
    except (NoAbsorbingState, CorpusError) as exc:
        raise InvalidInput(str(exc)) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for f in files:
        (out / f"{f.stem}.clom").write_text(f.annotation, encoding="utf-8")
        (out / f"{f.stem}.csv").write_text(f.motion, encoding="utf-8")
        _write(f"{out / f.stem}.clom\n")
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help=f"key = value settings file (default: ${CONFIG_ENV})")
    p.add_argument("--lenient", action=argparse.BooleanOptionalAction, default=None,
                   help="accept loose inline forms such as (2PP, LC+RC, Flat)")


def _add_symmetry(p: argparse.ArgumentParser):
    for key, text in (
        ("drop_hands", "ignore which hand holds a location"),
        ("mirror_lr", "identify left/right mirror images"),
        ("rotate_180", "identify near/far half-turn rotations"),
        ("drop_layers", "ignore layer subscripts"),
    ):
        p.add_argument("--" + key.replace("_", "-"), dest=key, action=argparse.BooleanOptionalAction,
                       default=None, help=text)


def _graph_arg(p: argparse.ArgumentParser):
    p.add_argument("graph", nargs="?", default="-", help="graph JSON (default: stdin)")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clom", description="Cloth manipulation graph tools")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and lint annotation files")
    _add_common(p)
    p.add_argument("files", nargs="+")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("build", help="annotation files -> graph JSON")
    _add_common(p)
    _add_symmetry(p)
    p.add_argument("files", nargs="+")
    p.add_argument("--task", action="append", help="only include this task id (repeatable)")
    p.add_argument("--min-support", dest="min_support", type=int)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("filter", help="drop edges with multiplicity below K")
    _add_common(p)
    p.add_argument("--min-support", dest="min_support", type=int)
    _graph_arg(p)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("subgraph", help="edges with a label and their forward closure")
    _add_common(p)
    p.add_argument("--label", required=True)
    p.add_argument("--absorbing", nargs="*", default=[], metavar="STATE")
    p.add_argument("--graph", dest="graph", default="-")
    p.set_defaults(func=cmd_subgraph)

    p = sub.add_parser("stats", help="attach per-edge kinematic statistics")
    _add_common(p)
    p.add_argument("--motion-dir", required=True)
    p.add_argument("--graph", default="-")
    p.add_argument("--half-width", dest="smoothing_half_width", type=int)
    p.add_argument("annotations", nargs="*", help="annotation files (default: motion dir *.clom)")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("plan", help="rank strategies between two states")
    _add_common(p)
    p.add_argument("--from", dest="start", required=True)
    p.add_argument("--to", dest="goal", required=True)
    p.add_argument("-k", type=int, default=5)
    p.add_argument("--max-explored", type=int, default=10_000)
    _graph_arg(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("metrics", help="complexity metrics as JSON")
    _add_common(p)
    _graph_arg(p)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("export-dot", help="graph JSON -> Graphviz DOT")
    _add_common(p)
    p.add_argument("--red", dest="red_threshold", type=int)
    p.add_argument("--orange", dest="orange_threshold", type=int)
    _graph_arg(p)
    p.set_defaults(func=cmd_export_dot)

    p = sub.add_parser("gen-corpus", help="sample a synthetic corpus from a ground-truth graph")
    _add_common(p)
    p.add_argument("--ground-truth", required=True)
    p.add_argument("--n-trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_corpus)
    return parser


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    with warnings.catch_warnings():
        warnings.simplefilter("always", ClomWarning)
        warnings.showwarning = _show_warning
        try:
            settings = effective_settings(args)
            return args.func(args, settings)
        except UsageError as exc:
            print(f"usage error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        except InvalidInput as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
