"""Cloth manipulation graphs from labeled demonstrations."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    CloMGraph,
    ClothConfig,
    EdgeRecord,
    GraspBinding,
    GraspGeometry,
    GraspType,
    GraspUnit,
    KinematicStats,
    ManipulationPrimitive,
    Occurrence,
    SceneState,
    Segment,
    Shape,
    Trial,
    state_equal,
)
from .stateparse import parse_binding, parse_grasp_type, parse_state, serialize_state  # noqa: E402
from .annotation import parse_trial, primitives_of  # noqa: E402
from .symmetry import SymmetryConfig, canonicalize, canonicalize_trial, mirror_lr  # noqa: E402
from .graph import (  # noqa: E402
    BuildOptions,
    build_graph,
    complexity_metrics,
    filter_graph,
    rank_strategies,
    subgraph_by_label,
)
from .export import export_dot, export_json, import_json  # noqa: E402
