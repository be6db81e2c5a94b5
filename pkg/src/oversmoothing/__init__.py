"""Over-smoothing as power iteration: linear-algebra primitives, graph
convolutions, smoothness metrics, a verification suite and a depth-sweep
experiment harness."""

from .convolutions import TOKENS, LayerParams, MethodSpec, RunState, apply_layer, init_params, method_spec
from .graph import Graph, StructureKind, StructureMatrix, karate_club, load_edge_list, structure_matrix
from .harness import DepthTrace, ExperimentConfig, read_csv, run_experiment, verify, write_csv
from .linalg import dense_eigenvalues, dominant_pair, kron, power_iteration, unvectorize, vectorize
from .metrics import (
    MetricRecord,
    Status,
    Verdict,
    classify_collapse,
    dirichlet_energy,
    normalized_dirichlet_energy,
    rank_one_distance,
)
from .plot import emit_plot

__version__ = "0.1.0"
