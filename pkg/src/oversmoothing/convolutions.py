"""Forward-only, randomly initialized graph convolutions.

Each method is a pair of functions: one draws the parameters of a single
layer, the other applies that layer.  All methods end in a ReLU unless the
``activation`` hyperparameter is switched off.  Parameters for
``(method, layer, seed)`` come from the random stream keyed
``"<token>:<seed>:<layer>"`` so runs are independent of execution order;
gcnii2x reads the gcnii stream, so the two differ only by the factor 2.

Formulas (X is the n x d state, X0 the initial state, k the 1-based layer):

    gcn            relu(A X W + b)
    gat            relu(P X W + b), P = softmax_j leaky(a_dst.h_i + a_src.h_j) over N(i)+i
    resgcn         relu(X + A X W + b)
    sage           relu(X W_root + mean_nbr(X) W_nbr + b)
    ggcn           relu((A_loop * C) X W + b), C = cosine similarity of rows of X W
    gcnii          relu(((1-alpha) A X + alpha X0)((1-beta) I + beta W)),
                   beta = log(theta/k + 1), or 1 when theta is None (default)
    gcnii2x        gcnii with W doubled
    pprgnn         relu(gamma_k A X W + X0 + b), gamma_k = 1/k
    gatedgnn       z = sig(A X W_z + X U_z + b_z); h = tanh(A X W_h + (z.X) U_h + b_h);
                   relu((1-z).X + z.h)
    gcn_pairnorm   relu(pairnorm(A X W + b))
    gcn_batchnorm  relu(batchnorm(A X W + b))
    gin2, gin3     MLP((1+eps) X + Adj X) with 2 or 3 Linear->ReLU blocks
    unimp          relu(P X W_v), P = softmax of (X W_q)(X W_k)^T / sqrt(d) on N(i)+i
    gps            relu(LN(h + MLP(h))), h = LN(A X W_mp + X) + LN(Attn(X) + X)

``A`` is the loop-free symmetrically normalized adjacency unless
``self_loops`` is set, ``A_loop`` always includes self-loops.

Weights are uniform(-sqrt(1/fan_in), sqrt(1/fan_in)) except for the GCNII
pair, which uses glorot-uniform.  Convolution biases start at zero; biases
inside MLPs and GRU gates are uniform(-sqrt(1/fan_in), sqrt(1/fan_in)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Mapping, Optional, Sequence

import numpy as np

from .errors import UnknownMethodError
from .graph import Graph, StructureKind, StructureMatrix, structure_matrix
from .linalg import frobenius_norm
from .metrics import Status
from .rng import SplitMix64, stream

OVERFLOW_LIMIT = 1e150
UNDERFLOW_LIMIT = 1e-150

TOKENS = (
    "gcn", "gat", "resgcn", "sage", "ggcn", "gcnii", "gcnii2x", "pprgnn",
    "gatedgnn", "gcn_pairnorm", "gcn_batchnorm", "gin2", "gin3", "unimp", "gps",
)

_COMMON = {"activation": True, "bias": True}

DEFAULT_HYPER: dict[str, dict[str, Any]] = {
    "gcn": {"self_loops": False},
    "gat": {"negative_slope": 0.2},
    "resgcn": {"self_loops": False},
    "sage": {},
    "ggcn": {},
    "gcnii": {"self_loops": False, "alpha": 0.1, "theta": None, "scale": 1.0},
    "gcnii2x": {"self_loops": False, "alpha": 0.1, "theta": None, "scale": 2.0},
    "pprgnn": {"self_loops": False},
    "gatedgnn": {"self_loops": False},
    "gcn_pairnorm": {"self_loops": False, "pairnorm_scale": 1.0},
    "gcn_batchnorm": {"self_loops": False, "eps": 1e-5},
    "gin2": {"mlp_layers": 2, "gin_eps": 0.0},
    "gin3": {"mlp_layers": 3, "gin_eps": 0.0},
    "unimp": {},
    "gps": {"mlp_ratio": 2, "eps": 1e-5},
}

# gcnii2x shares the gcnii random stream so its tensors are exact multiples
_STREAM_TOKEN = {"gcnii2x": "gcnii"}


@dataclass(frozen=True)
class MethodSpec:
    id: str
    dim: int = 32
    hyper: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.id not in TOKENS:
            raise UnknownMethodError(self.id)
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        merged = {**_COMMON, **DEFAULT_HYPER[self.id], **self.hyper}
        if "alpha" in merged and not 0.0 < merged["alpha"] < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {merged['alpha']}")
        if merged.get("mlp_layers", 1) < 1:
            raise ValueError("mlp_layers must be >= 1")
        object.__setattr__(self, "hyper", merged)


def method_spec(token: str, dim: int = 32, **hyper: Any) -> MethodSpec:
    return MethodSpec(token.lower(), dim, hyper)


@dataclass(frozen=True)
class LayerParams:
    method: MethodSpec
    layer_index: int
    tensors: Mapping[str, np.ndarray]
    rng_seed: int


@dataclass(frozen=True)
class RunState:
    x: np.ndarray
    x0: np.ndarray
    aux: Optional[Any] = None
    status: Status = Status.OK

    @classmethod
    def initial(cls, x0: np.ndarray) -> "RunState":
        x0 = np.asarray(x0, dtype=np.float64)
        return cls(x0, x0, None, norm_status(x0))


def norm_status(x: np.ndarray) -> Status:
    norm = frobenius_norm(x)
    if not np.isfinite(norm) or norm > OVERFLOW_LIMIT:
        return Status.OVERFLOW
    if norm < UNDERFLOW_LIMIT:
        return Status.UNDERFLOW
    return Status.OK


# --- parameter initialization -------------------------------------------------

def _linear(rng: SplitMix64, fan_in: int, fan_out: int) -> np.ndarray:
    bound = math.sqrt(1.0 / fan_in)
    return rng.uniform((fan_in, fan_out), -bound, bound)


def _glorot(rng: SplitMix64, fan_in: int, fan_out: int) -> np.ndarray:
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform((fan_in, fan_out), -bound, bound)


def _bias_zero(d: int) -> np.ndarray:
    return np.zeros(d)


def _bias_uniform(rng: SplitMix64, fan_in: int, d: int) -> np.ndarray:
    bound = math.sqrt(1.0 / fan_in)
    return rng.uniform(d, -bound, bound)


def _init_gcn(rng, d, hyper):
    return {"W": _linear(rng, d, d), "b": _bias_zero(d)}


def _init_gat(rng, d, hyper):
    return {
        "W": _linear(rng, d, d),
        "att_src": _linear(rng, d, 1)[:, 0],
        "att_dst": _linear(rng, d, 1)[:, 0],
        "b": _bias_zero(d),
    }


def _init_sage(rng, d, hyper):
    return {"W_root": _linear(rng, d, d), "W_nbr": _linear(rng, d, d), "b": _bias_zero(d)}


def _init_gcnii(rng, d, hyper):
    return {"W": _glorot(rng, d, d)}


def _init_gated(rng, d, hyper):
    tensors = {name: _linear(rng, d, d) for name in ("W_z", "U_z", "W_h", "U_h")}
    tensors["b_z"] = _bias_uniform(rng, d, d)
    tensors["b_h"] = _bias_uniform(rng, d, d)
    return tensors


def _init_gin(rng, d, hyper):
    tensors = {}
    for i in range(1, hyper["mlp_layers"] + 1):
        tensors[f"W{i}"] = _linear(rng, d, d)
        tensors[f"b{i}"] = _bias_uniform(rng, d, d)
    return tensors


def _init_unimp(rng, d, hyper):
    return {name: _linear(rng, d, d) for name in ("W_q", "W_k", "W_v")}


def _init_gps(rng, d, hyper):
    hidden = hyper["mlp_ratio"] * d
    tensors = {name: _linear(rng, d, d) for name in ("W_mp", "W_q", "W_k", "W_v", "W_o")}
    tensors["W1"] = _linear(rng, d, hidden)
    tensors["b1"] = _bias_uniform(rng, d, hidden)
    tensors["W2"] = _linear(rng, hidden, d)
    tensors["b2"] = _bias_uniform(rng, hidden, d)
    return tensors


def init_params(spec: MethodSpec, layer_index: int, seed: int) -> LayerParams:
    """Deterministic parameters for one layer of ``spec``."""
    key = f"{_STREAM_TOKEN.get(spec.id, spec.id)}:{seed}:{layer_index}"
    rng = stream(key)
    tensors = _METHODS[spec.id][0](rng, spec.dim, spec.hyper)
    if not spec.hyper["bias"]:
        tensors = {k: (np.zeros_like(v) if k.startswith("b") else v) for k, v in tensors.items()}
    scale = spec.hyper.get("scale", 1.0)
    if scale != 1.0:
        tensors = {k: (scale * v if k.startswith("W") else v) for k, v in tensors.items()}
    for v in tensors.values():
        v.setflags(write=False)
    return LayerParams(spec, layer_index, tensors, rng.seed)


# --- layer application -------------------------------------------------------

def _relu(x):
    return np.maximum(x, 0.0)


def _act(x, hyper):
    return _relu(x) if hyper["activation"] else x


def _gcn_matrix(graph: Graph, hyper) -> np.ndarray:
    kind = (StructureKind.ADJ_SYM_NORM_SELFLOOPS if hyper.get("self_loops")
            else StructureKind.ADJ_SYM_NORM)
    return structure_matrix(graph, kind).matrix


def _loop_mask(graph: Graph) -> np.ndarray:
    return structure_matrix(graph, StructureKind.ADJ).matrix + np.eye(graph.n)


def _masked_softmax(logits: np.ndarray, mask: np.ndarray) -> np.ndarray:
    logits = np.where(mask > 0, logits, -np.inf)
    logits = logits - logits.max(axis=1, keepdims=True)
    w = np.exp(logits)
    return w / w.sum(axis=1, keepdims=True)


def _fwd_gcn(state, graph, t, hyper, k):
    return _act(_gcn_matrix(graph, hyper) @ state.x @ t["W"] + t["b"], hyper), None


def _fwd_gat(state, graph, t, hyper, k):
    h = state.x @ t["W"]
    logits = (h @ t["att_dst"])[:, None] + (h @ t["att_src"])[None, :]
    slope = hyper["negative_slope"]
    logits = np.where(logits > 0, logits, slope * logits)
    p = _masked_softmax(logits, _loop_mask(graph))
    return _act(p @ h + t["b"], hyper), None


def _fwd_resgcn(state, graph, t, hyper, k):
    x = state.x
    return _act(x + _gcn_matrix(graph, hyper) @ x @ t["W"] + t["b"], hyper), None


def _fwd_sage(state, graph, t, hyper, k):
    mean = structure_matrix(graph, StructureKind.ROW_STOCHASTIC).matrix
    x = state.x
    return _act(x @ t["W_root"] + mean @ x @ t["W_nbr"] + t["b"], hyper), None


def _fwd_ggcn(state, graph, t, hyper, k):
    h = state.x @ t["W"]
    norms = np.linalg.norm(h, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    unit = h / safe[:, None]
    cos = unit @ unit.T
    np.fill_diagonal(cos, 1.0)
    agg = structure_matrix(graph, StructureKind.ADJ_SYM_NORM_SELFLOOPS).matrix * cos
    return _act(agg @ h + t["b"], hyper), None


def _fwd_gcnii(state, graph, t, hyper, k):
    alpha = hyper["alpha"]
    theta = hyper["theta"]
    beta = 1.0 if theta is None else math.log(theta / k + 1.0)
    support = (1.0 - alpha) * (_gcn_matrix(graph, hyper) @ state.x) + alpha * state.x0
    return _act((1.0 - beta) * support + beta * (support @ t["W"]), hyper), None


def _fwd_pprgnn(state, graph, t, hyper, k):
    gamma = 1.0 / k
    prop = _gcn_matrix(graph, hyper) @ state.x @ t["W"]
    return _act(gamma * prop + state.x0 + t["b"], hyper), None


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _fwd_gated(state, graph, t, hyper, k):
    x = state.x
    agg = _gcn_matrix(graph, hyper) @ x
    z = _sigmoid(agg @ t["W_z"] + x @ t["U_z"] + t["b_z"])
    cand = np.tanh(agg @ t["W_h"] + (z * x) @ t["U_h"] + t["b_h"])
    return _act((1.0 - z) * x + z * cand, hyper), None


def _pairnorm(y, scale):
    centered = y - y.mean(axis=0, keepdims=True)
    mean_sq = np.mean(np.sum(centered * centered, axis=1))
    if mean_sq == 0:
        return centered
    return scale * centered / math.sqrt(mean_sq)


def _batchnorm(y, eps):
    centered = y - y.mean(axis=0, keepdims=True)
    return centered / np.sqrt(np.mean(centered * centered, axis=0, keepdims=True) + eps)


def _layernorm(y, eps):
    centered = y - y.mean(axis=1, keepdims=True)
    return centered / np.sqrt(np.mean(centered * centered, axis=1, keepdims=True) + eps)


def _fwd_pairnorm(state, graph, t, hyper, k):
    y = _gcn_matrix(graph, hyper) @ state.x @ t["W"] + t["b"]
    return _act(_pairnorm(y, hyper["pairnorm_scale"]), hyper), None


def _fwd_batchnorm(state, graph, t, hyper, k):
    y = _gcn_matrix(graph, hyper) @ state.x @ t["W"] + t["b"]
    return _act(_batchnorm(y, hyper["eps"]), hyper), None


def _fwd_gin(state, graph, t, hyper, k):
    adj = structure_matrix(graph, StructureKind.ADJ).matrix
    h = (1.0 + hyper["gin_eps"]) * state.x + adj @ state.x
    layers = hyper["mlp_layers"]
    for i in range(1, layers + 1):
        h = h @ t[f"W{i}"] + t[f"b{i}"]
        h = _act(h, hyper) if i == layers else _relu(h)
    return h, None


def _attention(x, t, mask=None):
    q, kk, v = x @ t["W_q"], x @ t["W_k"], x @ t["W_v"]
    logits = q @ kk.T / math.sqrt(x.shape[1])
    if mask is None:
        mask = np.ones_like(logits)
    return _masked_softmax(logits, mask) @ v


def _fwd_unimp(state, graph, t, hyper, k):
    return _act(_attention(state.x, t, _loop_mask(graph)), hyper), None


def _fwd_gps(state, graph, t, hyper, k):
    x, eps = state.x, hyper["eps"]
    local = _layernorm(_gcn_matrix(graph, hyper) @ x @ t["W_mp"] + x, eps)
    glob = _layernorm(_attention(x, t) @ t["W_o"] + x, eps)
    h = local + glob
    mlp = _relu(h @ t["W1"] + t["b1"]) @ t["W2"] + t["b2"]
    return _act(_layernorm(h + mlp, eps), hyper), None


_METHODS: dict[str, tuple[Callable, Callable]] = {
    "gcn": (_init_gcn, _fwd_gcn),
    "gat": (_init_gat, _fwd_gat),
    "resgcn": (_init_gcn, _fwd_resgcn),
    "sage": (_init_sage, _fwd_sage),
    "ggcn": (_init_gcn, _fwd_ggcn),
    "gcnii": (_init_gcnii, _fwd_gcnii),
    "gcnii2x": (_init_gcnii, _fwd_gcnii),
    "pprgnn": (_init_gcn, _fwd_pprgnn),
    "gatedgnn": (_init_gated, _fwd_gated),
    "gcn_pairnorm": (_init_gcn, _fwd_pairnorm),
    "gcn_batchnorm": (_init_gcn, _fwd_batchnorm),
    "gin2": (_init_gin, _fwd_gin),
    "gin3": (_init_gin, _fwd_gin),
    "unimp": (_init_unimp, _fwd_unimp),
    "gps": (_init_gps, _fwd_gps),
}


def apply_layer(state: RunState, graph: Graph, params: LayerParams) -> RunState:
    """One layer of ``params.method``; the returned status flags norm blow-up or decay."""
    if state.x.shape[0] != graph.n:
        raise ValueError(f"state has {state.x.shape[0]} rows but graph has {graph.n} nodes")
    spec = params.method
    if state.x.shape[1] != spec.dim:
        raise ValueError(f"state width {state.x.shape[1]} != method dim {spec.dim}")
    forward = _METHODS[spec.id][1]
    with np.errstate(over="ignore", invalid="ignore"):
        x, aux = forward(state, graph, params.tensors, spec.hyper, params.layer_index)
    return replace(state, x=x, aux=aux, status=norm_status(x))


def sum_kron_layer(state: RunState, graphs: Sequence[StructureMatrix],
                   weights: Sequence[np.ndarray], relu: bool = False) -> RunState:
    """``X <- sum_l A_l X W_l^T``, a convolution whose operator is a sum of
    Kronecker products ``sum_l W_l (x) A_l``."""
    if len(graphs) != len(weights) or not graphs:
        raise ValueError("need matching, non-empty sequences of graphs and weights")
    x = sum(a.matrix @ state.x @ np.asarray(w).T for a, w in zip(graphs, weights))
    if relu:
        x = _relu(x)
    return replace(state, x=x, status=norm_status(x))
