"""Depth-sweep experiment: run methods over seeds, record metrics per layer,
write CSV, summarize and classify."""

from __future__ import annotations

import contextlib
import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, TextIO, Union

import numpy as np

from .convolutions import TOKENS, RunState, apply_layer, init_params, method_spec
from .errors import UnknownMethodError
from .graph import Graph, StructureKind, karate_club, load_edge_list, structure_matrix
from .linalg import frobenius_norm, inject_fault
from .metrics import (
    DEFAULT_THRESHOLD,
    DEFAULT_WINDOW,
    MetricRecord,
    Status,
    Verdict,
    classify_collapse,
    normalized_dirichlet_energy,
    rank_one_distance,
)
from .rng import stream
from .verification import CHECK_NAMES, run_all_checks

log = logging.getLogger(__name__)

CSV_HEADER = ("method", "seed", "layer", "state_norm", "energy_unnorm", "energy_sym", "rod", "status")


@dataclass(frozen=True)
class ExperimentConfig:
    methods: tuple[str, ...] = TOKENS
    depth: int = 96
    seeds: int = 50
    dim: int = 32
    dataset: str = "karate"
    renormalize: bool = False
    output: Optional[Path] = None
    jobs: int = 1

    def __post_init__(self):
        methods = parse_methods(self.methods)
        object.__setattr__(self, "methods", methods)
        for name in ("depth", "seeds", "dim", "jobs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


def parse_methods(methods: Union[str, Iterable[str]]) -> tuple[str, ...]:
    if isinstance(methods, str):
        methods = [m for m in methods.split(",") if m.strip()]
    tokens = [m.strip().lower() for m in methods]
    if tokens == ["all"]:
        return TOKENS
    for token in tokens:
        if token not in TOKENS:
            raise UnknownMethodError(token)
    return tuple(tokens)


def load_dataset(dataset: str) -> Graph:
    if dataset == "karate":
        return karate_club()
    return load_edge_list(Path(dataset).read_text())


@dataclass
class DepthTrace:
    method: str
    seed: int
    records: list[MetricRecord] = field(default_factory=list)
    renormalized: bool = False

    @property
    def truncated(self) -> bool:
        return bool(self.records) and self.records[-1].status is not Status.OK

    def ok_records(self) -> list[MetricRecord]:
        return [r for r in self.records if r.status is Status.OK]


def initial_features(graph: Graph, dim: int, seed: int) -> np.ndarray:
    """Standard-normal node features; shared by all methods for a given seed."""
    return stream(f"x0:{seed}").normal((graph.n, dim))


def run_trace(method: str, seed: int, graph: Graph, depth: int = 96, dim: int = 32,
              renormalize: bool = False) -> DepthTrace:
    spec = method_spec(method, dim)
    lap_unnorm = structure_matrix(graph, StructureKind.LAP_UNNORM)
    lap_sym = structure_matrix(graph, StructureKind.LAP_SYM)
    state = RunState.initial(initial_features(graph, dim, seed))
    trace = DepthTrace(method, seed, renormalized=renormalize)
    for layer in range(1, depth + 1):
        state = apply_layer(state, graph, init_params(spec, layer, seed))
        norm = frobenius_norm(state.x)
        if state.status is not Status.OK:
            nan = math.nan
            trace.records.append(MetricRecord(layer, norm, nan, nan, nan, state.status))
            break
        trace.records.append(MetricRecord(
            layer, norm,
            normalized_dirichlet_energy(state.x, lap_unnorm),
            normalized_dirichlet_energy(state.x, lap_sym),
            rank_one_distance(state.x),
        ))
        if renormalize:
            state = RunState(state.x / norm, state.x0, state.aux, state.status)
    return trace


def _run_job(args) -> DepthTrace:
    return run_trace(*args)


def run_traces(config: ExperimentConfig, graph: Optional[Graph] = None) -> list[DepthTrace]:
    graph = graph or load_dataset(config.dataset)
    jobs = [(m, s, graph, config.depth, config.dim, config.renormalize)
            for m in config.methods for s in range(config.seeds)]
    if config.jobs > 1:
        with ProcessPoolExecutor(config.jobs) as pool:
            return list(pool.map(_run_job, jobs, chunksize=8))
    return [_run_job(job) for job in jobs]


# --- summary ----------------------------------------------------------------

@dataclass
class MethodSummary:
    method: str
    seeds: int
    truncated: int
    mean_final_energy_unnorm: float
    mean_final_energy_sym: float
    mean_final_rod: float
    verdict: Verdict
    seed_verdicts: dict[str, int]
    renormalized: bool = False

    def to_dict(self) -> dict:
        out = dict(self.__dict__)
        out["verdict"] = self.verdict.value
        return out


def mean_trace(traces: Sequence[DepthTrace]) -> list[MetricRecord]:
    """Seed-averaged OK records, layer by layer, over the traces still alive."""
    by_layer: dict[int, list[MetricRecord]] = {}
    for t in traces:
        for r in t.ok_records():
            by_layer.setdefault(r.layer, []).append(r)
    out = []
    for layer in sorted(by_layer):
        rs = by_layer[layer]
        out.append(MetricRecord(
            layer,
            float(np.mean([r.state_norm for r in rs])),
            float(np.mean([r.energy_unnorm for r in rs])),
            float(np.mean([r.energy_sym for r in rs])),
            float(np.mean([r.rod for r in rs])),
        ))
    return out


def summarize_method(traces: Sequence[DepthTrace], threshold: float = DEFAULT_THRESHOLD,
                     window: int = DEFAULT_WINDOW) -> MethodSummary:
    finals = [t.ok_records()[-1] for t in traces if t.ok_records()]
    counts = {v.value: 0 for v in Verdict}
    for t in traces:
        counts[classify_collapse(t.records, threshold, window).value] += 1
    averaged = mean_trace(traces)

    def mean_of(attr):
        return float(np.mean([getattr(r, attr) for r in finals])) if finals else math.nan

    return MethodSummary(
        method=traces[0].method,
        seeds=len(traces),
        truncated=sum(t.truncated for t in traces),
        mean_final_energy_unnorm=mean_of("energy_unnorm"),
        mean_final_energy_sym=mean_of("energy_sym"),
        mean_final_rod=mean_of("rod"),
        verdict=classify_collapse(averaged, threshold, window) if averaged else Verdict.INCONCLUSIVE,
        seed_verdicts=counts,
        renormalized=any(t.renormalized for t in traces),
    )


def group_by_method(traces: Sequence[DepthTrace]) -> dict[str, list[DepthTrace]]:
    groups: dict[str, list[DepthTrace]] = {}
    for t in traces:
        groups.setdefault(t.method, []).append(t)
    return groups


def summarize(traces: Sequence[DepthTrace], threshold: float = DEFAULT_THRESHOLD,
              window: int = DEFAULT_WINDOW) -> dict[str, MethodSummary]:
    return {m: summarize_method(ts, threshold, window) for m, ts in group_by_method(traces).items()}


def classify_methods(config: ExperimentConfig, traces: Sequence[DepthTrace],
                     graph: Optional[Graph] = None) -> dict[str, MethodSummary]:
    """Summaries, re-running with renormalization any method whose traces
    truncate before the classification window."""
    summaries = summarize(traces)
    for method, summary in summaries.items():
        too_short = [t for t in group_by_method(traces)[method]
                     if len(t.ok_records()) < DEFAULT_WINDOW]
        if too_short and not config.renormalize:
            log.info("%s: %d traces truncated early, re-running with renormalization",
                     method, len(too_short))
            rerun = ExperimentConfig((method,), config.depth, config.seeds, config.dim,
                                     config.dataset, True, None, config.jobs)
            summaries[method] = summarize_method(run_traces(rerun, graph))
    return summaries


# --- CSV --------------------------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


def write_csv(traces: Iterable[DepthTrace], out: Union[str, Path, TextIO]) -> None:
    if isinstance(out, (str, Path)):
        with open(out, "w", newline="") as fh:
            write_csv(traces, fh)
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for t in traces:
        for r in t.records:
            writer.writerow((t.method, t.seed, r.layer, _fmt(r.state_norm), _fmt(r.energy_unnorm),
                             _fmt(r.energy_sym), _fmt(r.rod), r.status.value))


def read_csv(source: Union[str, Path, TextIO]) -> list[DepthTrace]:
    if isinstance(source, (str, Path)):
        with open(source, newline="") as fh:
            return read_csv(fh)
    reader = csv.reader(source)
    header = tuple(next(reader, ()))
    if header != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header}")
    traces: list[DepthTrace] = []
    for row in reader:
        method, seed = row[0], int(row[1])
        if not traces or (traces[-1].method, traces[-1].seed) != (method, seed):
            traces.append(DepthTrace(method, seed))
        traces[-1].records.append(MetricRecord(
            int(row[2]), float(row[3]), float(row[4]), float(row[5]), float(row[6]), Status(row[7])))
    return traces


def csv_text(traces: Iterable[DepthTrace]) -> str:
    buf = io.StringIO()
    write_csv(traces, buf)
    return buf.getvalue()


@dataclass
class ExperimentResult:
    traces: list[DepthTrace]
    summaries: dict[str, MethodSummary]


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    graph = load_dataset(config.dataset)
    traces = run_traces(config, graph)
    if config.output is not None:
        write_csv(traces, config.output)
    return ExperimentResult(traces, classify_methods(config, traces, graph))


def format_summary(summaries: dict[str, MethodSummary]) -> str:
    lines = [f"{'method':<14} {'E_unnorm':>10} {'E_sym':>10} {'ROD':>10}  verdict"]
    for s in summaries.values():
        note = " (renormalized)" if s.renormalized else ""
        if s.truncated:
            note += f" [{s.truncated}/{s.seeds} truncated]"
        lines.append(f"{s.method:<14} {s.mean_final_energy_unnorm:>10.3e} "
                     f"{s.mean_final_energy_sym:>10.3e} {s.mean_final_rod:>10.3e}  "
                     f"{s.verdict.value}{note}")
    return "\n".join(lines)


# --- verification driver ----------------------------------------------------

def verify(out_path: Optional[Union[str, Path]] = None,
           sabotage: Optional[str] = None) -> tuple[bool, dict]:
    """Run every verification family; optionally with a primitive corrupted."""
    with inject_fault(sabotage) if sabotage else contextlib.nullcontext():
        reports = run_all_checks()
    assert tuple(r.name for r in reports) == CHECK_NAMES
    payload = {"passed": all(r.passed for r in reports), "sabotage": sabotage,
               "checks": [r.to_dict() for r in reports]}
    if out_path is not None:
        Path(out_path).write_text(json.dumps(payload, indent=2, default=float) + "\n")
    return payload["passed"], payload
