import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oversmoothing.convolutions import TOKENS
from oversmoothing.errors import UnknownMethodError
from oversmoothing.harness import (
    CSV_HEADER,
    DepthTrace,
    ExperimentConfig,
    classify_methods,
    csv_text,
    format_summary,
    read_csv,
    run_experiment,
    run_trace,
    run_traces,
    summarize,
    verify,
    write_csv,
)
from oversmoothing.graph import karate_club
from oversmoothing.metrics import MetricRecord, Status, Verdict

G = karate_club()


def test_config_validation():
    assert ExperimentConfig().methods == TOKENS
    assert ExperimentConfig("gcn,gat").methods == ("gcn", "gat")
    assert ExperimentConfig(["all"]).methods == TOKENS
    with pytest.raises(UnknownMethodError):
        ExperimentConfig(("gcn", "bogus"))
    for field in ("depth", "seeds", "dim"):
        with pytest.raises(ValueError):
            ExperimentConfig(**{field: 0})


def test_single_row_csv(tmp_path):
    out = tmp_path / "one.csv"
    run_experiment(ExperimentConfig(("gcn",), depth=1, seeds=1, output=out))
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 2
    assert lines[1].startswith("gcn,0,1,")


def test_trace_layers_are_consecutive():
    t = run_trace("gin2", 3, G, depth=12, dim=8)
    assert [r.layer for r in t.records] == list(range(1, 13))
    assert all(r.status is Status.OK for r in t.records)


def test_trace_truncates_on_overflow(monkeypatch):
    from oversmoothing import convolutions

    # gps norms grow over the first layers of this seed
    ref = run_trace("gps", 0, G, depth=6, dim=8)
    limit = ref.records[3].state_norm * 0.999
    assert max(r.state_norm for r in ref.records[:3]) < limit
    monkeypatch.setattr(convolutions, "OVERFLOW_LIMIT", limit)
    t = run_trace("gps", 0, G, depth=6, dim=8)
    assert [r.status for r in t.records] == [Status.OK] * 3 + [Status.OVERFLOW]
    assert t.truncated and math.isnan(t.records[-1].rod)
    assert t.records[:3] == ref.records[:3]


def test_renormalize_leaves_metrics_unchanged_for_homogeneous_linear_part():
    plain = run_trace("gcn", 0, G, depth=5, dim=8)
    renorm = run_trace("gcn", 0, G, depth=5, dim=8, renormalize=True)
    assert renorm.renormalized
    assert [r.layer for r in renorm.records] == [1, 2, 3, 4, 5]
    assert plain.records[0].rod == renorm.records[0].rod


def test_csv_roundtrip_is_lossless():
    traces = run_traces(ExperimentConfig(("gcn", "gps"), depth=6, seeds=2, dim=8))
    text = csv_text(traces)
    back = read_csv(io.StringIO(text))
    assert [(t.method, t.seed) for t in back] == [(t.method, t.seed) for t in traces]
    for a, b in zip(traces, back):
        assert a.records == b.records
    assert summarize(back) == summarize(traces)
    assert csv_text(back) == text


def test_csv_row_count():
    traces = run_traces(ExperimentConfig(("sage", "gat"), depth=4, seeds=3, dim=8))
    buf = io.StringIO()
    write_csv(traces, buf)
    assert len(buf.getvalue().splitlines()) == 1 + sum(len(t.records) for t in traces)


def test_read_csv_rejects_bad_header():
    with pytest.raises(ValueError):
        read_csv(io.StringIO("a,b\n"))


@settings(max_examples=5, deadline=None)
@given(st.permutations(["gcn", "sage", "gcnii", "gin3"]))
def test_method_order_does_not_change_traces(order):
    ref = {(t.method, t.seed): t.records
           for t in run_traces(ExperimentConfig(("gcn", "sage", "gcnii", "gin3"), 5, 2, 8))}
    for t in run_traces(ExperimentConfig(tuple(order), 5, 2, 8)):
        assert t.records == ref[(t.method, t.seed)]


def test_parallel_matches_serial():
    cfg = dict(methods=("gcn", "gatedgnn"), depth=5, seeds=3, dim=8)
    serial = csv_text(run_traces(ExperimentConfig(**cfg)))
    parallel = csv_text(run_traces(ExperimentConfig(**cfg, jobs=2)))
    assert serial == parallel


def test_truncated_methods_are_rerun_with_renormalization():
    cfg = ExperimentConfig(("gcn",), depth=64, seeds=2, dim=8)
    short = [DepthTrace("gcn", s, [MetricRecord(1, 1.0, 1.0, 1.0, 1.0),
                                   MetricRecord(2, 1e200, math.nan, math.nan, math.nan,
                                                Status.OVERFLOW)]) for s in range(2)]
    summaries = classify_methods(cfg, short, G)
    assert summaries["gcn"].renormalized
    assert summaries["gcn"].verdict is Verdict.COLLAPSED
    assert "renormalized" in format_summary(summaries)


def test_summary_contents():
    traces = run_traces(ExperimentConfig(("gcn",), depth=20, seeds=2, dim=8))
    s = summarize(traces)["gcn"]
    assert s.seeds == 2 and s.truncated == 0
    assert sum(s.seed_verdicts.values()) == 2
    assert s.mean_final_rod == pytest.approx(np.mean([t.records[-1].rod for t in traces]))


def test_verify_writes_report(tmp_path):
    out = tmp_path / "report.json"
    passed, payload = verify(out)
    assert passed
    assert out.exists()
    assert [c["name"] for c in payload["checks"]] == [
        "power_iteration", "kron_power", "matrix_remark", "over_smoothing",
        "jordan_case", "energy_bound", "energy_rod_implication"]
    bad, payload = verify(None, sabotage="kron")
    assert not bad and payload["sabotage"] == "kron"
