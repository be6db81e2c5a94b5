import math
import xml.etree.ElementTree as ET

import pytest

from oversmoothing.errors import EmptySelectionError
from oversmoothing.harness import DepthTrace, ExperimentConfig, run_traces, write_csv
from oversmoothing.metrics import MetricRecord, Status
from oversmoothing.plot import LOG_FLOOR, emit_plot

NS = {"svg": "http://www.w3.org/2000/svg"}


def _polylines(path):
    root = ET.parse(path).getroot()
    return root.findall(".//svg:polyline", NS), [t.text for t in root.findall(".//svg:text", NS)
                                                  if t.get("class") == "legend"]


def test_single_method_one_polyline(tmp_path):
    csv = tmp_path / "run.csv"
    write_csv(run_traces(ExperimentConfig(("gcn",), depth=10, seeds=2, dim=8)), csv)
    lines, legend = _polylines(emit_plot(csv, "rod", tmp_path / "rod.svg"))
    assert len(lines) == 1 and legend == ["gcn"]
    assert len(lines[0].get("points").split()) == 10


def test_all_methods_with_legend(tmp_path):
    csv = tmp_path / "run.csv"
    write_csv(run_traces(ExperimentConfig("all", depth=3, seeds=1, dim=8)), csv)
    lines, legend = _polylines(emit_plot(csv, "energy_sym", tmp_path / "e.svg"))
    assert len(lines) == 15 and len(legend) == 15


def test_truncated_trace_noted(tmp_path):
    records = [MetricRecord(k, 1.0, 0.1, 0.1, 10.0**-k) for k in range(1, 40)]
    records.append(MetricRecord(40, 1e200, math.nan, math.nan, math.nan, Status.OVERFLOW))
    csv = tmp_path / "t.csv"
    write_csv([DepthTrace("gcn", 0, records)], csv)
    lines, legend = _polylines(emit_plot(csv, "rod", tmp_path / "t.svg"))
    assert legend == ["gcn (truncated at 40)"]
    # layers past 16 sit on the clipped floor
    assert len(lines[0].get("points").split()) == 39
    ys = [float(p.split(",")[1]) for p in lines[0].get("points").split()]
    assert ys[20] == ys[-1]
    assert LOG_FLOOR == 1e-16


def test_empty_selection(tmp_path):
    csv = tmp_path / "run.csv"
    write_csv(run_traces(ExperimentConfig(("gcn",), depth=2, seeds=1, dim=8)), csv)
    with pytest.raises(EmptySelectionError):
        emit_plot(csv, "rod", tmp_path / "x.svg", methods=["gat"])
    with pytest.raises(ValueError):
        emit_plot(csv, "loss", tmp_path / "x.svg")
