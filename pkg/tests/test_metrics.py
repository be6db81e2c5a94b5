import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from oversmoothing.errors import DegeneratePivotError, ZeroStateError
from oversmoothing.graph import StructureKind, karate_club, structure_matrix
from oversmoothing.metrics import (
    MetricRecord,
    Status,
    Verdict,
    classify_collapse,
    dirichlet_energy,
    normalized_dirichlet_energy,
    rank_one_distance,
)

G = karate_club()
L_UN = structure_matrix(G, StructureKind.LAP_UNNORM)
L_SYM = structure_matrix(G, StructureKind.LAP_SYM)

states = arrays(np.float64, (34, 3), elements=st.floats(-5, 5, allow_nan=False))


def test_rank_one_distance_identity():
    assert rank_one_distance(np.eye(2)) == pytest.approx(np.sqrt(2 - np.sqrt(2)), abs=1e-12)
    assert rank_one_distance(np.eye(2)) == pytest.approx(0.7654, abs=1e-4)


def test_rank_one_distance_exact_rank_one(rng):
    u, v = rng.normal(size=7), rng.normal(size=4)
    assert rank_one_distance(np.outer(u, v)) <= 1e-14
    assert rank_one_distance(-3.0 * np.outer(u, v)) <= 1e-14


def test_rank_one_distance_zero_raises():
    with pytest.raises(ZeroStateError):
        rank_one_distance(np.zeros((3, 2)))


def test_rank_one_distance_degenerate_pivot():
    # row 0 has the largest norm, column 0 the largest norm, and x[0, 0] = 0
    x = np.array([[0.0, 2.0], [1.5, 0.0], [1.5, 0.0], [1.5, 0.0]])
    with pytest.raises(DegeneratePivotError):
        rank_one_distance(x, strict=True)
    assert np.isfinite(rank_one_distance(x))


@given(states, st.floats(0.01, 100))
def test_rank_one_distance_scale_invariant(x, c):
    if np.linalg.norm(x) < 1e-6:
        return
    assert rank_one_distance(c * x) == pytest.approx(rank_one_distance(x), abs=1e-10)


@given(states)
def test_rank_one_distance_bounded(x):
    if np.linalg.norm(x) < 1e-6:
        return
    assert 0.0 <= rank_one_distance(x) <= 2.0 + 1e-12


def test_energy_null_vectors():
    ones = np.ones((34, 2))
    assert dirichlet_energy(ones, L_UN) == pytest.approx(0.0, abs=1e-10)
    sq = np.tile(G.sqrt_degree_vector()[:, None], (1, 2))
    assert dirichlet_energy(sq, L_SYM) == pytest.approx(0.0, abs=1e-10)


def test_energy_edge_sum_formula(rng):
    x = rng.normal(size=(34, 3))
    edge_sum = sum(np.sum((x[u] - x[v]) ** 2) for u, v in G.edges) / 2
    assert dirichlet_energy(x, L_UN) == pytest.approx(edge_sum, rel=1e-12)


def test_energy_vector_input():
    x = np.arange(34.0)
    assert dirichlet_energy(x, L_UN) == pytest.approx(dirichlet_energy(x[:, None], L_UN))


def test_energy_requires_laplacian():
    with pytest.raises(ValueError):
        dirichlet_energy(np.ones((34, 1)), structure_matrix(G, StructureKind.ADJ))
    with pytest.raises(ValueError):
        dirichlet_energy(np.ones((5, 1)), L_UN)


def test_normalized_energy_zero_state():
    with pytest.raises(ZeroStateError):
        normalized_dirichlet_energy(np.zeros((34, 2)), L_SYM)


@given(states, st.floats(0.01, 100))
def test_normalized_energy_scale_invariant_and_nonnegative(x, c):
    if np.linalg.norm(x) < 1e-6:
        return
    e = normalized_dirichlet_energy(x, L_SYM)
    assert e >= -1e-12
    assert normalized_dirichlet_energy(c * x, L_SYM) == pytest.approx(e, abs=1e-10)
    assert normalized_dirichlet_energy(x, L_SYM) <= 2.0 + 1e-12


def _trace(rods, status=Status.OK):
    return [MetricRecord(k + 1, 1.0, 0.0, 0.0, r, status) for k, r in enumerate(rods)]


def test_classify_collapse_verdicts():
    assert classify_collapse(_trace([1.0] * 10 + [1e-4] * 8)) is Verdict.COLLAPSED
    assert classify_collapse(_trace([0.5] * 12)) is Verdict.NOT_COLLAPSED
    assert classify_collapse(_trace([0.05] * 12)) is Verdict.INCONCLUSIVE
    assert classify_collapse(_trace([1e-4] * 5)) is Verdict.INCONCLUSIVE


def test_classify_collapse_ignores_truncated_records():
    trace = _trace([1e-4] * 8) + [MetricRecord(9, 1e200, np.nan, np.nan, np.nan, Status.OVERFLOW)]
    assert classify_collapse(trace) is Verdict.COLLAPSED


def test_classify_collapse_empty():
    with pytest.raises(ValueError):
        classify_collapse([])
