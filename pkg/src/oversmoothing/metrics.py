"""Over-smoothing and rank-collapse metrics."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegeneratePivotError, ZeroStateError
from .graph import StructureKind, StructureMatrix
from .linalg import frobenius_norm

DEFAULT_THRESHOLD = 1e-2
DEFAULT_WINDOW = 8


class Status(enum.Enum):
    OK = "OK"
    OVERFLOW = "OVERFLOW"
    UNDERFLOW = "UNDERFLOW"


class Verdict(enum.Enum):
    COLLAPSED = "COLLAPSED"
    NOT_COLLAPSED = "NOT_COLLAPSED"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class MetricRecord:
    layer: int
    state_norm: float
    energy_unnorm: float
    energy_sym: float
    rod: float
    status: Status = Status.OK


_LAPLACIANS = (StructureKind.LAP_UNNORM, StructureKind.LAP_SYM)


def dirichlet_energy(x: np.ndarray, lap: StructureMatrix) -> float:
    """``tr(X^T L X)`` for one of the two graph Laplacians."""
    if lap.kind not in _LAPLACIANS:
        raise ValueError(f"dirichlet energy needs a Laplacian, got {lap.kind}")
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] != lap.size:
        raise ValueError(f"state has {x.shape[0]} rows, Laplacian is {lap.size}x{lap.size}")
    return float(np.sum(x * (lap.matrix @ x)))


def normalized_dirichlet_energy(x: np.ndarray, lap: StructureMatrix) -> float:
    norm = frobenius_norm(x)
    if norm == 0:
        raise ZeroStateError("Dirichlet energy of the zero state is undefined")
    return dirichlet_energy(np.asarray(x) / norm, lap)


def rank_one_distance(x: np.ndarray, strict: bool = False) -> float:
    """Distance of the normalized state from the normalized outer product of its
    largest-norm column and row.

    The column is negated when the row's entry in that column is negative.
    Argmax ties resolve to the lowest index.  If that entry is exactly zero
    the sign that brings the outer product closer to ``x`` is used instead,
    unless ``strict`` is set, in which case :class:`DegeneratePivotError` is
    raised.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    norm = frobenius_norm(x)
    if norm == 0:
        raise ZeroStateError("rank-one distance of the zero state is undefined")
    xn = x / norm
    # distances are scale free, so work on the normalized copy
    v = xn[int(np.argmax(np.sum(xn * xn, axis=1)))]
    j = int(np.argmax(np.sum(xn * xn, axis=0)))
    u = xn[:, j]
    if v[j] < 0:
        u = -u
    elif v[j] == 0:
        if strict:
            raise DegeneratePivotError("max-norm row is zero in the max-norm column")
        if u @ xn @ v < 0:
            u = -u
    outer = np.outer(u, v)
    return frobenius_norm(xn - outer / frobenius_norm(outer))


def classify_collapse(trace: Sequence[MetricRecord], threshold: float = DEFAULT_THRESHOLD,
                      window: int = DEFAULT_WINDOW) -> Verdict:
    if not trace:
        raise ValueError("cannot classify an empty trace")
    ok = [r.rod for r in trace if r.status is Status.OK]
    if len(ok) < window:
        return Verdict.INCONCLUSIVE
    mean = float(np.mean(ok[-window:]))
    if mean <= threshold:
        return Verdict.COLLAPSED
    if mean >= 10 * threshold:
        return Verdict.NOT_COLLAPSED
    return Verdict.INCONCLUSIVE
