"""Graphs, the embedded karate-club dataset and derived structure matrices."""

from __future__ import annotations

import enum
import functools
import logging
from dataclasses import dataclass
from typing import Iterable, TextIO, Union

import numpy as np

from .errors import ParseError

log = logging.getLogger(__name__)

# Zachary's karate club, 78 undirected edges, 0-based node ids.
KARATE_EDGES = (
    (0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6), (0, 7), (0, 8), (0, 10),
    (0, 11), (0, 12), (0, 13), (0, 17), (0, 19), (0, 21), (0, 31), (1, 2),
    (1, 3), (1, 7), (1, 13), (1, 17), (1, 19), (1, 21), (1, 30), (2, 3),
    (2, 7), (2, 8), (2, 9), (2, 13), (2, 27), (2, 28), (2, 32), (3, 7),
    (3, 12), (3, 13), (4, 6), (4, 10), (5, 6), (5, 10), (5, 16), (6, 16),
    (8, 30), (8, 32), (8, 33), (9, 33), (13, 33), (14, 32), (14, 33),
    (15, 32), (15, 33), (18, 32), (18, 33), (19, 33), (20, 32), (20, 33),
    (22, 32), (22, 33), (23, 25), (23, 27), (23, 29), (23, 32), (23, 33),
    (24, 25), (24, 27), (24, 31), (25, 31), (26, 29), (26, 33), (27, 33),
    (28, 31), (28, 33), (29, 32), (29, 33), (30, 32), (30, 33), (31, 32),
    (31, 33), (32, 33),
)


@dataclass(frozen=True)
class Graph:
    """Node count plus directed edge list; each undirected edge appears twice.

    ``degrees[i]`` counts incoming edges of node ``i``.  Self-loops are never
    stored.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    degrees: tuple[int, ...]

    @classmethod
    def from_undirected(cls, n: int, pairs: Iterable[tuple[int, int]]) -> "Graph":
        seen = set()
        edges = []
        for u, v in pairs:
            if u == v:
                continue
            key = (min(u, v), max(u, v))
            if key in seen:
                continue
            seen.add(key)
            edges.append((u, v))
            edges.append((v, u))
        degrees = [0] * n
        for _, dst in edges:
            degrees[dst] += 1
        return cls(n, tuple(edges), tuple(degrees))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def adjacency(self) -> np.ndarray:
        return structure_matrix(self, StructureKind.ADJ).matrix

    def degree_vector(self) -> np.ndarray:
        return np.asarray(self.degrees, dtype=np.float64)

    def sqrt_degree_vector(self) -> np.ndarray:
        """``D^{1/2} 1``, the null vector of the symmetric Laplacian."""
        return np.sqrt(self.degree_vector())

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            nbrs[u].append(v)
        seen = {0}
        stack = [0]
        while stack:
            for w in nbrs[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.n


def load_edge_list(text: Union[str, TextIO]) -> Graph:
    """Parse ``src dst`` lines (0-based ids, ``#`` comments) as an undirected graph.

    Node count is ``max id + 1``; ids that never appear become isolated nodes.
    Repeated pairs and self-loops are dropped.
    """
    lines = text.splitlines() if isinstance(text, str) else text
    pairs = []
    max_id = -1
    for line_no, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise ParseError(line_no, f"expected 'src dst', got {raw.strip()!r}")
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise ParseError(line_no, f"non-integer node id in {raw.strip()!r}") from None
        if u < 0 or v < 0:
            raise ParseError(line_no, "node ids must be non-negative")
        if u == v:
            log.warning("line %d: dropping self-loop on node %d", line_no, u)
        pairs.append((u, v))
        max_id = max(max_id, u, v)
    return Graph.from_undirected(max_id + 1, pairs)


def karate_club() -> Graph:
    return Graph.from_undirected(34, KARATE_EDGES)


def cycle_with_chords(n: int = 10) -> Graph:
    """Small connected, non-bipartite test graph: an ``n``-cycle plus chords."""
    pairs = [(i, (i + 1) % n) for i in range(n)]
    pairs += [(0, n // 2), (1, 3), (2, n - 2)]
    return Graph.from_undirected(n, pairs)


class StructureKind(enum.Enum):
    ADJ = "adj"
    ADJ_SYM_NORM = "adj_sym_norm"
    ADJ_SYM_NORM_SELFLOOPS = "adj_sym_norm_selfloops"
    ROW_STOCHASTIC = "row_stochastic"
    LAP_UNNORM = "lap_unnorm"
    LAP_SYM = "lap_sym"


@dataclass(frozen=True)
class StructureMatrix:
    kind: StructureKind
    matrix: np.ndarray

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


def _inv_power(deg: np.ndarray, power: float) -> np.ndarray:
    # isolated nodes get 0 so the matrices stay finite
    out = np.zeros_like(deg)
    nz = deg > 0
    out[nz] = deg[nz] ** -power
    return out


@functools.lru_cache(maxsize=64)
def _realize(g: Graph, kind: StructureKind) -> np.ndarray:
    adj = np.zeros((g.n, g.n))
    for src, dst in g.edges:
        adj[dst, src] = 1.0
    deg = g.degree_vector()
    if kind is StructureKind.ADJ:
        m = adj
    elif kind is StructureKind.ADJ_SYM_NORM:
        s = _inv_power(deg, 0.5)
        m = s[:, None] * adj * s[None, :]
    elif kind is StructureKind.ADJ_SYM_NORM_SELFLOOPS:
        s = _inv_power(deg + 1.0, 0.5)
        m = s[:, None] * (adj + np.eye(g.n)) * s[None, :]
    elif kind is StructureKind.ROW_STOCHASTIC:
        m = _inv_power(deg, 1.0)[:, None] * adj
    elif kind is StructureKind.LAP_UNNORM:
        m = np.diag(deg) - adj
    elif kind is StructureKind.LAP_SYM:
        s = _inv_power(deg, 0.5)
        m = np.eye(g.n) - s[:, None] * adj * s[None, :]
    else:  # pragma: no cover
        raise ValueError(kind)
    m.setflags(write=False)
    return m


def structure_matrix(g: Graph, kind: StructureKind) -> StructureMatrix:
    return StructureMatrix(kind, _realize(g, kind))
