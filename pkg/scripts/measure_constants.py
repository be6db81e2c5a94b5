"""Measure the empirical constants frozen in the test suite.

* the ratio ROD / sqrt(E) for slightly perturbed null-space states
* how often two distinct aggregation graphs keep the final ROD above 0.1
"""

import numpy as np

from oversmoothing.convolutions import RunState, sum_kron_layer
from oversmoothing.graph import StructureKind, karate_club, structure_matrix
from oversmoothing.harness import initial_features
from oversmoothing.metrics import normalized_dirichlet_energy, rank_one_distance
from oversmoothing.rng import stream

G = karate_club()


def rod_energy_ratio(samples=200, d=8, eta=1e-3):
    out = {}
    for kind, null in ((StructureKind.LAP_UNNORM, np.ones(G.n)),
                       (StructureKind.LAP_SYM, G.sqrt_degree_vector())):
        lap = structure_matrix(G, kind)
        r = stream(f"constants:{kind.value}")
        ratios = []
        for _ in range(samples):
            x = np.outer(null, r.normal(d)) + eta * r.normal((G.n, d))
            ratios.append(rank_one_distance(x) / np.sqrt(normalized_dirichlet_energy(x, lap)))
        out[kind.value] = max(ratios)
    return out


def sum_kron_prevention(kinds, seeds=50, depth=96, d=32):
    graphs = [structure_matrix(G, k) for k in kinds]
    rods = []
    for seed in range(seeds):
        r = stream(f"sumkron:{seed}")
        weights = [r.normal((d, d)) / np.sqrt(d) for _ in kinds]
        state = RunState.initial(initial_features(G, d, seed))
        for _ in range(depth):
            x = sum_kron_layer(state, graphs, weights).x
            state = RunState(x / np.linalg.norm(x), state.x0)
        rods.append(rank_one_distance(state.x))
    return np.array(rods)


if __name__ == "__main__":
    for kind, ratio in rod_energy_ratio().items():
        print(f"max ROD/sqrt(E) with {kind}: {ratio:.3f}")
    for kinds in [(StructureKind.ADJ_SYM_NORM, StructureKind.ROW_STOCHASTIC),
                  (StructureKind.ADJ_SYM_NORM, StructureKind.ADJ_SYM_NORM)]:
        rods = sum_kron_prevention(kinds)
        names = " + ".join(k.value for k in kinds)
        print(f"{names}: ROD > 0.1 on {(rods > 0.1).sum()}/50 seeds, min {rods.min():.2e}")
