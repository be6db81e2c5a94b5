"""Executable checks of the power-iteration view of over-smoothing.

Every ``check_*`` function is deterministic for a given seed, never raises on a
failed property and returns a :class:`CheckReport` with one entry per case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np
import scipy.linalg

from .errors import IllConditionedError, NonDominantSpectrumError, OverSmoothingError
from .graph import Graph, StructureKind, cycle_with_chords, karate_club, structure_matrix
from .linalg import (
    EigenPair,
    dense_eigenvalues,
    dominant_left_right_factors,
    dominant_pair,
    frobenius_norm,
    kron,
    power_iteration,
    random_gapped_matrix,
    unvectorize,
    vectorize,
)
from .metrics import dirichlet_energy, normalized_dirichlet_energy, rank_one_distance
from .rng import stream

CHECK_NAMES = (
    "power_iteration",
    "kron_power",
    "matrix_remark",
    "over_smoothing",
    "jordan_case",
    "energy_bound",
    "energy_rod_implication",
)

# measured on karate club at noise 1e-3: largest ROD / sqrt(E) was 0.81 for the
# unnormalized and 1.23 for the symmetric Laplacian
ROD_ENERGY_CONSTANT = 10.0


@dataclass
class CheckReport:
    name: str
    cases: list[dict[str, Any]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.cases)

    def add(self, case: str, passed: bool, **values: Any) -> None:
        self.cases.append({"case": case, "passed": bool(passed), **_plain(values)})

    def failures(self) -> list[dict[str, Any]]:
        return [c for c in self.cases if not c["passed"]]

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "passed": self.passed, "cases": self.cases}


def _plain(values: dict[str, Any]) -> dict[str, Any]:
    out = {}
    for k, v in values.items():
        if isinstance(v, np.ndarray):
            v = v.tolist()
        elif isinstance(v, (np.floating, np.integer, np.bool_)):
            v = v.item()
        elif isinstance(v, complex):
            v = [v.real, v.imag]
        out[k] = v
    return out


def _sign_free_distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(min(np.linalg.norm(a - b), np.linalg.norm(a + b)))


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _late_alternation(signs: np.ndarray) -> bool:
    tail = signs[len(signs) // 2:]
    return bool(len(tail) > 1 and np.all(tail[1:] == -tail[:-1]))


# --- power iteration ----------------------------------------------------------

def check_power_iteration(trials: int = 20, size: int = 8, tol: float = 1e-8,
                          seed: int = 0, max_iters: int = 500,
                          min_gap: float = 1.1) -> CheckReport:
    report = CheckReport("power_iteration")

    res = power_iteration(np.diag([2.0, 1.0]), np.array([1.0, 1.0]), max_iters, tol)
    decay = res.residual_norms[8:14] / res.residual_norms[7:13]
    report.add("diag(2,1)", res.converged and not _late_alternation(res.beta_signs)
               and abs(res.dominant.value_re - 2.0) < tol and np.allclose(decay, 0.5, rtol=1e-3),
               value=res.dominant.value_re, iterations=res.iterations)

    res = power_iteration(np.diag([-2.0, 1.0]), np.array([1.0, 1.0]), max_iters, tol)
    report.add("diag(-2,1)", res.converged and _late_alternation(res.beta_signs)
               and abs(res.dominant.value_re + 2.0) < tol,
               value=res.dominant.value_re, iterations=res.iterations)

    try:
        power_iteration(np.array([[0.0, 1.0], [1.0, 0.0]]), np.array([1.0, 0.0]), max_iters, tol)
        report.add("permutation raises", False)
    except NonDominantSpectrumError:
        report.add("permutation raises", True)

    rng = stream(f"verify:power:{seed}")
    for t in range(trials):
        s = random_gapped_matrix(rng, size, min_gap)
        x0 = rng.normal(size)
        oracle = dominant_pair(s)
        try:
            res = power_iteration(s, x0, max_iters, tol / 10)
        except OverSmoothingError as exc:
            report.add(f"random {size}x{size} #{t}", False, error=repr(exc))
            continue
        err = _sign_free_distance(res.dominant.vector, oracle.vector)
        value_err = abs(res.dominant.value_re - oracle.value_re)
        alternates = _late_alternation(res.beta_signs)
        ok = (res.converged and err <= tol and value_err <= tol * max(1.0, abs(oracle.value_re))
              and alternates == (oracle.value_re < 0))
        report.add(f"random {size}x{size} #{t}", ok, iterations=res.iterations,
                   vector_error=err, value_error=value_err,
                   dominant=oracle.value_re, sign_alternates=alternates)
    return report


# --- Kronecker power iteration ------------------------------------------------

def check_kron_power(trials: int = 20, w_size: int = 4, a_size: int = 6, seed: int = 0,
                     vector_tol: float = 1e-6, value_tol: float = 1e-8) -> CheckReport:
    report = CheckReport("kron_power")
    rng = stream(f"verify:kron:{seed}")

    worst = 0.0
    for _ in range(20):
        a, x, w = rng.normal((3, 3)), rng.normal((3, 2)), rng.normal((2, 2))
        worst = max(worst, float(np.max(np.abs(vectorize(a @ x @ w) - kron(w.T, a) @ vectorize(x)))))
    report.add("vec(AXW) = (W^T kron A) vec(X)", worst <= 1e-12, max_abs_deviation=worst)

    pw, pa, product = dominant_left_right_factors(np.diag([2.0, 1.0]), np.diag([3.0, 1.0]))
    res = power_iteration(kron(np.diag([2.0, 1.0]), np.diag([3.0, 1.0])), np.ones(4), 200, 1e-13)
    err = _sign_free_distance(res.dominant.vector, kron(pw.vector, pa.vector))
    report.add("diagonal pair", product == 6.0 and err <= 1e-12
               and abs(res.dominant.value_re - 6.0) <= 1e-12, vector_error=err)

    g = karate_club()
    adj = structure_matrix(g, StructureKind.ADJ_SYM_NORM).matrix
    w = random_gapped_matrix(rng, 3)
    pw = dominant_pair(w)
    expected = _unit(kron(pw.vector, g.sqrt_degree_vector()))
    try:
        res = power_iteration(kron(w, adj), rng.normal(3 * g.n), 20_000, 1e-12)
        err = _sign_free_distance(res.dominant.vector, expected)
        report.add("karate ADJ_SYM_NORM", err <= vector_tol, vector_error=err,
                   value=res.dominant.value_re, expected_value=pw.value_re)
    except OverSmoothingError as exc:
        report.add("karate ADJ_SYM_NORM", False, error=repr(exc))

    for t in range(trials):
        w = random_gapped_matrix(rng, w_size)
        a = random_gapped_matrix(rng, a_size)
        s = kron(w, a)
        pw, pa, product = dominant_left_right_factors(w, a)
        oracle = dense_eigenvalues(s)[0]
        try:
            res = power_iteration(s, rng.normal(w_size * a_size), 20_000, 1e-12)
        except OverSmoothingError as exc:
            report.add(f"random W{w_size} A{a_size} #{t}", False, error=repr(exc))
            continue
        err = _sign_free_distance(res.dominant.vector, _unit(kron(pw.vector, pa.vector)))
        scale = max(1.0, abs(product))
        value_err = abs(res.dominant.value_re - product)
        oracle_err = abs(oracle.value - product)
        ok = res.converged and err <= vector_tol and value_err <= value_tol * scale \
            and oracle_err <= value_tol * scale
        report.add(f"random W{w_size} A{a_size} #{t}", ok, iterations=res.iterations,
                   vector_error=err, value_error=value_err, oracle_error=oracle_err)
    return report


# --- matrix form --------------------------------------------------------------

def check_matrix_remark(k_max: int = 96, seed: int = 0, d: int = 4) -> CheckReport:
    report = CheckReport("matrix_remark")
    g = karate_club()
    adj = structure_matrix(g, StructureKind.ADJ_SYM_NORM).matrix
    lap_sym = structure_matrix(g, StructureKind.LAP_SYM)
    v1a = _unit(g.sqrt_degree_vector())
    rng = stream(f"verify:remark:{seed}")
    w = random_gapped_matrix(rng, d)
    v1w = dominant_pair(w.T).vector

    x = np.outer(v1a, v1w)
    rods = []
    for _ in range(k_max):
        x = adj @ x @ w
        x /= frobenius_norm(x)
        rods.append(rank_one_distance(x))
    report.add("fixed direction", max(rods) <= 1e-12, max_rod=max(rods))

    x0 = rng.normal((g.n, d))
    x = x0.copy()
    vec = vectorize(x0)
    s = kron(w.T, adj)
    for _ in range(k_max):
        x = adj @ x @ w
        x /= frobenius_norm(x)
        vec = s @ vec
        vec /= np.linalg.norm(vec)
    deviation = float(np.linalg.norm(vectorize(x) - vec))
    rod = rank_one_distance(x)
    energy = normalized_dirichlet_energy(x, lap_sym)
    col_norms = np.linalg.norm(x, axis=0)
    significant = col_norms >= 1e-3 * col_norms.max()
    cosines = np.abs(v1a @ x[:, significant]) / col_norms[significant]
    limit = _sign_free_distance(vectorize(x), _unit(kron(v1w, v1a)))
    report.add("matrix vs vec iterate", deviation <= 1e-8, deviation=deviation)
    report.add("rank collapse", rod <= 1e-6, rod=rod)
    report.add("symmetric energy", energy <= 1e-10, energy_sym=energy)
    report.add("columns align with v1(A)", float(cosines.min()) >= 1 - 1e-8,
               min_cosine=float(cosines.min()), distance_to_limit=limit)
    return report


def check_over_smoothing(k_max: int = 200, seed: int = 0, d: int = 4,
                         tol: float = 1e-8) -> CheckReport:
    """Linear iteration with mean and symmetric aggregation approaches ``1 c^T``
    and ``D^{1/2} 1 c^T`` respectively."""
    report = CheckReport("over_smoothing")
    g = karate_club()
    rng = stream(f"verify:smoothing:{seed}")
    families = (
        ("mean aggregation", StructureKind.ROW_STOCHASTIC, np.ones(g.n), StructureKind.LAP_UNNORM),
        ("symmetric aggregation", StructureKind.ADJ_SYM_NORM, g.sqrt_degree_vector(),
         StructureKind.LAP_SYM),
    )
    for label, kind, smooth, lap_kind in families:
        adj = structure_matrix(g, kind).matrix
        w = random_gapped_matrix(rng, d)
        x = rng.normal((g.n, d))
        for _ in range(k_max):
            x = adj @ x @ w
            x /= frobenius_norm(x)
        v = _unit(smooth)
        c = v @ x
        distance = frobenius_norm(x - np.outer(v, c))
        energy = normalized_dirichlet_energy(x, structure_matrix(g, lap_kind))
        report.add(label, distance <= tol and energy <= tol, distance=distance,
                   energy=energy, rod=rank_one_distance(x))
    return report


# --- Jordan blocks ------------------------------------------------------------

@dataclass(frozen=True)
class JordanTestCase:
    """``w = basis @ jordan @ inv(basis)`` with a known Jordan form.

    ``p`` is the size of the largest block for ``lambda_w`` and
    ``block_multiplicity`` the number of such blocks.
    """

    p: int
    block_multiplicity: int
    w: np.ndarray
    a: np.ndarray
    expected_factor_a: EigenPair
    lambda_w: float
    basis: np.ndarray = field(repr=False)
    max_condition: float = 100.0

    def __post_init__(self):
        cond = np.linalg.cond(self.basis)
        if not np.isfinite(cond) or cond > self.max_condition:
            raise IllConditionedError(f"basis condition number {cond:.3g} > {self.max_condition}")

    @property
    def lambda_s(self) -> float:
        return self.lambda_w * self.expected_factor_a.value_re


def _random_orthogonal(rng, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal((n, n)))
    return q * np.sign(np.diag(r))


def make_jordan_case(p: int, multiplicity: int, seed: int = 0, lambda_w: float = 1.1,
                     a_spectrum=(1.0, 0.6, -0.5, 0.4, 0.3, -0.2),
                     tail=(0.5, -0.35)) -> JordanTestCase:
    """Build ``W`` with ``multiplicity`` Jordan blocks of size ``p`` for
    ``lambda_w`` (plus smaller simple eigenvalues ``tail``) and a symmetric
    ``A`` with the given spectrum."""
    rng = stream(f"verify:jordan:{p}:{multiplicity}:{seed}")
    blocks = []
    for _ in range(multiplicity):
        block = lambda_w * np.eye(p) + np.diag(np.ones(p - 1), 1)
        blocks.append(block)
    blocks.extend(np.array([[t]]) for t in tail)
    jordan = scipy.linalg.block_diag(*blocks)
    d = jordan.shape[0]
    basis = _random_orthogonal(rng, d) @ np.diag(np.logspace(0, 1, d)) @ _random_orthogonal(rng, d)
    w = basis @ jordan @ np.linalg.inv(basis)

    q = _random_orthogonal(rng, len(a_spectrum))
    a = q @ np.diag(a_spectrum) @ q.T
    pair = EigenPair.checked(a, a_spectrum[0], q[:, 0])
    return JordanTestCase(p, multiplicity, w, a, pair, lambda_w, basis)


def check_jordan_case(case: JordanTestCase, k_max: int = 200, seed: int = 0,
                      column_tol: float = 1e-5, ratio_bounds=(0.5, 2.0)) -> dict[str, Any]:
    """Power iteration on ``kron(w, a)`` for a constructed Jordan structure.

    Returns one report case: the iterate reshaped to ``n x d`` must have every
    column parallel to ``v1(A)``, and ``||S^k x0|| / q_k`` with
    ``q_k = C(k, p-1) lambda^(k-p+1)`` must stay within ``ratio_bounds`` of its
    value at ``k_max / 2`` over the second half of the run.
    """
    n, d = case.a.shape[0], case.w.shape[0]
    s = kron(case.w, case.a)
    rng = stream(f"verify:jordan-x0:{seed}")
    x = rng.normal(n * d)
    log_norm = math.log(np.linalg.norm(x))
    x /= np.linalg.norm(x)
    lam = case.lambda_s
    log_ratio = []
    betas = []
    for k in range(1, k_max + 1):
        y = s @ x
        norm = np.linalg.norm(y)
        log_norm += math.log(norm)
        x = y / norm
        log_q = math.log(math.comb(k, case.p - 1)) + (k - case.p + 1) * math.log(abs(lam))
        log_ratio.append(log_norm - log_q)
        betas.append(float(np.max(np.abs(x))))
    half = k_max // 2
    rel = np.exp(np.array(log_ratio[half - 1:]) - log_ratio[half - 1])
    mat = unvectorize(x, n, d)
    v = case.expected_factor_a.vector
    column_residual = float(np.max(np.linalg.norm(mat - np.outer(v, v @ mat), axis=0)))
    ok = (column_residual <= column_tol and ratio_bounds[0] <= rel.min()
          and rel.max() <= ratio_bounds[1] and np.isfinite(max(betas)))
    return {
        "case": f"p={case.p} multiplicity={case.block_multiplicity}",
        "passed": bool(ok),
        "column_residual": column_residual,
        "ratio_min": float(rel.min()),
        "ratio_max": float(rel.max()),
        "max_abs_beta": max(betas),
    }


def check_jordan_cases(k_max: int = 200, seed: int = 0) -> CheckReport:
    report = CheckReport("jordan_case")
    for p in (1, 2):
        for mult in (1, 2):
            report.cases.append(check_jordan_case(make_jordan_case(p, mult, seed), k_max, seed))
    return report


# --- Dirichlet energy ---------------------------------------------------------

def _sigma_max(w: np.ndarray) -> Optional[float]:
    try:
        res = power_iteration(w.T @ w, np.ones(w.shape[1]), 50_000, 1e-14)
    except NonDominantSpectrumError:
        return None
    return math.sqrt(max(res.dominant.value_re, 0.0)) if res.converged else None


def check_energy_bound(trials: int = 100, seed: int = 0, d: int = 4,
                       graph: Optional[Graph] = None) -> CheckReport:
    """``E(A X W) <= lambda_2(A)^2 sigma_1(W)^2 E(X)`` on a small connected graph."""
    report = CheckReport("energy_bound")
    g = graph or cycle_with_chords(10)
    adj = structure_matrix(g, StructureKind.ADJ_SYM_NORM).matrix
    lap = structure_matrix(g, StructureKind.LAP_SYM)
    spectrum = dense_eigenvalues(adj)
    lam2 = abs(spectrum[1].value)
    v1 = _unit(g.sqrt_degree_vector())
    rng = stream(f"verify:energy:{seed}")

    def project(x):
        return x - np.outer(v1, v1 @ x)

    def energy(x):
        return dirichlet_energy(x, lap)

    x = project(rng.normal((g.n, d)))
    zero = energy(adj @ x @ np.zeros((d, d)))
    report.add("W = 0", zero == 0.0, lhs=zero)
    lhs, rhs = energy(adj @ x), lam2 ** 2 * energy(x)
    report.add("W = I", lhs <= rhs * (1 + 1e-10), lhs=lhs, rhs=rhs, lambda_2=lam2)

    violations = []
    redraws = 0
    for t in range(trials):
        while True:
            w = rng.normal((d, d))
            sigma = _sigma_max(w)
            if sigma is not None:
                break
            redraws += 1
        x = project(rng.normal((g.n, d)))
        lhs = energy(adj @ x @ w)
        rhs = lam2 ** 2 * sigma ** 2 * energy(x)
        if lhs > rhs * (1 + 1e-9) + 1e-12:
            violations.append({"trial": t, "W": w.tolist(), "X": x.tolist(), "lhs": lhs, "rhs": rhs})
    report.add(f"{trials} random trials", not violations, violations=violations, redraws=redraws)

    # sigma_1(W) > 1 / lambda_2: the bound still holds but the energy can grow
    c = 2.0 / lam2
    v2 = spectrum[1].vector
    x = np.outer(v2, rng.normal(d)) + 1e-3 * project(rng.normal((g.n, d)))
    before, after = energy(x), energy(adj @ x @ (c * np.eye(d)))
    report.add("over-separation", after > before and after <= (lam2 * c) ** 2 * before * (1 + 1e-9),
               energy_before=before, energy_after=after, scale=c)
    return report


def check_energy_rod_implication(samples: int = 20, seed: int = 0, d: int = 8,
                                 etas=(0.0, 1e-6, 1e-3)) -> CheckReport:
    """States ``v c^T + eta * noise`` near the Laplacian null space have small ROD."""
    report = CheckReport("energy_rod_implication")
    g = karate_club()
    pairs = (
        ("LAP_UNNORM / ones", StructureKind.LAP_UNNORM, np.ones(g.n)),
        ("LAP_SYM / sqrt-degree", StructureKind.LAP_SYM, g.sqrt_degree_vector()),
    )
    for label, kind, vec in pairs:
        lap = structure_matrix(g, kind)
        rng = stream(f"verify:implication:{kind.value}:{seed}")
        draws = [(rng.normal(d), rng.normal((g.n, d))) for _ in range(samples)]
        means = []
        for eta in etas:
            es, rods = [], []
            for c, noise in draws:
                x = np.outer(_unit(vec), c) + eta * noise
                es.append(normalized_dirichlet_energy(x, lap))
                rods.append(rank_one_distance(x))
            es, rods = np.array(es), np.array(rods)
            means.append((es.mean(), rods.mean()))
            if eta == 0:
                report.add(f"{label} eta=0", es.max() <= 1e-10 and rods.max() <= 1e-10,
                           max_energy=es.max(), max_rod=rods.max())
            else:
                constant = float(np.max(rods / np.sqrt(es)))
                report.add(f"{label} eta={eta:g}",
                           es.min() > 0 and rods.min() > 0 and constant <= ROD_ENERGY_CONSTANT,
                           mean_energy=es.mean(), mean_rod=rods.mean(), rod_over_sqrt_energy=constant)
        monotone = all(a[0] < b[0] and a[1] < b[1] for a, b in zip(means, means[1:]))
        report.add(f"{label} monotone in eta", monotone, means=[list(m) for m in means])
    return report


CHECKS: dict[str, Callable[[], CheckReport]] = {
    "power_iteration": check_power_iteration,
    "kron_power": check_kron_power,
    "matrix_remark": check_matrix_remark,
    "over_smoothing": check_over_smoothing,
    "jordan_case": check_jordan_cases,
    "energy_bound": check_energy_bound,
    "energy_rod_implication": check_energy_rod_implication,
}


def run_all_checks() -> list[CheckReport]:
    """Every check family with its default seed, in a fixed order."""
    reports = []
    for name in CHECK_NAMES:
        try:
            reports.append(CHECKS[name]())
        except Exception as exc:  # a crashing check is a failed check
            failed = CheckReport(name)
            failed.add("execution", False, error=f"{type(exc).__name__}: {exc}")
            reports.append(failed)
    return reports
