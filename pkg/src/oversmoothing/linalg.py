"""Dense linear algebra: Kronecker products, vectorization, power iteration and a
small shifted-QR eigenvalue solver used as an oracle.

Matrices are plain 2-D ``float64`` numpy arrays; vectors are 1-D arrays.  All
functions are pure.
"""

from __future__ import annotations

import contextlib
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np
import scipy.linalg

from .errors import (
    NoConvergenceError,
    NonDominantSpectrumError,
    SizeLimitError,
    ZeroComponentError,
)

MAX_ENTRIES = 1 << 28
MAX_ORACLE_SIZE = 64

# power iteration stall detection: the step size must shrink by this factor
# over this many iterations or the spectrum is declared non-dominant
STALL_FACTOR = 0.999
STALL_WINDOW = 50

_FAULTS: set[str] = set()


@contextlib.contextmanager
def inject_fault(name: str) -> Iterator[None]:
    """Deliberately corrupt a primitive while the context is active.

    Only ``"kron"`` is recognized: the first entry of every Kronecker product
    has its sign flipped.  Used to self-test the verification suite.
    """
    if name not in {"kron"}:
        raise ValueError(f"unknown fault {name!r}")
    _FAULTS.add(name)
    try:
        yield
    finally:
        _FAULTS.discard(name)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; block ``(i, j)`` of the result is ``a[i, j] * b``.

    1-D inputs are treated as column vectors and a 1-D result is returned when
    both inputs are 1-D.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    vector_out = a.ndim == 1 and b.ndim == 1
    a2 = a.reshape(-1, 1) if a.ndim == 1 else a
    b2 = b.reshape(-1, 1) if b.ndim == 1 else b
    (ra, ca), (rb, cb) = a2.shape, b2.shape
    if ra * rb * ca * cb > MAX_ENTRIES:
        raise SizeLimitError(
            f"kron of {a2.shape} and {b2.shape} needs {ra * rb * ca * cb} entries"
        )
    out = (a2[:, None, :, None] * b2[None, :, None, :]).reshape(ra * rb, ca * cb)
    if "kron" in _FAULTS and out.size:
        out[0, 0] = -out[0, 0]
    return out.reshape(-1) if vector_out else out


def vectorize(m: np.ndarray) -> np.ndarray:
    """Stack the columns of ``m``: entry ``k * rows + i`` is ``m[i, k]``."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim == 1:
        return m.copy()
    return m.reshape(-1, order="F")


def unvectorize(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    return np.asarray(v).reshape(cols, rows).T.copy()


def frobenius_norm(m: np.ndarray) -> float:
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    scale = float(np.max(np.abs(m)))
    if scale == 0.0 or not np.isfinite(scale):
        return scale
    return scale * float(np.sqrt(np.sum(np.abs(m / scale) ** 2)))


def _fix_sign(v: np.ndarray) -> np.ndarray:
    """Rotate ``v`` so its largest-magnitude entry is real and positive."""
    k = int(np.argmax(np.abs(v)))
    pivot = v[k]
    if pivot == 0:
        return v
    phase = pivot / abs(pivot)
    out = v / phase
    if np.isrealobj(v):
        return out.real if np.iscomplexobj(out) else out
    return out


@dataclass(frozen=True)
class EigenPair:
    """An eigenvalue and, when available, a unit eigenvector.

    Use :meth:`checked` to build a pair whose residual is validated against the
    matrix it came from.
    """

    value: complex
    vector: Optional[np.ndarray] = field(default=None, compare=False)

    @property
    def value_re(self) -> float:
        return float(np.real(self.value))

    @property
    def value_im(self) -> float:
        return float(np.imag(self.value))

    @property
    def is_real(self) -> bool:
        return self.value_im == 0.0

    @classmethod
    def checked(cls, m: np.ndarray, value: complex, vector: np.ndarray,
                rtol: float = 1e-8) -> "EigenPair":
        vector = np.asarray(vector)
        norm = np.linalg.norm(vector)
        if norm == 0:
            raise ValueError("eigenvector must be nonzero")
        vector = _fix_sign(vector / norm)
        residual = np.linalg.norm(m @ vector - value * vector)
        bound = rtol * max(frobenius_norm(m), np.finfo(float).tiny)
        if residual > bound:
            raise ValueError(f"eigen-residual {residual:.3e} exceeds {bound:.3e}")
        return cls(value, vector)

    def residual(self, m: np.ndarray) -> float:
        return float(np.linalg.norm(m @ self.vector - self.value * self.vector))


@dataclass(frozen=True)
class PowerIterationResult:
    dominant: EigenPair
    residual_norms: np.ndarray
    beta_signs: np.ndarray
    iterations: int
    converged: bool
    error_estimate: float
    iterates: np.ndarray = field(repr=False, compare=False)


def power_iteration(s: np.ndarray, x0: np.ndarray, max_iters: int = 1000,
                    tol: float = 1e-10) -> PowerIterationResult:
    """Repeatedly apply ``s`` to ``x0`` with Euclidean normalization.

    The raw normalized iterates ``s^k x0 / ||s^k x0||`` keep the sign factor of
    the dominant eigenvalue; ``beta_signs[k]`` records it relative to the final
    direction, whose largest-magnitude entry is made positive.
    ``residual_norms[k]`` is the distance of iterate ``k+1`` from
    ``beta_signs[k]`` times that direction.

    Convergence uses the a-posteriori estimate ``d_k * rho / (1 - rho)`` where
    ``d_k`` is the sign-insensitive step between consecutive iterates and
    ``rho`` their measured contraction rate over the last ten steps.

    Raises:
        NonDominantSpectrumError: the largest step of the last ``STALL_WINDOW``
            iterations is not below ``STALL_FACTOR`` times the largest of the
            window before.
        ZeroComponentError: ``s @ x`` vanishes to roundoff.
    """
    s = np.asarray(s, dtype=np.float64)
    x = np.asarray(x0, dtype=np.float64).reshape(-1)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError(f"power iteration needs a square matrix, got {s.shape}")
    if x.shape[0] != s.shape[0]:
        raise ValueError(f"x0 has length {x.shape[0]}, matrix is {s.shape}")
    x_norm = np.linalg.norm(x)
    if x_norm == 0:
        raise ZeroComponentError("x0 is the zero vector")
    x = x / x_norm
    s_norm = frobenius_norm(s)
    floor = 1e-14 * s_norm

    iterates = []
    steps: list[float] = []
    converged = False
    estimate = np.inf
    for k in range(1, max_iters + 1):
        y = s @ x
        y_norm = np.linalg.norm(y)
        if y_norm <= floor:
            raise ZeroComponentError(f"iterate vanished at step {k}")
        z = y / y_norm
        step = min(np.linalg.norm(z - x), np.linalg.norm(z + x))
        iterates.append(z)
        steps.append(step)
        x = z
        if step <= 1e-15:
            converged, estimate = True, step
            break
        if k > 10 and steps[-11] > 0:
            rate = (step / steps[-11]) ** 0.1
            if rate < 1.0:
                estimate = step * rate / (1.0 - rate)
                if step <= tol and estimate <= tol:
                    converged = True
                    break
        if k >= 2 * STALL_WINDOW and step > 1e-10 and _stalled(steps):
            raise NonDominantSpectrumError(
                f"step {step:.3e} did not decay over {STALL_WINDOW} iterations "
                "(|lambda_1| = |lambda_2|?)"
            )

    stacked = np.array(iterates)
    direction = _fix_sign(stacked[-1])
    signs = np.sign(stacked @ direction)
    signs[signs == 0] = 1.0
    residuals = np.linalg.norm(stacked - signs[:, None] * direction[None, :], axis=1)
    value = float(direction @ s @ direction)
    return PowerIterationResult(
        dominant=EigenPair(value, direction),
        residual_norms=residuals,
        beta_signs=signs,
        iterations=len(iterates),
        converged=converged,
        error_estimate=float(estimate),
        iterates=stacked,
    )


def _stalled(steps: list[float]) -> bool:
    # window maxima rather than endpoints: complex subdominant pairs make the
    # step oscillate
    recent = max(steps[-STALL_WINDOW:])
    previous = max(steps[-2 * STALL_WINDOW:-STALL_WINDOW])
    return recent > STALL_FACTOR * previous


def _wilkinson_shift(h: np.ndarray) -> complex:
    a, b, c, d = h[0, 0], h[0, 1], h[1, 0], h[1, 1]
    tr = a + d
    disc = np.sqrt((a - d) ** 2 / 4 + b * c)
    r1, r2 = tr / 2 + disc, tr / 2 - disc
    return r1 if abs(r1 - d) <= abs(r2 - d) else r2


def _qr_eigenvalues(m: np.ndarray, max_iters: int) -> list[complex]:
    h = scipy.linalg.hessenberg(m).astype(np.complex128)
    eps = np.finfo(float).eps
    values: list[complex] = []
    total = 0
    since_deflation = 0
    while h.shape[0] > 0:
        a = h.shape[0]
        if a == 1:
            values.append(complex(h[0, 0]))
            break
        sub = abs(h[a - 1, a - 2])
        if sub <= eps * (abs(h[a - 1, a - 1]) + abs(h[a - 2, a - 2])) or sub < 1e-300:
            values.append(complex(h[a - 1, a - 1]))
            h = h[: a - 1, : a - 1]
            since_deflation = 0
            continue
        total += 1
        since_deflation += 1
        if total > max_iters:
            raise NoConvergenceError(f"shifted QR did not converge in {max_iters} steps")
        if since_deflation % 11 == 0:
            # exceptional shift breaks cycles of the Wilkinson shift
            mu = h[a - 1, a - 1] + 1.5 * sub * (1 + 1j)
        else:
            mu = _wilkinson_shift(h[a - 2:, a - 2:])
        ident = np.eye(a)
        q, r = np.linalg.qr(h - mu * ident)
        h = r @ q + mu * ident
    return values


def dense_eigenvalues(m: np.ndarray, max_iters: int = 10_000) -> list[EigenPair]:
    """All eigenvalues of a small dense matrix, sorted by decreasing magnitude.

    Hessenberg reduction followed by complex single-shift QR with deflation.
    Magnitude ties put the larger real part first.  Real eigenvalues that are
    simple get a unit eigenvector from the null space of ``m - lambda I``.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got {m.shape}")
    n = m.shape[0]
    if n > MAX_ORACLE_SIZE:
        raise SizeLimitError(f"oracle eigensolver is limited to {MAX_ORACLE_SIZE} rows")
    if n == 0:
        return []
    raw = _qr_eigenvalues(m, max_iters)
    scale = max(max(abs(v) for v in raw), np.finfo(float).tiny)
    cleaned = []
    for v in raw:
        if abs(v.imag) <= 1e-12 * scale:
            v = complex(v.real, 0.0)
        cleaned.append(v)
    cleaned.sort(key=lambda v: (-round(abs(v) / scale, 11), -v.real, -v.imag))

    pairs = []
    for i, v in enumerate(cleaned):
        vector = None
        simple = all(abs(v - w) > 1e-6 * scale for j, w in enumerate(cleaned) if j != i)
        if v.imag == 0.0 and simple:
            _, _, vh = np.linalg.svd(m - v.real * np.eye(n))
            vector = _fix_sign(vh[-1])
            v = v.real
        pairs.append(EigenPair(v, vector))
    return pairs


def spectral_gap(m: np.ndarray) -> float:
    """``|lambda_1| / |lambda_2|`` from the oracle (``inf`` if ``lambda_2 = 0``)."""
    values = dense_eigenvalues(m)
    if len(values) < 2:
        return np.inf
    second = abs(values[1].value)
    return np.inf if second == 0 else abs(values[0].value) / second


def dominant_pair(m: np.ndarray) -> EigenPair:
    """Dominant eigenpair of ``m``, required to be real and strictly dominant."""
    values = dense_eigenvalues(m)
    first = values[0]
    if len(values) > 1 and abs(first.value) <= abs(values[1].value) * (1 + 1e-10):
        raise NonDominantSpectrumError(
            f"|lambda_1| = {abs(first.value):.6g} does not dominate |lambda_2| = "
            f"{abs(values[1].value):.6g}"
        )
    if not first.is_real or first.vector is None:
        raise NonDominantSpectrumError("dominant eigenvalue is not real and simple")
    return EigenPair.checked(m, first.value_re, first.vector)


def dominant_left_right_factors(s_w: np.ndarray, s_a: np.ndarray
                                ) -> tuple[EigenPair, EigenPair, float]:
    """Dominant eigenpairs of both Kronecker factors and the product eigenvalue.

    ``kron(v_w, v_a)`` is an eigenvector of ``kron(s_w, s_a)`` for the returned
    product; the residual is checked through the mixed-product identity.
    """
    pw = dominant_pair(s_w)
    pa = dominant_pair(s_a)
    product = pw.value_re * pa.value_re
    v = kron(pw.vector, pa.vector)
    image = kron(np.asarray(s_w) @ pw.vector, np.asarray(s_a) @ pa.vector)
    residual = np.linalg.norm(image - product * v)
    bound = 1e-8 * frobenius_norm(s_w) * frobenius_norm(s_a)
    if residual > bound:
        raise ValueError(f"Kronecker eigen-residual {residual:.3e} exceeds {bound:.3e}")
    return pw, pa, product


def random_gapped_matrix(rng, size: int, min_gap: float = 1.05,
                         max_tries: int = 1000) -> np.ndarray:
    """Standard-normal matrix, redrawn until its dominant eigenvalue is real and
    ``|lambda_1| >= min_gap * |lambda_2|``.

    ``rng`` is anything with a ``normal(shape)`` method.
    """
    for _ in range(max_tries):
        m = rng.normal((size, size))
        values = dense_eigenvalues(m)
        if not values[0].is_real:
            continue
        if size == 1 or abs(values[0].value) >= min_gap * abs(values[1].value):
            return m
    raise RuntimeError(f"no {size}x{size} matrix with gap {min_gap} in {max_tries} draws")
