"""Small dense kernel: Hermitian matrices, Cholesky, Jacobi eigensolver, quadrature.

Matrices here are Gram matrices of a handful of orbit vectors (order at most
64), so every routine favours robustness and exact control of tolerances over
speed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence, Tuple

import numpy as np
from scipy.linalg import solve_triangular

from .constants import HERMITIAN_TOL, JACOBI_SWEEPS, JACOBI_TOL, MAX_ORDER, PIVOT_TOL
from .exceptions import ContractViolation, NoConvergence, NotPositiveDefinite

logger = logging.getLogger(__name__)


def check_finite(value: complex, *, name: str = "value") -> complex:
    """Reject NaN/Inf scalars at public boundaries."""
    value = complex(value)
    if not (np.isfinite(value.real) and np.isfinite(value.imag)):
        raise ContractViolation(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True, eq=False)
class HermMatrix:
    """Immutable Hermitian matrix with validated symmetry."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        data = np.array(self.entries, dtype=complex)
        if data.ndim != 2 or data.shape[0] != data.shape[1] or data.shape[0] == 0:
            raise ContractViolation(f"HermMatrix needs a non-empty square array, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ContractViolation("HermMatrix entries must be finite")
        scale = float(np.max(np.abs(data), initial=0.0))
        asymmetry = float(np.max(np.abs(data - data.conj().T), initial=0.0))
        if asymmetry > HERMITIAN_TOL * scale:
            raise ContractViolation(f"matrix is not Hermitian (asymmetry {asymmetry:.3e})")
        data.setflags(write=False)
        object.__setattr__(self, "entries", data)

    @classmethod
    def from_array(cls, values: np.ndarray) -> "HermMatrix":
        """Symmetrise a matrix that is Hermitian up to floating rounding."""
        data = np.asarray(values, dtype=complex)
        return cls(0.5 * (data + data.conj().T))

    @classmethod
    def identity(cls, order: int) -> "HermMatrix":
        return cls(np.eye(order, dtype=complex))

    @classmethod
    def diagonal(cls, values: Sequence[float]) -> "HermMatrix":
        return cls(np.diag(np.asarray(values, dtype=complex)))

    @property
    def order(self) -> int:
        return int(self.entries.shape[0])

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.entries)))

    def leading(self, size: int) -> "HermMatrix":
        """Leading principal submatrix of the given size."""
        return HermMatrix(self.entries[:size, :size])


class EigenPairs(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray


def _check_order(order: int) -> None:
    if order > MAX_ORDER:
        raise ContractViolation(f"order {order} exceeds the dense kernel limit {MAX_ORDER}")


# ----------------------------------------------------------------------
# Cholesky
# ----------------------------------------------------------------------
def cholesky(matrix: HermMatrix) -> np.ndarray:
    """Return the lower-triangular L with L @ L^H == matrix."""
    _check_order(matrix.order)
    a = matrix.entries
    order = matrix.order
    threshold = order * PIVOT_TOL * max(float(np.max(a.diagonal().real)), 0.0)
    lower = np.zeros((order, order), dtype=complex)
    for j in range(order):
        row = lower[j, :j]
        pivot = float(a[j, j].real - np.sum(np.abs(row) ** 2))
        if pivot <= threshold:
            raise NotPositiveDefinite(
                f"pivot {pivot:.3e} at index {j} is below {threshold:.3e}", pivot=pivot, index=j
            )
        lower[j, j] = np.sqrt(pivot)
        if j + 1 < order:
            lower[j + 1 :, j] = (a[j + 1 :, j] - lower[j + 1 :, :j] @ row.conj()) / lower[j, j]
    return lower


# ----------------------------------------------------------------------
# Cyclic Jacobi (round-robin ordering, disjoint pairs rotated together)
# ----------------------------------------------------------------------
@lru_cache(maxsize=None)
def _round_robin(order: int) -> Tuple[Tuple[np.ndarray, np.ndarray], ...]:
    size = order + order % 2
    players = list(range(size))
    rounds = []
    for _ in range(size - 1):
        pairs = [
            (min(players[i], players[size - 1 - i]), max(players[i], players[size - 1 - i]))
            for i in range(size // 2)
        ]
        pairs = [(p, q) for p, q in pairs if q < order]
        rounds.append((np.array([p for p, _ in pairs]), np.array([q for _, q in pairs])))
        players = [players[0], players[-1]] + players[1:-1]
    return tuple(rounds)


def _rotate(a: np.ndarray, v: np.ndarray, p: np.ndarray, q: np.ndarray) -> None:
    apq = a[p, q]
    r = np.abs(apq)
    active = r > 0.0
    if not np.any(active):
        return
    p, q, apq, r = p[active], q[active], apq[active], r[active]
    phase = np.conj(apq) / r
    theta = (a[q, q].real - a[p, p].real) / (2.0 * r)
    t = np.where(theta >= 0.0, 1.0, -1.0) / (np.abs(theta) + np.hypot(1.0, theta))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c

    for target in (a, v):
        col_p = target[:, p].copy()
        col_q = target[:, q].copy()
        target[:, p] = col_p * c + col_q * (-s * phase)
        target[:, q] = col_p * s + col_q * (c * phase)

    row_p = a[p, :].copy()
    row_q = a[q, :].copy()
    a[p, :] = c[:, None] * row_p - (s * np.conj(phase))[:, None] * row_q
    a[q, :] = s[:, None] * row_p + (c * np.conj(phase))[:, None] * row_q

    a[p, q] = 0.0
    a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real


def eigh(matrix: HermMatrix) -> EigenPairs:
    """Ascending eigenvalues and orthonormal eigenvectors (columns)."""
    _check_order(matrix.order)
    a = np.array(matrix.entries, dtype=complex)
    order = matrix.order
    v = np.eye(order, dtype=complex)
    scale = float(np.linalg.norm(a))
    if order > 1 and scale > 0.0:
        rounds = _round_robin(order)
        for sweep in range(JACOBI_SWEEPS + 1):
            off = float(np.linalg.norm(a - np.diag(np.diag(a))))
            if off <= JACOBI_TOL * scale:
                logger.debug("jacobi converged after %d sweeps (order %d)", sweep, order)
                break
            if sweep == JACOBI_SWEEPS:
                raise NoConvergence(
                    f"Jacobi did not converge in {JACOBI_SWEEPS} sweeps (off-diagonal {off:.3e})",
                    sweeps=JACOBI_SWEEPS,
                )
            for p, q in rounds:
                _rotate(a, v, p, q)
    values = a.diagonal().real.copy()
    order_idx = np.argsort(values, kind="stable")
    return EigenPairs(values[order_idx], v[:, order_idx])


def gen_eigh(a: HermMatrix, b: HermMatrix) -> EigenPairs:
    """Solve A v = mu B v for positive definite B by Cholesky reduction."""
    if a.order != b.order:
        raise ContractViolation(f"order mismatch: {a.order} vs {b.order}")
    lower = cholesky(b)
    left = solve_triangular(lower, a.entries, lower=True)
    reduced = solve_triangular(lower, left.conj().T, lower=True)
    pairs = eigh(HermMatrix.from_array(reduced))
    vectors = solve_triangular(lower.conj().T, pairs.vectors, lower=False)
    return EigenPairs(pairs.values, vectors)


# ----------------------------------------------------------------------
# Quadrature
# ----------------------------------------------------------------------
def trapezoid(samples: Sequence[complex], step: float) -> complex:
    """Composite trapezoid rule on uniformly spaced samples."""
    values = np.asarray(samples, dtype=complex)
    if values.ndim != 1 or values.size < 2:
        raise ContractViolation("trapezoid needs at least two samples")
    if not step > 0.0:
        raise ContractViolation(f"step must be positive, got {step}")
    return complex(step * (np.sum(values) - 0.5 * (values[0] + values[-1])))


_STENCIL = 6


@lru_cache(maxsize=None)
def _panel_weights() -> np.ndarray:
    # Row o integrates the degree-5 interpolant through nodes 0..5 over [o, o+1].
    nodes = np.arange(_STENCIL, dtype=float)
    powers = np.arange(_STENCIL)
    vandermonde = nodes[None, :] ** powers[:, None]
    rows = []
    for offset in range(_STENCIL - 1):
        moments = ((offset + 1.0) ** (powers + 1) - float(offset) ** (powers + 1)) / (powers + 1)
        rows.append(np.linalg.solve(vandermonde, moments))
    return np.array(rows)


def cumulative_quadrature(samples: Sequence[complex], step: float) -> np.ndarray:
    """Prefix integrals F_j of uniformly spaced samples, F_0 = 0.

    Each panel is integrated with a six-point Lagrange stencil, centred in the
    interior and clamped at both ends, so the rule is exact for quintics.
    """
    values = np.asarray(samples, dtype=complex)
    if values.ndim != 1 or values.size < 2:
        raise ContractViolation("cumulative quadrature needs at least two samples")
    if not step > 0.0:
        raise ContractViolation(f"step must be positive, got {step}")
    panels = values.size - 1
    if panels < _STENCIL - 1:
        increments = 0.5 * step * (values[:-1] + values[1:])
    else:
        index = np.arange(panels)
        start = np.clip(index - 2, 0, panels - (_STENCIL - 1))
        offset = index - start
        gathered = values[start[:, None] + np.arange(_STENCIL)[None, :]]
        increments = step * np.sum(_panel_weights()[offset] * gathered, axis=1)
    return np.concatenate(([0.0 + 0.0j], np.cumsum(increments)))
