"""Dense vectors, SPD operators and spectra.

Everything here works on float64 numpy arrays. Operators come in two
flavours: :class:`DiagonalOperator` (the eigenvalue list *is* the operator)
and :class:`DenseOperator` (full symmetric ``n x n`` matrix).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np


class ContractViolation(ValueError):
    """Raised when an operation is called outside its precondition."""


def as_vector(v, name: str = "v") -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise ContractViolation(f"{name} must be one-dimensional, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class Spectrum:
    """Sorted positive eigenvalues with the derived extremes."""

    eigenvalues: np.ndarray

    def __post_init__(self):
        ev = np.sort(np.asarray(self.eigenvalues, dtype=np.float64).ravel())
        if ev.size == 0:
            raise ContractViolation("spectrum needs at least one eigenvalue")
        if not np.all(np.isfinite(ev)) or ev[0] <= 0.0:
            raise ContractViolation("eigenvalues must be finite and strictly positive")
        ev.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)

    @property
    def mu(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def L(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def kappa(self) -> float:
        return self.L / self.mu

    @property
    def n(self) -> int:
        return int(self.eigenvalues.size)

    def scaled(self, factor: float) -> "Spectrum":
        return Spectrum(self.eigenvalues * factor)

    @classmethod
    def interval(cls, mu: float, L: float) -> "Spectrum":
        """Two-point spectrum ``{mu, L}``; the extremes are all GD needs."""
        return cls(np.array([mu, L], dtype=np.float64))


@dataclass(frozen=True)
class DiagonalOperator:
    eigenvalues: np.ndarray

    def __post_init__(self):
        ev = as_vector(self.eigenvalues, "eigenvalues").copy()
        if not np.all(np.isfinite(ev)) or np.any(ev <= 0.0):
            raise ContractViolation("diagonal operator needs strictly positive entries")
        ev.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)

    @property
    def dimension(self) -> int:
        return int(self.eigenvalues.size)

    def spectrum(self) -> Spectrum:
        return Spectrum(self.eigenvalues)

    def scaled(self, factor: float) -> "DiagonalOperator":
        return DiagonalOperator(self.eigenvalues * factor)


@dataclass(frozen=True)
class DenseOperator:
    matrix: np.ndarray
    rtol: float = field(default=1e-12, repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ContractViolation(f"dense operator must be square, got shape {m.shape}")
        scale = max(float(np.max(np.abs(m))), np.finfo(float).tiny) if m.size else 1.0
        if np.max(np.abs(m - m.T), initial=0.0) > self.rtol * scale:
            raise ContractViolation("dense operator is not symmetric")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dimension(self) -> int:
        return int(self.matrix.shape[0])

    def spectrum(self) -> Spectrum:
        return Spectrum(np.linalg.eigvalsh(self.matrix))

    def scaled(self, factor: float) -> "DenseOperator":
        return DenseOperator(self.matrix * factor)


SpdOperator = Union[DiagonalOperator, DenseOperator]


def apply(op: SpdOperator, v) -> np.ndarray:
    """Return ``A @ v``."""
    v = as_vector(v)
    if v.size != op.dimension:
        raise ContractViolation(f"dimension mismatch: operator {op.dimension}, vector {v.size}")
    if isinstance(op, DiagonalOperator):
        return op.eigenvalues * v
    return op.matrix @ v


def residual(op: SpdOperator, b, x) -> np.ndarray:
    """Return ``b - A x`` (the negative gradient of the quadratic)."""
    b = as_vector(b, "b")
    if b.size != op.dimension:
        raise ContractViolation(f"dimension mismatch: operator {op.dimension}, b {b.size}")
    return b - apply(op, x)


def norm2(v) -> float:
    return float(np.linalg.norm(np.asarray(v, dtype=np.float64).ravel()))
