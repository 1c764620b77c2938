"""Quadratic objectives ``f(x) = x^T A x / 2 - b^T x`` and spectrum generators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..linalg import (
    ContractViolation,
    DenseOperator,
    DiagonalOperator,
    SpdOperator,
    Spectrum,
    apply,
    as_vector,
    norm2,
    residual,
)


@dataclass(frozen=True)
class QuadraticProblem:
    operator: SpdOperator
    b: np.ndarray
    known_minimizer: Optional[np.ndarray] = None

    def __post_init__(self):
        b = as_vector(self.b, "b")
        if b.size != self.operator.dimension:
            raise ContractViolation("b does not match the operator dimension")
        object.__setattr__(self, "b", b)
        if self.known_minimizer is not None:
            xs = as_vector(self.known_minimizer, "known_minimizer")
            bn = norm2(b)
            if norm2(residual(self.operator, b, xs)) > 1e-10 * (bn if bn > 0 else 1.0):
                raise ContractViolation("known_minimizer does not solve A x = b")
            object.__setattr__(self, "known_minimizer", xs)

    @property
    def dimension(self) -> int:
        return self.operator.dimension

    def value(self, x) -> float:
        x = as_vector(x, "x")
        return 0.5 * float(x @ apply(self.operator, x)) - float(self.b @ x)

    def grad(self, x) -> np.ndarray:
        return -residual(self.operator, self.b, x)

    def hvp(self, x, v) -> np.ndarray:
        return apply(self.operator, v)

    def spectrum(self) -> Spectrum:
        return self.operator.spectrum()

    def minimizer(self) -> np.ndarray:
        if self.known_minimizer is not None:
            return self.known_minimizer
        if isinstance(self.operator, DiagonalOperator):
            return self.b / self.operator.eigenvalues
        return np.linalg.solve(self.operator.matrix, self.b)

    def rescaled(self, L_hat: float) -> "QuadraticProblem":
        if L_hat == 1.0:
            return self
        op = self.operator.scaled(1.0 / L_hat)
        b = self.b / L_hat
        xs = self.known_minimizer
        if xs is not None and norm2(residual(op, b, xs)) > 1e-10 * max(norm2(b), 1.0):
            xs = None
        return QuadraticProblem(op, b, xs)


def quadratic_from_spectrum(spec: Spectrum, b=None) -> QuadraticProblem:
    """Diagonal quadratic with the given eigenvalues; ``b`` defaults to zero."""
    lam = spec.eigenvalues
    b = np.zeros(lam.size) if b is None else as_vector(b, "b")
    if b.size != lam.size:
        raise ContractViolation("b does not match the spectrum size")
    return QuadraticProblem(DiagonalOperator(lam), b, b / lam)


def dense_quadratic(matrix, b) -> QuadraticProblem:
    return QuadraticProblem(DenseOperator(matrix), b)


SPECTRUM_KINDS = ("uniform", "logspace", "cluster", "theorem24")


@dataclass(frozen=True)
class SpectrumSpec:
    """Recipe for a generated eigenvalue list.

    ``params`` per kind:

    * ``uniform``: ``lo``, ``hi`` -- evenly spaced values;
    * ``logspace``: ``lo_exp``, ``hi_exp`` -- ``10**linspace(lo_exp, hi_exp)``;
    * ``cluster``: ``bulk_range``, ``outlier_range``, ``outlier_fraction``;
    * ``theorem24``: ``case`` (``"L1"``/``"L2"``), ``mu_range`` and
      optionally a fixed ``mu``.
    """

    kind: str
    n: int
    seed: int = 0
    params: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict) -> "SpectrumSpec":
        d = dict(d)
        kind = d.pop("kind")
        n = int(d.pop("n"))
        seed = int(d.pop("seed", 0))
        return cls(kind, n, seed, d)


def theorem24_L(mu: float, case: str) -> float:
    """Largest eigenvalue above (``L1``) or below (``L2``) ``2/(2-mu) - mu``."""
    threshold = 2.0 / (2.0 - mu) - mu
    if case == "L1":
        return 0.5 * (1.0 + threshold)
    if case == "L2":
        return 0.5 * (mu + threshold)
    raise ContractViolation(f"theorem24 case must be 'L1' or 'L2', got {case!r}")


def gen_spectrum(spec: SpectrumSpec) -> Spectrum:
    p, n = spec.params, spec.n
    rng = np.random.default_rng(spec.seed)
    if n < 1:
        raise ContractViolation("n must be positive")
    if spec.kind == "uniform":
        lam = np.linspace(float(p.get("lo", 1.0)), float(p.get("hi", 1000.0)), n)
    elif spec.kind == "logspace":
        lam = np.logspace(float(p.get("lo_exp", 0.0)), float(p.get("hi_exp", 5.0)), n)
    elif spec.kind == "cluster":
        bulk_lo, bulk_hi = p.get("bulk_range", (0.0, 0.1))
        out_lo, out_hi = p.get("outlier_range", (0.65, 0.75))
        frac = float(p.get("outlier_fraction", 0.1))
        n_out = math.floor(frac * n + 1e-9)
        bulk = rng.uniform(bulk_lo, bulk_hi, n - n_out)
        # U(0, .) can in principle return exactly 0; the operator must stay SPD
        bulk[bulk <= 0.0] = np.nextafter(0.0, 1.0)
        lam = np.concatenate([bulk, rng.uniform(out_lo, out_hi, n_out)])
    elif spec.kind == "theorem24":
        if n < 2:
            raise ContractViolation("theorem24 spectra need n >= 2")
        if "mu" in p:
            mu = float(p["mu"])
        else:
            lo, hi = p.get("mu_range", (0.2, 0.4))
            mu = float(rng.uniform(lo, hi))
        L = theorem24_L(mu, p.get("case", "L1"))
        interior = mu + (L - mu) * rng.uniform(0.0, 1.0, n - 2)
        lam = np.concatenate([[mu], interior, [L]])
    else:
        raise ContractViolation(f"unknown spectrum kind {spec.kind!r}")
    return Spectrum(lam)
