"""L2-regularised logistic regression.

``f(x) = xi/2 ||x||^2 + sum_i log(1 + exp(-b_i <x, A[:, i]>))`` with the
features stored column-wise (``A`` is ``n x p``, one sample per column).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from ..eigen import gram_one_norm_bound
from ..linalg import ContractViolation, as_vector


@dataclass(frozen=True)
class LogisticProblem:
    A: np.ndarray
    b: np.ndarray
    xi: float

    def __post_init__(self):
        A = np.asarray(self.A, dtype=np.float64)
        b = as_vector(self.b, "b")
        if A.ndim != 2 or A.shape[1] != b.size:
            raise ContractViolation(f"A must be n x p with p = len(b); got {A.shape}, {b.size}")
        if not np.all(np.abs(b) == 1.0):
            raise ContractViolation("labels must be exactly -1 or +1")
        if self.xi < 0.0:
            raise ContractViolation("xi must be nonnegative")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def dimension(self) -> int:
        return self.A.shape[0]

    def margins(self, x) -> np.ndarray:
        return self.b * (as_vector(x, "x") @ self.A)

    def value(self, x) -> float:
        x = as_vector(x, "x")
        # log(1 + e^{-m}) without overflow for large |m|
        return 0.5 * self.xi * float(x @ x) + float(np.logaddexp(0.0, -self.margins(x)).sum())

    def grad(self, x) -> np.ndarray:
        x = as_vector(x, "x")
        weights = expit(-self.margins(x))
        return self.xi * x - self.A @ (self.b * weights)

    def hvp(self, x, v) -> np.ndarray:
        s = expit(self.margins(x))
        v = as_vector(v, "v")
        return self.xi * v + self.A @ (s * (1.0 - s) * (v @ self.A))

    def bounds(self) -> tuple[float, float]:
        return logistic_bounds(self)


def logistic_value(prob: LogisticProblem, x) -> float:
    return prob.value(x)


def logistic_grad(prob: LogisticProblem, x) -> np.ndarray:
    return prob.grad(x)


def logistic_hvp(prob: LogisticProblem, x, v) -> np.ndarray:
    return prob.hvp(x, v)


def logistic_bounds(prob: LogisticProblem) -> tuple[float, float]:
    """``(xi, xi + ||A A^T||_1 / 4)`` -- Hessian eigenvalue bracket."""
    return prob.xi, prob.xi + 0.25 * gram_one_norm_bound(prob.A)


def gen_logistic(n: int = 500, p: int = 2000, xi: float = 0.1, seed=0,
                 label_prob: float = 0.5) -> LogisticProblem:
    """Gaussian features, Bernoulli(label_prob) labels mapped 0 -> -1."""
    if n < 1 or p < 1:
        raise ContractViolation("n and p must be positive")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, p))
    b = np.where(rng.random(p) < label_prob, 1.0, -1.0)
    return LogisticProblem(A, b, float(xi))
