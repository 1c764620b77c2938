"""Extreme-eigenvalue estimates and rescaling.

``power_iteration`` and ``shifted_power_iteration`` take a callback that
applies a symmetric PSD operator, so they work for explicit matrices as
well as for Hessian-vector products.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from .linalg import ContractViolation

MAX_RESTARTS = 3


class PowerIterationError(RuntimeError):
    """The operator annihilated every start vector tried."""


def _unit_start(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


def power_iteration(
    apply_op: Callable[[np.ndarray], np.ndarray],
    n: int,
    tol: float = 1e-6,
    max_iters: int = 500,
    seed=0,
    v0: Optional[np.ndarray] = None,
    return_vector: bool = False,
):
    """Rayleigh-quotient power iteration for the largest eigenvalue.

    Stops when two successive Rayleigh quotients differ by less than
    ``tol`` relative, or after ``max_iters`` power steps. Returns
    ``(estimate, iterations_used)`` (plus the final unit vector when
    ``return_vector``). A start vector mapped to zero is replaced by a fresh
    seeded one, at most ``MAX_RESTARTS`` times.
    """
    if n < 1:
        raise ContractViolation("dimension must be positive")
    rng = np.random.default_rng(seed)
    v = _unit_start(rng, n) if v0 is None else np.asarray(v0, dtype=np.float64) / np.linalg.norm(v0)

    w = apply_op(v)
    restarts = 0
    while not np.any(w):
        if restarts == MAX_RESTARTS:
            raise PowerIterationError("operator maps every start vector to zero")
        restarts += 1
        v = _unit_start(rng, n)
        w = apply_op(v)

    lam = float(v @ w)
    iters = 0
    while iters < max_iters:
        wn = np.linalg.norm(w)
        if wn == 0.0:
            lam = 0.0
            break
        v = w / wn
        w = apply_op(v)
        iters += 1
        lam_new = float(v @ w)
        done = abs(lam_new - lam) < tol * abs(lam_new)
        lam = lam_new
        if done:
            break
    if return_vector:
        return lam, iters, v
    return lam, iters


def shifted_power_iteration(
    apply_op: Callable[[np.ndarray], np.ndarray],
    n: int,
    L_hat: float,
    tol: float = 1e-6,
    max_iters: int = 500,
    seed=0,
    v0: Optional[np.ndarray] = None,
    return_vector: bool = False,
):
    """Estimate the smallest eigenvalue as ``L_hat - lambda_max(L_hat I - A)``.

    If the shifted operator is identically zero (``A = L_hat I``) the result
    is ``L_hat``.
    """
    def shifted(v):
        return L_hat * v - apply_op(v)

    try:
        lam, _, v = power_iteration(shifted, n, tol, max_iters, seed, v0, return_vector=True)
    except PowerIterationError:
        lam, v = 0.0, None
    mu_hat = L_hat - lam
    if return_vector:
        return mu_hat, v
    return mu_hat


def gram_one_norm_bound(A, block: int = 256) -> float:
    """``||A A^T||_1`` (max absolute column sum) of the ``n x n`` Gram matrix.

    The Gram matrix is formed one block of rows at a time, so memory stays at
    ``block x n`` regardless of ``n``.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ContractViolation("A must be a matrix")
    n = A.shape[0]
    if n == 0:
        return 0.0
    colsum = np.zeros(n)
    for start in range(0, n, block):
        G = A[start:start + block] @ A.T
        colsum += np.abs(G).sum(axis=0)
    return float(colsum.max())


def rescale_quadratic(problem, L_hat: float):
    """Divide ``A`` and ``b`` by ``L_hat``; the minimiser does not move."""
    if not L_hat > 0.0:
        raise ContractViolation("L_hat must be positive")
    return problem.rescaled(L_hat)
