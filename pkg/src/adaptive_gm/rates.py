"""Windowed geometric-average estimates of the convergence factor.

The estimator sees a stream of residual norms ``n_0, n_1, ..., n_k`` and
reports

* ``(n_k / n_0) ** (1/k)`` while ``k < window`` (or always, in full-history
  mode), and
* the geometric mean of the last ``window`` ratios ``n_i / n_{i-1}`` once
  ``k >= window``.

For momentum methods the pushed norms are norms of stacked residual pairs,
see :func:`stacked_norm`. The first stacked pair is ``(r_1; r_0)`` and acts
as the base, so in that case ``k`` counts pushes after ``(r_1; r_0)``.
"""

from __future__ import annotations

import math
from collections import deque

import numpy as np

from .linalg import ContractViolation

FULL = "full"
DEFAULT_CEILING = 1.0 - 1e-12


class NotReadyError(RuntimeError):
    """The estimator has not seen enough norms to produce a rate."""


def parse_window(window) -> int | None:
    """``None``/``"full"``/``"k"`` mean full history; otherwise an int >= 1."""
    if window is None or (isinstance(window, str) and window.lower() in (FULL, "k")):
        return None
    w = int(window)
    if w < 1:
        raise ContractViolation(f"window must be >= 1, got {window!r}")
    return w


class RateEstimator:
    """Geometric average of successive residual-norm ratios.

    Parameters
    ----------
    window:
        Number of most recent ratios averaged, or ``None``/``"full"`` for the
        whole history.
    clamp_ceiling:
        Upper clamp applied to the reported rate so downstream parameter maps
        (which need ``rho < 1``) stay defined.
    """

    def __init__(self, window=1, clamp_ceiling: float = DEFAULT_CEILING):
        if not 0.0 < clamp_ceiling <= 1.0:
            raise ContractViolation("clamp_ceiling must lie in (0, 1]")
        self.window = parse_window(window)
        self.clamp_ceiling = float(clamp_ceiling)
        self.ratios: deque[float] = deque(maxlen=self.window)
        self.base_norm: float | None = None
        self.latest_norm: float | None = None
        self.count = 0
        self.converged = False

    def __repr__(self):
        w = FULL if self.window is None else self.window
        return f"RateEstimator(window={w}, count={self.count}, converged={self.converged})"

    @property
    def ready(self) -> bool:
        return self.count >= 1

    def push_norm(self, norm: float) -> "RateEstimator":
        norm = float(norm)
        if not math.isfinite(norm) or norm < 0.0:
            raise ContractViolation(f"norm must be finite and nonnegative, got {norm}")
        if self.base_norm is None:
            self.base_norm = norm
            self.latest_norm = norm
            self.converged = norm == 0.0
            return self
        previous = self.latest_norm
        self.count += 1
        self.latest_norm = norm
        if self.converged or previous == 0.0 or norm == 0.0:
            # a zero residual is an exact solve, not a zero ratio
            self.converged = True
            return self
        self.ratios.append(norm / previous)
        return self

    def current_rate(self) -> float:
        if not self.ready:
            raise NotReadyError("need at least two pushed norms")
        if self.converged:
            return 0.0
        k = self.count
        if self.window is None or k < self.window:
            rate = (self.latest_norm / self.base_norm) ** (1.0 / k)
        else:
            rate = math.prod(self.ratios) ** (1.0 / self.window)
        return min(max(rate, 0.0), self.clamp_ceiling)


def stacked_norm(current, previous) -> float:
    """Euclidean norm of the concatenation ``(current; previous)``."""
    current = np.asarray(current, dtype=np.float64)
    previous = np.asarray(previous, dtype=np.float64)
    if current.shape != previous.shape:
        raise ContractViolation(f"stacked residual shapes differ: {current.shape} vs {previous.shape}")
    return math.hypot(float(np.linalg.norm(current)), float(np.linalg.norm(previous)))
