"""High-accuracy reference minimiser for problems without a closed form."""

from __future__ import annotations

import numpy as np

from ..linalg import as_vector, norm2
from ..optimizers import DIVERGENCE_FACTOR, DivergenceError, Trace


def reference_solve(objective, x0, L_tilde: float, tol: float = 1e-12,
                    max_iters: int = 100_000) -> tuple[np.ndarray, dict]:
    """Convex Nesterov iteration with momentum ``(k - 1) / (k + 2)`` and step ``1 / L_tilde``.

    Stops when ``||grad f(x_k)|| / ||grad f(x_0)|| < tol``. Returns the
    final iterate and ``{"iterations", "relative_grad_norm"}``.
    """
    x = as_vector(x0, "x0").copy()
    g = objective.grad(x)
    g0 = norm2(g)
    info = {"iterations": 0, "relative_grad_norm": 0.0 if g0 == 0.0 else 1.0}
    if g0 == 0.0:
        return x, info
    step = 1.0 / L_tilde
    x_prev = x
    for k in range(1, max_iters + 1):
        y = x + ((k - 1) / (k + 2)) * (x - x_prev)
        x_prev, x = x, y - step * objective.grad(y)
        gn = norm2(objective.grad(x))
        info["iterations"] = k
        info["relative_grad_norm"] = gn / g0
        if not np.isfinite(gn) or gn > DIVERGENCE_FACTOR * g0:
            raise DivergenceError(f"reference solve diverged at iteration {k}", Trace())
        if gn / g0 < tol:
            break
    return x, info
