"""Exact spectral radii of GD / NAG / HB iteration operators on known spectra.

On a diagonal (or diagonalised) quadratic the iteration operators split into
scalar factors (GD) or 2x2 companion blocks (NAG, HB), so their spectral
radii follow from one quadratic equation per eigenvalue. The ``simulate_*``
functions feed these exact radii back into the adaptive parameter rules,
i.e. they run the adaptive schemes with a perfect rate estimator.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .linalg import Spectrum

DISCRIMINANT_SLACK = 1e-14


def gd_spectral_radius(alpha: float, spec: Spectrum) -> float:
    """``rho(I - alpha A)``; only the extreme eigenvalues matter."""
    return max(abs(1.0 - alpha * spec.mu), abs(1.0 - alpha * spec.L))


def _dominant_root(b: float, c: float) -> float:
    """Largest root magnitude of ``theta^2 - b theta + c = 0`` (real b, c)."""
    disc = b * b - 4.0 * c
    if abs(disc) <= DISCRIMINANT_SLACK:
        # repeated root; sqrt of a rounding-level discriminant would add ~1e-8 noise
        return abs(b) / 2.0
    if disc > 0.0:
        s = math.sqrt(disc)
        return max(abs(b + s), abs(b - s)) / 2.0
    return math.sqrt(c)


def nag_block_root(beta: float, lam: float, alpha: float = 1.0) -> float:
    """Dominant eigenvalue magnitude of the NAG block for eigenvalue ``lam``.

    Roots of ``theta^2 - (1+beta)(1-alpha*lam) theta + beta (1-alpha*lam) = 0``.
    """
    c = 1.0 - alpha * lam
    return _dominant_root((1.0 + beta) * c, beta * c)


def nag_spectral_radius(beta: float, spec: Spectrum, alpha: float = 1.0) -> float:
    return max(nag_block_root(beta, float(lam), alpha) for lam in spec.eigenvalues)


def hb_block_radius(alpha: float, beta: float, lam: float) -> float:
    """Dominant root magnitude of ``theta^2 - (1 + beta - alpha*lam) theta + beta = 0``."""
    return _dominant_root(1.0 + beta - alpha * lam, beta)


def hb_spectral_radius(alpha: float, beta: float, spec: Spectrum) -> float:
    return max(hb_block_radius(alpha, beta, float(lam)) for lam in spec.eigenvalues)


def nag_iteration_matrix(beta: float, eigenvalues, alpha: float = 1.0) -> np.ndarray:
    """Assemble the ``2n x 2n`` NAG error-propagation matrix for ``A = diag(eigenvalues)``."""
    lam = np.asarray(eigenvalues, dtype=np.float64)
    n = lam.size
    T = np.diag(1.0 - alpha * lam)
    M = np.zeros((2 * n, 2 * n))
    M[:n, :n] = (1.0 + beta) * T
    M[:n, n:] = -beta * T
    M[n:, :n] = np.eye(n)
    return M


def companion_roots(b: float, c: float) -> tuple[complex, complex]:
    """Both roots of ``theta^2 - b theta + c``; handy for cross-checks."""
    s = cmath.sqrt(b * b - 4.0 * c)
    return (b + s) / 2.0, (b - s) / 2.0


def simulate_gd_rho_sequence(spec: Spectrum, k_max: int) -> list[tuple[float, float]]:
    """Adaptive GD driven by the exact radius: ``rho_{k+1} = rho(I - (1 + rho_k) A)``.

    Returns ``[(rho_1, alpha_1), ..., (rho_kmax, alpha_kmax)]`` where
    ``alpha_k`` is the step size that produced ``rho_k`` (``alpha_1 = 1``).
    """
    out = []
    alpha = 1.0
    for _ in range(k_max):
        rho = gd_spectral_radius(alpha, spec)
        out.append((rho, alpha))
        alpha = 1.0 + rho
    return out


def simulate_nag_rho_sequence(spec: Spectrum, k_max: int) -> list[tuple[float, float]]:
    """Adaptive NAG with ``alpha = 1`` driven by the exact radius of ``M_k``.

    ``rho_1`` comes from the GD warm-up step; afterwards
    ``beta_{k+1} = rho_k / (2 - rho_k)`` and ``rho_{k+1} = rho(M_{k+1})``.
    Returns ``[(rho_k, beta_k)]`` with ``beta_1 = 0``.
    """
    out = []
    rho = gd_spectral_radius(1.0, spec)
    beta = 0.0
    out.append((rho, beta))
    for _ in range(k_max - 1):
        beta = rho / (2.0 - rho)
        rho = nag_spectral_radius(beta, spec)
        out.append((rho, beta))
    return out


def gd_limit(mu: float) -> float:
    """Limit of the exact-radius adaptive GD sequence, ``(1 - mu) / (1 + mu)``."""
    return (1.0 - mu) / (1.0 + mu)


def nag_limit(mu: float) -> float:
    return 1.0 - math.sqrt(mu)


def case1_threshold(mu: float) -> float:
    """``2 / (2 - mu) - mu``; spectra with L at or below it are in the easy case."""
    return 2.0 / (2.0 - mu) - mu


@dataclass(frozen=True)
class OracleDiagnostics:
    """Split of a rate estimate into optimal rate, rescaling gap and remainder.

    ``rho = rho_gd_star + delta_L + epsilon``. ``case`` is one of ``"1.1"``,
    ``"1.2"``, ``"2"`` or ``"outside"``; ``note`` flags where the interval
    used for case 2 is a reconstruction.
    """

    rho: float
    rho_gd_star: float
    delta_L: float
    epsilon: float
    case: str
    interval: tuple[float, float]
    bound_factor: float
    note: Optional[str] = None


CASE2_NOTE = (
    "case-2 interval taken as (-(1-mu)/(1+mu), 2/(L+mu) - 2/(1+mu)], the range implied "
    "by the case-2 argument; the printed statement of that interval is inconsistent"
)


def decompose_epsilon(rho_k: float, spec: Spectrum) -> OracleDiagnostics:
    mu, L = spec.mu, spec.L
    rho_star = (L - mu) / (L + mu)
    delta_L = gd_limit(mu) - rho_star
    eps = rho_k - rho_star - delta_L
    lower = -gd_limit(mu)
    split = 2.0 / (L + mu) - 2.0 / (1.0 + mu)
    upper = 1.0 - mu - gd_limit(mu)
    note = None
    if L > case1_threshold(mu):
        if split < eps <= upper:
            case, interval, factor = "1.1", (split, upper), L
        elif lower < eps <= split:
            case, interval, factor = "1.2", (lower, split), -mu
        else:
            case, interval, factor = "outside", (lower, upper), math.nan
    else:
        note = CASE2_NOTE
        if lower < eps <= split:
            case, interval, factor = "2", (lower, split), -mu
        else:
            case, interval, factor = "outside", (lower, split), math.nan
    return OracleDiagnostics(rho_k, rho_star, delta_L, eps, case, interval, factor, note)
