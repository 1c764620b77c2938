"""Huber-TV image denoising.

``f(u) = xi/2 sum (u - u0)^2 + eta sum h_delta(|grad u|)`` on a pixel grid
with unit spacing; ``grad`` is the forward difference with Neumann
boundary (the difference past the last row/column is zero).

Grids use ``[row, col]`` indexing; ``ux`` differences along columns
(axis 1), ``uy`` along rows (axis 0).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..linalg import ContractViolation


def huber(t, delta: float):
    t = np.abs(np.asarray(t, dtype=np.float64))
    out = np.where(t <= delta, t * t / (2.0 * delta), t - 0.5 * delta)
    return out if out.ndim else float(out)


def huber_deriv(t, delta: float):
    t = np.asarray(t, dtype=np.float64)
    out = np.where(np.abs(t) <= delta, t / delta, np.sign(t))
    return out if out.ndim else float(out)


def grad_image(u) -> tuple[np.ndarray, np.ndarray]:
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 2:
        raise ContractViolation("image must be a 2-D grid")
    ux = np.zeros_like(u)
    uy = np.zeros_like(u)
    ux[:, :-1] = u[:, 1:] - u[:, :-1]
    uy[:-1, :] = u[1:, :] - u[:-1, :]
    return ux, uy


def divergence(px, py) -> np.ndarray:
    """Negative adjoint of :func:`grad_image`."""
    px = np.asarray(px, dtype=np.float64)
    py = np.asarray(py, dtype=np.float64)
    d = np.zeros_like(px)
    d[:, 0] = px[:, 0]
    d[:, 1:-1] = px[:, 1:-1] - px[:, :-2]
    d[:, -1] = -px[:, -2]
    d[0, :] += py[0, :]
    d[1:-1, :] += py[1:-1, :] - py[:-2, :]
    d[-1, :] += -py[-2, :]
    return d


@dataclass(frozen=True)
class DenoiseProblem:
    u0: np.ndarray
    xi: float = 4.0
    eta: float = 0.06
    delta: float = 0.05

    def __post_init__(self):
        u0 = np.array(self.u0, dtype=np.float64)
        if u0.ndim != 2 or min(u0.shape) < 2:
            raise ContractViolation(f"noisy image must be at least 2x2, got shape {u0.shape}")
        if not (self.xi > 0 and self.eta >= 0 and self.delta > 0):
            raise ContractViolation("need xi > 0, eta >= 0, delta > 0")
        u0.setflags(write=False)
        object.__setattr__(self, "u0", u0)

    @property
    def shape(self) -> tuple[int, int]:
        return self.u0.shape

    @property
    def dimension(self) -> int:
        return self.u0.size

    def _grid(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=np.float64)
        if u.size != self.u0.size:
            raise ContractViolation(f"image has {u.size} pixels, expected {self.u0.size}")
        return u.reshape(self.shape)

    def value(self, u) -> float:
        g = self._grid(u)
        ux, uy = grad_image(g)
        fidelity = 0.5 * self.xi * float(np.sum((g - self.u0) ** 2))
        return fidelity + self.eta * float(np.sum(huber(np.hypot(ux, uy), self.delta)))

    def grad(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=np.float64)
        g = self._grid(u)
        ux, uy = grad_image(g)
        # h'(t)/t is 1/delta on the quadratic branch, so no 0/0 at flat pixels
        scale = 1.0 / np.maximum(np.hypot(ux, uy), self.delta)
        out = self.xi * (g - self.u0) - self.eta * divergence(ux * scale, uy * scale)
        return out.reshape(u.shape)

    def bounds(self) -> tuple[float, float]:
        return denoise_bounds(self)


def denoise_value(prob: DenoiseProblem, u) -> float:
    return prob.value(u)


def denoise_grad(prob: DenoiseProblem, u) -> np.ndarray:
    return prob.grad(u)


def denoise_bounds(prob: DenoiseProblem) -> tuple[float, float]:
    """``(xi, xi + 8 eta / delta)``; 8 bounds the 1-norm of the discrete Laplacian."""
    return prob.xi, prob.xi + 8.0 * prob.eta / prob.delta


def phantom(size: int = 256) -> np.ndarray:
    """Piecewise-constant test image in [0, 1]: ramp background, two boxes, a disk."""
    rows, cols = np.mgrid[0:size, 0:size] / float(size)
    img = 0.2 + 0.3 * cols
    img[(rows > 0.15) & (rows < 0.45) & (cols > 0.1) & (cols < 0.45)] = 0.9
    img[(rows > 0.6) & (rows < 0.85) & (cols > 0.25) & (cols < 0.8)] = 0.05
    img[(rows - 0.35) ** 2 + (cols - 0.7) ** 2 < 0.15 ** 2] = 0.65
    return img


def read_pgm(path) -> np.ndarray:
    """8-bit greyscale image scaled to [0, 1]."""
    from PIL import Image

    path = Path(path)
    try:
        with Image.open(path) as im:
            arr = np.asarray(im.convert("L"), dtype=np.float64)
    except (OSError, ValueError) as exc:
        raise OSError(f"cannot read image {path}: {exc}") from exc
    return arr / 255.0


def write_pgm(path, image) -> None:
    """Write ``image`` (values in [0, 1], clipped) as binary 8-bit PGM."""
    from PIL import Image

    img = np.clip(np.asarray(image, dtype=np.float64), 0.0, 1.0)
    Image.fromarray(np.rint(img * 255.0).astype(np.uint8), mode="L").save(Path(path), format="PPM")


def gen_denoise(image_source="synthetic", sigma: float = 0.05, seed=0,
                xi: float = 4.0, eta: float = 0.06, delta: float = 0.05,
                size: int = 256) -> tuple[DenoiseProblem, np.ndarray]:
    """Noisy image problem plus the clean image it was made from.

    ``image_source`` is ``"synthetic"`` (the built-in phantom) or a path to
    a PGM file. Noise is ``N(0, sigma^2)``; values are not clipped.
    """
    if image_source in (None, "synthetic", "synthetic-piecewise"):
        clean = phantom(size)
    else:
        clean = read_pgm(image_source)
    rng = np.random.default_rng(seed)
    noisy = clean + sigma * rng.standard_normal(clean.shape) if sigma > 0 else clean.copy()
    return DenoiseProblem(noisy, xi, eta, delta), clean
