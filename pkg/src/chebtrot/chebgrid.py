"""Chebyshev nodes, the orthonormal Chebyshev basis and extrapolation to zero.

Nodes are ``s_i = a cos((2i - 1) pi / (2n))`` for ``i = 1..n`` (stored
zero-based, strictly decreasing). The basis ``p_0 = T_0 / sqrt(n)``,
``p_j = sqrt(2/n) T_j(s/a)`` makes the collocation matrix ``V[k, j] = p_j(s_k)``
orthogonal, so a fit is just ``c = V.T @ y``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class ChebyshevGrid:
    a: float
    n: int
    nodes: np.ndarray
    V: np.ndarray

    @property
    def half_nodes(self) -> np.ndarray:
        """The positive nodes ``s_1 > ... > s_{n/2}``."""
        return self.nodes[: self.n // 2]

    def basis(self, s) -> np.ndarray:
        """Rows ``p(s)`` of orthonormal basis values, shape ``(len(s), n)``."""
        x = np.atleast_1d(np.asarray(s, dtype=float)) / self.a
        j = np.arange(self.n)
        # T_j(x) = cos(j arccos x) inside [-1, 1]; the recurrence also covers |x| > 1
        t = np.empty((x.size, self.n))
        t[:, 0] = 1.0
        if self.n > 1:
            t[:, 1] = x
        for col in range(2, self.n):
            t[:, col] = 2 * x * t[:, col - 1] - t[:, col - 2]
        scale = np.where(j == 0, math.sqrt(1.0 / self.n), math.sqrt(2.0 / self.n))
        return t * scale


def make_grid(n: int, a: float = 1.0) -> ChebyshevGrid:
    if n < 2 or n % 2:
        raise InputError(f"node count must be even and >= 2 so that 0 is not a node, got {n}")
    if not a > 0:
        raise InputError(f"half-width must be positive, got {a}")
    i = np.arange(1, n + 1)
    angles = (2 * i - 1) * np.pi / (2 * n)
    nodes = a * np.cos(angles)
    # enforce exact mirror symmetry s_i = -s_{n-i+1}
    half = nodes[: n // 2]
    nodes = np.concatenate([half, -half[::-1]])
    j = np.arange(n)
    V = np.cos(np.outer(angles, j)) * np.where(j == 0, math.sqrt(1.0 / n), math.sqrt(2.0 / n))
    nodes.setflags(write=False)
    V.setflags(write=False)
    return ChebyshevGrid(a=float(a), n=n, nodes=nodes, V=V)


def weights_at_zero(grid: ChebyshevGrid) -> np.ndarray:
    """Closed-form interpolation weights ``d(0) = V p(0)``.

    ``d_k(0) = (1/n) (-1)^(k + n/2) tan((2k - 1) pi / (2n))`` for ``k = 1..n``.
    """
    n = grid.n
    k = np.arange(1, n + 1)
    sign = np.where((k + n // 2) % 2 == 0, 1.0, -1.0)
    return sign * np.tan((2 * k - 1) * np.pi / (2 * n)) / n


def lebesgue_factor(n: int) -> float:
    """Upper bound ``(2/pi) ln(n + 1) + 1`` on ``||d(0)||_1``."""
    if n < 1:
        raise InputError("n must be >= 1")
    return 2.0 / math.pi * math.log(n + 1) + 1.0


@dataclass(frozen=True)
class InterpolationFit:
    grid: ChebyshevGrid
    y: np.ndarray
    c: np.ndarray
    weights_d0: np.ndarray
    estimate_at_zero: float

    def __call__(self, s):
        """Evaluate the interpolant by Clenshaw recurrence on ``T_j(s/a)``."""
        s_arr = np.asarray(s, dtype=float)
        x = s_arr / self.grid.a
        n = self.grid.n
        coef = self.c * np.where(np.arange(n) == 0, math.sqrt(1.0 / n), math.sqrt(2.0 / n))
        b1 = np.zeros_like(x)
        b2 = np.zeros_like(x)
        for ck in coef[:0:-1]:
            b1, b2 = 2 * x * b1 - b2 + ck, b1
        out = x * b1 - b2 + coef[0]
        return float(out) if np.ndim(out) == 0 else out

    def extrapolating(self, s) -> np.ndarray:
        """True where ``s`` lies outside the data interval ``[-a, a]``."""
        return np.abs(np.asarray(s, dtype=float)) > self.grid.a


def fit(grid: ChebyshevGrid, y) -> InterpolationFit:
    y = np.asarray(y, dtype=float)
    if y.shape != (grid.n,):
        raise InputError(f"expected {grid.n} data values, got shape {y.shape}")
    if not np.all(np.isfinite(y)):
        raise InputError("data contain non-finite values")
    c = grid.V.T @ y
    d0 = weights_at_zero(grid)
    return InterpolationFit(grid=grid, y=y, c=c, weights_d0=d0, estimate_at_zero=float(d0 @ y))


def propagate_variance(sigmas, grid: ChebyshevGrid) -> tuple[float, float]:
    """Standard deviation of the value at ``s = 0`` for independent Gaussian data.

    Returns ``(bound, exact)`` with ``exact = ||diag(sigma) d(0)||_2`` and
    ``bound = sqrt(2) max sigma``.
    """
    sig = np.asarray(sigmas, dtype=float)
    if sig.shape != (grid.n,):
        raise InputError(f"expected {grid.n} standard deviations, got shape {sig.shape}")
    if np.any(sig < 0):
        raise InputError("standard deviations must be non-negative")
    exact = float(np.linalg.norm(sig * weights_at_zero(grid)))
    bound = math.sqrt(2.0) * float(sig.max()) if sig.size else 0.0
    return bound, exact
