"""Inverse negative Laplacian with homogeneous Dirichlet conditions.

For data ``f`` on a grid, ``u = -Lap^{-1} f`` solves ``-u'' = f`` with
``u(a) = u(b) = 0``. It is written through the running integral
``F(x) = int_a^x f``::

    u(x)  = int_x^b F - (b - x)/(b - a) * int_a^b F
    u'(x) = -F(x) + 1/(b - a) * int_a^b F

Integrals are Riemann sums with weight ``dx = grid.dx_int``. The running
integral includes the current node, the outer integrals are left sums over
the ``n - 1`` cells, and the interval length is taken as ``(n - 1) * dx``.
With these choices ``u[k+1] - u[k] = dx * u'[k]`` holds exactly, both
endpoint values are exactly zero, and summation by parts gives::

    dx * sum_{k < n-1} u'_f[k] * u'_q[k] == dx * sum_k u_f[k] * q[k]

which is what makes the gradient of the smoothed functional exact. When
``dx_int`` differs from the node spacing the sums are rescaled rather than
resampled; physical consistency with the continuous BVP only holds for
``dx_int == h``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .operators import Grid, check_length


def _running_integral(f: np.ndarray, dx: float) -> np.ndarray:
    return dx * np.cumsum(f)


def neg_lap_inv(f, grid: Grid) -> np.ndarray:
    """``u = -Lap^{-1} f`` on the nodes of ``grid``; ``u[0] = u[-1] = 0``."""
    f = check_length(f, grid.n)
    dx, n = grid.dx_int, grid.n
    F = _running_integral(f, dx)
    tail = np.zeros(n)
    tail[:-1] = dx * np.cumsum(F[-2::-1])[::-1]
    total = tail[0]
    k = np.arange(n)
    u = tail - (n - 1 - k) / (n - 1) * total
    u[0] = 0.0
    return u


def u_prime_of(f, grid: Grid) -> np.ndarray:
    """Derivative of ``-Lap^{-1} f`` from its integral formula (no differencing)."""
    f = check_length(f, grid.n)
    dx, n = grid.dx_int, grid.n
    F = _running_integral(f, dx)
    return -F + F[:-1].sum() / (n - 1)


def cell_norm_sq(v: np.ndarray, grid: Grid) -> float:
    """Left-Riemann ``int_a^b v^2``: the last node carries no weight."""
    return grid.dx_int * float(v[:-1] @ v[:-1])


def smallest_eigenvalue(grid: Grid) -> float:
    """First Dirichlet eigenvalue of ``-Lap`` on an interval of length ``(n-1) dx``."""
    return math.pi**2 / ((grid.n - 1) * grid.dx_int) ** 2


@dataclass(frozen=True)
class SmoothedData:
    """Noisy data together with ``u_delta`` and ``u_delta'``, computed once."""

    g: np.ndarray
    u: np.ndarray
    u_prime: np.ndarray
    grid: Grid


def smooth_data(g_noisy, grid: Grid) -> SmoothedData:
    g = check_length(g_noisy, grid.n, "data").copy()
    u, up = neg_lap_inv(g, grid), u_prime_of(g, grid)
    for arr in (g, u, up):
        arr.setflags(write=False)
    return SmoothedData(g=g, u=u, u_prime=up, grid=grid)
