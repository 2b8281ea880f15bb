import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smoothreg.operators import Grid
from smoothreg.problems import add_noise
from smoothreg.smoothing import (
    cell_norm_sq, neg_lap_inv, smallest_eigenvalue, smooth_data, u_prime_of,
)


def weighted(a, b, grid):
    return grid.dx_int * float(a @ b)


def test_zero_input():
    grid = Grid(0.0, 1.0, 21)
    assert not np.any(neg_lap_inv(np.zeros(21), grid))
    assert not np.any(u_prime_of(np.zeros(21), grid))


def test_sine_solution():
    grid = Grid(0.0, 1.0, 401)
    x = grid.nodes
    u = neg_lap_inv(math.pi**2 * np.sin(math.pi * x), grid)
    assert np.max(np.abs(u - np.sin(math.pi * x))) <= 5e-3


def test_constant_solution_and_derivative():
    grid = Grid(0.0, 1.0, 101)
    x = grid.nodes
    u = neg_lap_inv(np.ones(101), grid)
    up = u_prime_of(np.ones(101), grid)
    assert np.max(np.abs(u - x * (1 - x) / 2)) <= 2 * grid.h
    assert np.max(np.abs(up - (0.5 - x))) <= 2 * grid.h


def test_shifted_interval():
    # -u'' = 1 on [-1, 1] has u = (1 - x^2) / 2
    grid = Grid(-1.0, 1.0, 301)
    u = neg_lap_inv(np.ones(301), grid)
    assert np.max(np.abs(u - (1 - grid.nodes**2) / 2)) <= 2 * grid.h


def test_endpoints_exactly_zero():
    grid = Grid(-2.0, 5.0, 77, dx_int=0.4)
    f = np.random.default_rng(0).standard_normal(77)
    u = neg_lap_inv(f, grid)
    assert u[0] == 0.0 and abs(u[-1]) <= 1e-13 * np.abs(u).max()


def test_difference_of_u_matches_u_prime():
    grid = Grid(0.0, 1.0, 200)
    f = np.cos(3 * grid.nodes) + grid.nodes**2
    u, up = neg_lap_inv(f, grid), u_prime_of(f, grid)
    fd = np.diff(u) / grid.dx_int
    assert np.max(np.abs(fd[1:-1] - up[1:-2])) <= 5 * grid.h
    # with the inclusive running integral the forward difference is exact
    np.testing.assert_allclose(fd, up[:-1], atol=1e-12)


def test_summation_by_parts():
    grid = Grid(0.0, 2.0, 60, dx_int=0.07)
    rng = np.random.default_rng(1)
    f, q = rng.standard_normal((2, 60))
    lhs = grid.dx_int * float(u_prime_of(f, grid)[:-1] @ u_prime_of(q, grid)[:-1])
    rhs = weighted(neg_lap_inv(f, grid), q, grid)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_positivity():
    grid = Grid(0.0, 1.0, 80)
    rng = np.random.default_rng(2)
    for _ in range(50):
        f = rng.standard_normal(80)
        assert f @ neg_lap_inv(f, grid) >= -1e-10


def test_linearity():
    grid = Grid(-1.0, 1.0, 50)
    rng = np.random.default_rng(3)
    f, g = rng.standard_normal((2, 50))
    lhs = neg_lap_inv(2.5 * f - 0.75 * g, grid)
    rhs = 2.5 * neg_lap_inv(f, grid) - 0.75 * neg_lap_inv(g, grid)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


@pytest.mark.parametrize("k", [1, 2, 5])
def test_eigenvalue_bound(k):
    grid = Grid(-1.0, 1.0, 201)
    xhat = (grid.nodes - grid.a) / (grid.b - grid.a)
    f = np.sin(k * math.pi * xhat)
    ratio = (f @ neg_lap_inv(f, grid)) / (f @ f)
    lam1 = math.pi**2 / (grid.b - grid.a) ** 2
    assert ratio <= 1 / lam1 + 5 * grid.h
    assert smallest_eigenvalue(grid) == pytest.approx(lam1)
    # the k-th mode is an eigenfunction with eigenvalue 1 / (k^2 lam1)
    assert ratio == pytest.approx(1 / (k**2 * lam1), rel=1e-3)


def test_noise_is_smoothed():
    grid = Grid(-1.0, 1.0, 200)
    e = np.random.default_rng(4).standard_normal(200)
    e -= e.mean()
    ue = neg_lap_inv(e, grid)
    assert np.linalg.norm(ue) <= np.linalg.norm(neg_lap_inv(np.abs(e), grid))
    assert np.linalg.norm(ue) / np.linalg.norm(e) < 0.05


def test_cell_norm_skips_last_node():
    grid = Grid(0.0, 1.0, 5)
    assert cell_norm_sq(np.array([1.0, 1, 1, 1, 100]), grid) == pytest.approx(4 * grid.h)


class TestSmoothData:
    def test_zero_data(self):
        d = smooth_data(np.zeros(10), Grid(0, 1, 10))
        assert not (d.g.any() or d.u.any() or d.u_prime.any())

    def test_fields_are_read_only(self):
        d = smooth_data(np.ones(10), Grid(0, 1, 10))
        with pytest.raises(ValueError):
            d.u[0] = 1.0
        assert d.u[0] == 0.0 and abs(d.u[-1]) < 1e-15

    def test_input_not_aliased(self):
        g = np.ones(10)
        d = smooth_data(g, Grid(0, 1, 10))
        g[3] = 7.0
        assert d.g[3] == 1.0

    @pytest.mark.parametrize("seed", range(5))
    def test_integrating_noisy_data(self, seed):
        grid = Grid(-1.0, 1.0, 200)
        x = grid.nodes
        g = x**3 / 3 - x + 2.0 / 3.0
        g_noisy, _ = add_noise(g, 0.1, seed)
        u_exact = neg_lap_inv(g, grid)
        u_noisy = smooth_data(g_noisy, grid).u
        assert np.linalg.norm(u_noisy - u_exact) / np.linalg.norm(u_exact) < 0.02


@settings(max_examples=40, deadline=None)
@given(n=st.integers(3, 80), dx=st.floats(1e-3, 5.0), seed=st.integers(0, 2**31))
def test_structure_property(n, dx, seed):
    grid = Grid(0.0, 1.0, n, dx_int=dx)
    f = np.random.default_rng(seed).standard_normal(n)
    u, up = neg_lap_inv(f, grid), u_prime_of(f, grid)
    scale = np.abs(u).max() + np.abs(up).max() * dx + 1e-300
    assert u[0] == 0.0 and abs(u[-1]) <= 1e-12 * scale
    np.testing.assert_allclose(np.diff(u), dx * up[:-1], atol=1e-12 * scale)
    assert f @ u >= -1e-10 * (f @ f) * dx**2 * n**2
