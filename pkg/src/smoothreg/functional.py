"""The smoothed least-squares functional and its derivatives.

    G(psi) = ||T psi - g_delta||^2 + ||u_psi' - u_delta'||^2

with ``u_psi = -Lap^{-1}(T psi)``. ``DataOnly`` keeps the first term,
``SmoothOnly`` the second. All inner products and norms carry the
quadrature weight ``dx_int`` of the data grid, so gradients returned here
are Riesz representers for ``<a, b> = dx_int * a.b``; since the same weight
sits on both sides of ``T`` the adjoint is still the plain transpose.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .operators import Grid, LinearOperator, check_length
from .smoothing import SmoothedData, cell_norm_sq, neg_lap_inv, u_prime_of


class Mode(str, enum.Enum):
    DATA_ONLY = "DataOnly"
    SMOOTH_ONLY = "SmoothOnly"
    FULL = "Full"


class Constraint(str, enum.Enum):
    NONE = "None"
    NONNEGATIVE = "NonNegative"


class DegenerateDirectionError(ArithmeticError):
    """The curvature along a search direction is numerically zero."""


@dataclass(frozen=True)
class Objective:
    op: LinearOperator
    data: SmoothedData
    mode: Mode = Mode.FULL
    constraint: Constraint = Constraint.NONE
    domain_grid: Grid | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "constraint", Constraint(self.constraint))
        if self.op.rows != self.data.grid.n:
            raise ValueError(
                f"data grid has {self.data.grid.n} nodes but operator has {self.op.rows} rows"
            )
        if self.domain_grid is None:
            if self.op.cols == self.data.grid.n:
                dom = self.data.grid
            else:
                dom = Grid.artificial(self.op.cols, self.data.grid.dx_int)
            object.__setattr__(self, "domain_grid", dom)
        elif self.domain_grid.n != self.op.cols:
            raise ValueError("domain grid does not match operator columns")

    @property
    def grid(self) -> Grid:
        return self.data.grid

    @property
    def uses_data_term(self) -> bool:
        return self.mode is not Mode.SMOOTH_ONLY

    @property
    def uses_smooth_term(self) -> bool:
        return self.mode is not Mode.DATA_ONLY

    def inner(self, x, y) -> float:
        return self.grid.dx_int * float(np.dot(x, y))

    def parts(self, psi) -> tuple[float, float]:
        """``(G1, G2)`` at ``psi``; the unused term of the mode is reported as 0."""
        psi = check_length(psi, self.op.cols, "psi")
        t_psi = self.op.apply(psi)
        g1 = g2 = 0.0
        if self.uses_data_term:
            r = t_psi - self.data.g
            g1 = self.inner(r, r)
        if self.uses_smooth_term:
            g2 = cell_norm_sq(u_prime_of(t_psi, self.grid) - self.data.u_prime, self.grid)
        return g1, g2

    def eval(self, psi) -> float:
        g1, g2 = self.parts(psi)
        return g1 + g2

    def residual_norm(self, psi) -> float:
        """Unweighted ``||T psi - g_delta||``, the quantity the discrepancy rule uses."""
        return float(np.linalg.norm(self.op.apply(psi) - self.data.g))

    def grad_l2(self, psi) -> np.ndarray:
        """``-2 T*((g - T psi) + (u - u_psi))`` with the inactive term dropped."""
        psi = check_length(psi, self.op.cols, "psi")
        t_psi = self.op.apply(psi)
        w = np.zeros(self.op.rows)
        if self.uses_data_term:
            w += self.data.g - t_psi
        if self.uses_smooth_term:
            w += self.data.u - neg_lap_inv(t_psi, self.grid)
        return -2.0 * self.op.apply_adjoint(w)

    def second_form(self, psi, h, k) -> float:
        """Second Gateaux derivative ``G''[h, k]``; independent of ``psi``."""
        check_length(psi, self.op.cols, "psi")
        th = self.op.apply(check_length(h, self.op.cols, "h"))
        tk = self.op.apply(check_length(k, self.op.cols, "k"))
        w = np.zeros(self.op.rows)
        if self.uses_data_term:
            w += th
        if self.uses_smooth_term:
            w += neg_lap_inv(th, self.grid)
        return 2.0 * self.inner(w, tk)

    def initial_step(self, psi, direction, grad=None) -> float:
        """Minimizer of the quadratic model along ``psi - gamma * direction``."""
        if grad is None:
            grad = self.grad_l2(psi)
        curvature = self.second_form(psi, direction, direction)
        if not curvature > 1e-30:
            raise DegenerateDirectionError(f"curvature {curvature:.3g} along search direction")
        return self.inner(grad, direction) / curvature


def make_objective(op: LinearOperator, data: SmoothedData, mode=Mode.FULL,
                   constraint=Constraint.NONE, domain_grid: Grid | None = None) -> Objective:
    return Objective(op, data, Mode(mode), Constraint(constraint), domain_grid)
