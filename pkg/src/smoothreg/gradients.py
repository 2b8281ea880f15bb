"""Descent directions: L2 gradient, Sobolev (H1) gradient, Polak-Ribiere."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .operators import Grid, check_length


class BoundaryCondition(str, enum.Enum):
    DIRICHLET = "Dirichlet"      # phi(a) = phi(b) = 0
    NEUMANN = "Neumann"          # phi'(a) = phi'(b) = 0
    MIXED_LEFT = "MixedLeft"     # phi(a) = 0, phi'(b) = 0
    MIXED_RIGHT = "MixedRight"   # phi'(a) = 0, phi(b) = 0

    @property
    def ends(self) -> tuple[str, str]:
        return {
            BoundaryCondition.DIRICHLET: ("D", "D"),
            BoundaryCondition.NEUMANN: ("N", "N"),
            BoundaryCondition.MIXED_LEFT: ("D", "N"),
            BoundaryCondition.MIXED_RIGHT: ("N", "D"),
        }[self]


class Variant(str, enum.Enum):
    L2 = "L2"
    H1 = "H1"
    CONJ_L2_L2 = "ConjugateL2L2"
    CONJ_L2_H1 = "ConjugateL2H1"


@dataclass(frozen=True)
class GradientKind:
    variant: Variant = Variant.L2
    bc: BoundaryCondition = BoundaryCondition.NEUMANN

    @property
    def conjugate(self) -> bool:
        return self.variant in (Variant.CONJ_L2_L2, Variant.CONJ_L2_H1)

    @property
    def sobolev(self) -> bool:
        return self.variant in (Variant.H1, Variant.CONJ_L2_H1)

    @property
    def name(self) -> str:
        base = {Variant.L2: "l2", Variant.H1: "h1", Variant.CONJ_L2_L2: "conj-l2-l2",
                Variant.CONJ_L2_H1: "conj-l2-h1"}[self.variant]
        if self.sobolev:
            base += "-" + self.bc.value.lower()
        return base

    @classmethod
    def parse(cls, text: str) -> "GradientKind":
        """Parse names like ``l2``, ``h1-dirichlet``, ``conj-l2-l2``, ``conj-l2-h1``.

        Sobolev kinds default to Neumann ends.
        """
        key = text.strip().lower()
        bcs = {bc.value.lower(): bc for bc in BoundaryCondition}
        bcs.update({"mixed-left": BoundaryCondition.MIXED_LEFT,
                    "mixed-right": BoundaryCondition.MIXED_RIGHT})
        for prefix, variant in (("conj-l2-h1", Variant.CONJ_L2_H1), ("h1", Variant.H1)):
            if key == prefix:
                return cls(variant, BoundaryCondition.NEUMANN)
            if key.startswith(prefix + "-") and key[len(prefix) + 1:] in bcs:
                return cls(variant, bcs[key[len(prefix) + 1:]])
        simple = {"l2": Variant.L2, "conj-l2-l2": Variant.CONJ_L2_L2}
        if key in simple:
            return cls(simple[key])
        raise ValueError(f"unknown gradient kind {text!r}; valid kinds: {', '.join(valid_kind_names())}")


def valid_kind_names() -> list[str]:
    names = ["l2", "conj-l2-l2"]
    for prefix in ("h1", "conj-l2-h1"):
        names.append(prefix)
        names += [f"{prefix}-{bc}" for bc in ("dirichlet", "neumann", "mixedleft", "mixedright")]
    return names


def thomas(lower, diag, upper, rhs) -> np.ndarray:
    """Solve a tridiagonal system; ``lower[0]`` and ``upper[-1]`` are ignored.

    Raises ``ArithmeticError`` on a non-positive pivot, which cannot happen
    for the diagonally dominant systems built here.
    """
    n = len(diag)
    c = np.empty(n)
    d = np.empty(n)
    piv = diag[0]
    if not piv > 0:
        raise ArithmeticError("non-positive pivot in tridiagonal solve")
    c[0] = upper[0] / piv
    d[0] = rhs[0] / piv
    for i in range(1, n):
        piv = diag[i] - lower[i] * c[i - 1]
        if not piv > 0:
            raise ArithmeticError("non-positive pivot in tridiagonal solve")
        c[i] = upper[i] / piv if i < n - 1 else 0.0
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / piv
    x = np.empty(n)
    x[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


def h1_system(n: int, h: float, bc: BoundaryCondition):
    """Bands of the central-difference discretization of ``-phi'' + phi``.

    Neumann ends use a ghost node mirrored across the boundary, which keeps
    the stencil second order.
    """
    k = 1.0 / h**2
    lower = np.full(n, -k)
    diag = np.full(n, 2 * k + 1.0)
    upper = np.full(n, -k)
    left, right = BoundaryCondition(bc).ends
    if left == "D":
        diag[0], upper[0] = 1.0, 0.0
    else:
        upper[0] = -2 * k
    if right == "D":
        diag[-1], lower[-1] = 1.0, 0.0
    else:
        lower[-1] = -2 * k
    return lower, diag, upper


def h1_gradient(l2grad, grid: Grid, bc=BoundaryCondition.NEUMANN) -> np.ndarray:
    """Sobolev gradient ``(I - Lap)^{-1} l2grad`` on the node spacing of ``grid``."""
    bc = BoundaryCondition(bc)
    rhs = check_length(l2grad, grid.n, "gradient").copy()
    left, right = bc.ends
    if left == "D":
        rhs[0] = 0.0
    if right == "D":
        rhs[-1] = 0.0
    return thomas(*h1_system(grid.n, grid.h, bc), rhs)


def pr_coefficient(phi_new, phi_old, grad_new, grad_old) -> float:
    """Polak-Ribiere coefficient in its L2-inner-product form."""
    denom = float(np.dot(phi_old, grad_old))
    if denom == 0.0 or not np.isfinite(denom):
        return 0.0
    return float(np.dot(np.subtract(phi_new, phi_old), grad_new)) / denom


def pr_conjugate(phi_new, phi_old, l2grad_new, l2grad_old, dir_old) -> np.ndarray:
    """Conjugate direction ``phi_new + gamma * dir_old``.

    Returns ``phi_new`` itself on the first iteration and whenever the
    coefficient is non-positive or undefined (restart).
    """
    phi_new = np.asarray(phi_new, dtype=float)
    if dir_old is None or phi_old is None or len(dir_old) == 0:
        return phi_new
    gamma = pr_coefficient(phi_new, phi_old, l2grad_new, l2grad_old)
    if not gamma > 0:
        return phi_new
    return phi_new + gamma * np.asarray(dir_old, dtype=float)


class Direction(NamedTuple):
    direction: np.ndarray
    phi: np.ndarray
    grad: np.ndarray
    restarted: bool


def negative_gradient_direction(kind: GradientKind, state, obj) -> Direction:
    """Search direction ``d`` at ``state.psi``; the step taken is ``psi - gamma * d``.

    ``state`` provides ``psi`` and the conjugate history ``phi_old``,
    ``l2grad_old``, ``dir_old``. The returned direction always satisfies
    ``<grad, d> > 0`` unless the gradient itself vanishes.
    """
    grad = obj.grad_l2(state.psi)
    phi = h1_gradient(grad, obj.domain_grid, kind.bc) if kind.sobolev else grad
    if not np.dot(grad, phi) > 0:
        phi = grad
    direction, restarted = phi, True
    if kind.conjugate and state.dir_old is not None:
        cand = pr_conjugate(phi, state.phi_old, grad, state.l2grad_old, state.dir_old)
        if cand is not phi and np.dot(grad, cand) > 0:
            direction, restarted = cand, False
    return Direction(direction, phi, grad, restarted)
