"""Descent on the smoothed functional with discrepancy-principle stopping."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .functional import Constraint, DegenerateDirectionError, Objective
from .gradients import GradientKind, negative_gradient_direction
from .report import IterationRecord, RunReport, StopReason, StoppingRule

log = logging.getLogger(__name__)

MAX_EXPANSIONS = 100
BRENT_MAXITER = 100
BACKTRACKS = 40
ACTIVE_SET_RESET = 0.10


@dataclass
class DescentState:
    psi: np.ndarray
    iter: int = 0
    phi_old: np.ndarray | None = None
    l2grad_old: np.ndarray | None = None
    dir_old: np.ndarray | None = None
    history: list[IterationRecord] = field(default_factory=list)

    def reset_conjugate(self) -> None:
        self.phi_old = self.l2grad_old = self.dir_old = None


def project_nonneg(psi) -> np.ndarray:
    return np.maximum(np.asarray(psi, dtype=float), 0.0)


def line_search(obj: Objective, psi, direction, grad=None) -> float:
    """Step ``gamma`` minimizing ``G(psi - gamma * direction)``.

    Starts from the quadratic-model step ``gamma0``. If that does not
    decrease G the minimum lies in ``[0, gamma0]``; otherwise the step is
    pushed out in increments of ``gamma0`` while G keeps falling, and the
    last three trial points bracket the minimum. Bounded Brent
    minimization finishes the job.
    """
    psi = np.asarray(psi, dtype=float)
    direction = np.asarray(direction, dtype=float)
    if not np.any(direction):
        raise ValueError("search direction is zero")

    def f(gamma):
        return obj.eval(psi - gamma * direction)

    f0 = f(0.0)
    gamma0 = obj.initial_step(psi, direction, grad)
    if not gamma0 > 0:
        raise DegenerateDirectionError(f"initial step {gamma0:.3g} is not positive")
    best, f_best = gamma0, f(gamma0)
    if f_best >= f0:
        lo, hi = 0.0, gamma0
    else:
        g1, f1 = gamma0, f_best
        g2 = g1 + gamma0
        f2 = f(g2)
        expansions = 0
        while f2 < f1:
            expansions += 1
            if expansions > MAX_EXPANSIONS:
                log.warning("line search bracketing did not terminate; using last step")
                return g2
            g1, f1 = g2, f2
            g2 = g1 + gamma0
            f2 = f(g2)
        best, f_best = g1, f1
        lo, hi = g1 - gamma0, g2
    res = minimize_scalar(
        f, bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-10 * gamma0 + 1e-18, "maxiter": BRENT_MAXITER},
    )
    # G is quadratic, so gamma0 is already exact unless rounding says otherwise;
    # near the minimum Brent can only win by noise, which would spoil conjugacy
    if res.fun < f_best - 1e-10 * abs(f_best):
        return float(res.x)
    return float(best)


def _rel_error(psi, phi_true) -> float | None:
    if phi_true is None:
        return None
    return float(np.linalg.norm(psi - phi_true) / np.linalg.norm(phi_true))


def _try_step(obj: Objective, psi, direction, grad, g_val):
    """Line search plus projection; returns ``(psi_new, G_new, step)`` or None."""
    try:
        step = line_search(obj, psi, direction, grad)
    except DegenerateDirectionError:
        return None
    if obj.constraint is not Constraint.NONNEGATIVE:
        new = psi - step * direction
        val = obj.eval(new)
        _check_finite(val)
        return (new, val, step) if val < g_val else None
    # projected path: halve the step until the projected point improves G
    for _ in range(BACKTRACKS):
        new = project_nonneg(psi - step * direction)
        val = obj.eval(new)
        _check_finite(val)
        if val < g_val:
            return new, val, step
        step *= 0.5
    return None


def _check_finite(val):
    if not np.isfinite(val):
        raise FloatingPointError(
            "objective became non-finite; check operator and data scaling (dx_int, noise level)"
        )


def run_descent(obj: Objective, kind: GradientKind, stop: StoppingRule, psi0=None, *,
                phi_true=None, config: dict | None = None) -> tuple[np.ndarray, RunReport]:
    """Minimize ``obj`` from ``psi0`` (zeros by default) until the discrepancy rule holds.

    Each iteration takes ``psi <- project(psi - gamma * d)`` with ``d`` from
    ``kind`` and ``gamma`` from :func:`line_search`. Every accepted step
    strictly decreases G; when no decrease can be found the run ends with
    ``StalledStep``.
    """
    n = obj.op.cols
    psi = np.zeros(n) if psi0 is None else np.array(psi0, dtype=float)
    if psi.shape != (n,):
        raise ValueError(f"psi0 must have length {n}")
    constrained = obj.constraint is Constraint.NONNEGATIVE
    if constrained:
        psi = project_nonneg(psi)
    state = DescentState(psi=psi)
    g_val = obj.eval(psi)
    _check_finite(g_val)
    residual = obj.residual_norm(psi)
    initial = IterationRecord(0, g_val, residual, _rel_error(psi, phi_true), 0.0)

    while True:
        if stop.satisfied(residual):
            reason = StopReason.DISCREPANCY
            break
        if state.iter >= stop.max_iter:
            reason = StopReason.MAX_ITER
            break
        choice = negative_gradient_direction(kind, state, obj)
        if not np.dot(choice.grad, choice.direction) > 0:
            reason = StopReason.STALLED
            break
        attempt = _try_step(obj, state.psi, choice.direction, choice.grad, g_val)
        direction, phi = choice.direction, choice.phi
        if attempt is None and not choice.restarted:
            direction = phi
            attempt = _try_step(obj, state.psi, direction, choice.grad, g_val)
        if attempt is None and phi is not choice.grad:
            direction = phi = choice.grad
            attempt = _try_step(obj, state.psi, direction, choice.grad, g_val)
        if attempt is None:
            reason = StopReason.STALLED
            break
        new, new_val, step = attempt

        state.phi_old, state.l2grad_old, state.dir_old = phi, choice.grad, direction
        if constrained:
            flipped = np.count_nonzero((new == 0) != (state.psi == 0))
            if flipped > ACTIVE_SET_RESET * n:
                state.reset_conjugate()
        state.psi = new
        state.iter += 1
        g_val = new_val
        residual = obj.residual_norm(new)
        state.history.append(
            IterationRecord(state.iter, g_val, residual, _rel_error(new, phi_true), step)
        )

    report = RunReport(
        method=f"ours:{kind.name}",
        stopping=reason,
        initial=initial,
        history=state.history,
        config=dict(config or {}),
        zeros=int(np.count_nonzero(state.psi == 0)),
        extra={"mode": obj.mode.value, "constraint": obj.constraint.value,
               "dx_int": obj.grid.dx_int, "threshold": stop.threshold},
    )
    return state.psi, report
