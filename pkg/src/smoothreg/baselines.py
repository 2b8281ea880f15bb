"""Reference regularization methods: Landweber, CGLS and Tikhonov (L = I).

All three stop by the same discrepancy rule as the smoothed descent and
return the same :class:`RunReport`. For these methods ``g_value`` in the
history is the plain least-squares value ``||T psi - g||^2``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .operators import LinearOperator, check_length
from .report import IterationRecord, RunReport, StopReason, StoppingRule


class Baseline(str, enum.Enum):
    LANDWEBER = "landweber"
    CGLS = "cgls"
    TIKHONOV = "tikhonov"


@dataclass(frozen=True)
class BaselineConfig:
    method: Baseline
    stop: StoppingRule
    tau_step: float | None = None
    lambda_grid: tuple[float, float, float] = (1e-12, 1e4, 1e-3)


def _rel_error(psi, phi_true):
    if phi_true is None:
        return None
    return float(np.linalg.norm(psi - phi_true) / np.linalg.norm(phi_true))


def _record(it, psi, residual, phi_true, step=0.0):
    return IterationRecord(it, residual**2, residual, _rel_error(psi, phi_true), step)


def normal_operator_norm(op: LinearOperator, iterations: int = 50, seed: int = 0) -> float:
    """Power-iteration estimate of ``||T* T||`` from a seeded start vector."""
    v = np.random.default_rng(seed).standard_normal(op.cols)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iterations):
        w = op.apply_adjoint(op.apply(v))
        est = float(np.linalg.norm(w))
        if est == 0.0:
            return 0.0
        v = w / est
    return est


def landweber(op: LinearOperator, g_noisy, stop: StoppingRule, tau_step: float | None = None,
              *, phi_true=None, seed: int = 0) -> tuple[np.ndarray, RunReport]:
    """Fixed-step iteration ``psi <- psi + tau * T*(g - T psi)`` from zero."""
    g = check_length(g_noisy, op.rows, "data")
    norm = normal_operator_norm(op, seed=seed)
    if tau_step is None:
        tau_step = 1.0 / norm
    elif not 0 < tau_step < 2.0 / norm:
        raise ValueError(f"step {tau_step} outside the stable range (0, {2.0 / norm:.6g})")
    psi = np.zeros(op.cols)
    r = g.copy()
    residual = float(np.linalg.norm(r))
    initial = _record(0, psi, residual, phi_true)
    history = []
    while True:
        if stop.satisfied(residual):
            reason = StopReason.DISCREPANCY
            break
        if len(history) >= stop.max_iter:
            reason = StopReason.MAX_ITER
            break
        psi = psi + tau_step * op.apply_adjoint(r)
        if not np.all(np.isfinite(psi)):
            raise FloatingPointError("Landweber iterate became non-finite")
        r = g - op.apply(psi)
        residual = float(np.linalg.norm(r))
        history.append(_record(len(history) + 1, psi, residual, phi_true, tau_step))
    report = RunReport("baseline:landweber", reason, initial, history,
                       zeros=int(np.count_nonzero(psi == 0)),
                       extra={"tau_step": tau_step, "normal_norm": norm,
                              "threshold": stop.threshold})
    return psi, report


def cgls(op: LinearOperator, g_noisy, stop: StoppingRule, *,
         phi_true=None) -> tuple[np.ndarray, RunReport]:
    """Conjugate gradients on the normal equations ``T*T psi = T* g``."""
    g = check_length(g_noisy, op.rows, "data")
    psi = np.zeros(op.cols)
    r = g.copy()
    s = op.apply_adjoint(r)
    p = s.copy()
    gamma = float(s @ s)
    residual = float(np.linalg.norm(r))
    initial = _record(0, psi, residual, phi_true)
    history = []
    while True:
        if stop.satisfied(residual):
            reason = StopReason.DISCREPANCY
            break
        if len(history) >= stop.max_iter:
            reason = StopReason.MAX_ITER
            break
        q = op.apply(p)
        qq = float(q @ q)
        if gamma == 0.0 or qq == 0.0:
            reason = StopReason.STALLED
            break
        alpha = gamma / qq
        psi = psi + alpha * p
        r = r - alpha * q
        s = op.apply_adjoint(r)
        gamma_new = float(s @ s)
        p = s + (gamma_new / gamma) * p
        gamma = gamma_new
        residual = float(np.linalg.norm(r))
        history.append(_record(len(history) + 1, psi, residual, phi_true, alpha))
    report = RunReport("baseline:cgls", reason, initial, history,
                       zeros=int(np.count_nonzero(psi == 0)),
                       extra={"threshold": stop.threshold})
    return psi, report


class TikhonovSolver:
    """``(T*T + lam I) psi = T* g`` for many ``lam`` from one SVD of ``T``."""

    def __init__(self, op: LinearOperator, g_noisy):
        self.g = check_length(g_noisy, op.rows, "data")
        u, s, vt = np.linalg.svd(op.to_dense(), full_matrices=False)
        self.s, self.vt = s, vt
        self.beta = u.T @ self.g
        # part of g outside the range of T, which no lam can fit
        self.floor_sq = max(float(self.g @ self.g - self.beta @ self.beta), 0.0)

    def solve(self, lam: float) -> np.ndarray:
        return self.vt.T @ (self.s * self.beta / (self.s**2 + lam))

    def residual(self, lam: float) -> float:
        damp = lam / (self.s**2 + lam)
        return math.sqrt(float(np.sum((damp * self.beta) ** 2)) + self.floor_sq)


def tikhonov_identity(op: LinearOperator, g_noisy, stop: StoppingRule,
                      lambda_grid: tuple[float, float, float] = (1e-12, 1e4, 1e-3), *,
                      phi_true=None) -> tuple[np.ndarray, RunReport, float]:
    """Tikhonov with ``L = I`` and ``lam`` picked by bisection on the discrepancy.

    ``lam -> ||T psi_lam - g||`` is nondecreasing, so bisection in ``log lam``
    between ``lo`` and ``hi`` finds the value where the residual equals
    ``tau * delta`` to relative tolerance ``tol``. If the target lies outside
    the attainable range the nearest end is returned and flagged.
    """
    lo, hi, tol = lambda_grid
    if not 0 < lo < hi:
        raise ValueError("need 0 < lo < hi for the lambda bracket")
    solver = TikhonovSolver(op, g_noisy)
    target = stop.threshold
    flag = None
    steps = 0
    if target <= solver.residual(lo):
        lam, flag = lo, "target below attainable residual; smallest lambda used"
    elif target >= solver.residual(hi):
        lam, flag = hi, "target above residual at largest lambda"
    else:
        a, b = math.log(lo), math.log(hi)
        lam = math.sqrt(lo * hi)
        while steps < min(stop.max_iter, 200):
            steps += 1
            lam = math.exp(0.5 * (a + b))
            res = solver.residual(lam)
            if abs(res - target) <= tol * target:
                break
            if res > target:
                b = math.log(lam)
            else:
                a = math.log(lam)
    psi = solver.solve(lam)
    residual = float(np.linalg.norm(op.apply(psi) - solver.g))
    initial = _record(0, np.zeros(op.cols), float(np.linalg.norm(solver.g)), phi_true)
    reason = StopReason.DISCREPANCY if flag is None else StopReason.MAX_ITER
    report = RunReport("baseline:tikhonov", reason, initial,
                       [_record(1, psi, residual, phi_true, lam)],
                       zeros=int(np.count_nonzero(psi == 0)),
                       extra={"lambda": lam, "bisection_steps": steps, "flag": flag,
                              "threshold": target})
    return psi, report, lam


def run_baseline(config: BaselineConfig, op: LinearOperator, g_noisy, *,
                 phi_true=None) -> tuple[np.ndarray, RunReport]:
    method = Baseline(config.method)
    if method is Baseline.LANDWEBER:
        return landweber(op, g_noisy, config.stop, config.tau_step, phi_true=phi_true)
    if method is Baseline.CGLS:
        return cgls(op, g_noisy, config.stop, phi_true=phi_true)
    psi, report, _ = tikhonov_identity(op, g_noisy, config.stop, config.lambda_grid,
                                       phi_true=phi_true)
    return psi, report
