"""Command-line front end: run, compare, sweep-dx, dump-problem."""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import io
from .baselines import Baseline, cgls, landweber, tikhonov_identity
from .descent import run_descent
from .functional import Constraint, Mode
from .gradients import GradientKind, valid_kind_names
from .problems import dump_problem, problem_from_name, unflatten_image
from .report import RunReport, StopReason, StoppingRule, fmt, growth_ratio

log = logging.getLogger("smoothreg")

EXIT_OK, EXIT_ERROR, EXIT_NOT_CONVERGED = 0, 1, 2

_MODES = {"full": Mode.FULL, "data": Mode.DATA_ONLY, "smooth": Mode.SMOOTH_ONLY}


@dataclass(frozen=True)
class RunConfig:
    problem: str = "numdiff:g1"
    noise: float = 0.1
    seed: int = 0
    n: int = 200
    side: int | None = None
    sigma: float = 3.0
    n_angles: int = 18
    n_detectors: int = 24
    method: str = "ours:conj-l2-l2"
    mode: str = "full"
    dx_multiplier: float = 1.0
    constraint: str = "auto"
    tau: float = 1.0
    max_iter: int = 5000
    stop: bool = True

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})

    def validate(self) -> None:
        family, _, name = self.method.partition(":")
        if family == "ours":
            GradientKind.parse(name)
        elif family == "baseline":
            try:
                Baseline(name)
            except ValueError:
                raise ValueError(f"unknown baseline {name!r}; valid: "
                                 f"{', '.join(b.value for b in Baseline)}") from None
        else:
            raise ValueError(f"method must be ours:<gradient> or baseline:<name>, got {self.method!r}")
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {sorted(_MODES)}")
        if self.constraint not in ("auto", "none", "nonneg"):
            raise ValueError("constraint must be auto, none or nonneg")
        if not self.dx_multiplier > 0:
            raise ValueError("dx multiplier must be positive")


def execute(cfg: RunConfig):
    """Build the problem and run the configured method; returns ``(problem, psi, report)``."""
    cfg.validate()
    prob = problem_from_name(cfg.problem, rel_level=cfg.noise, seed=cfg.seed, n=cfg.n,
                             side=cfg.side, sigma=cfg.sigma, n_angles=cfg.n_angles,
                             n_detectors=cfg.n_detectors)
    stop = StoppingRule(prob.delta if cfg.stop else 0.0, cfg.tau, cfg.max_iter)
    family, _, name = cfg.method.partition(":")
    if family == "ours":
        constraint = cfg.constraint
        if constraint == "auto":
            constraint = "nonneg" if prob.side else "none"
        obj = prob.objective(_MODES[cfg.mode],
                             Constraint.NONNEGATIVE if constraint == "nonneg" else Constraint.NONE,
                             cfg.dx_multiplier)
        psi, report = run_descent(obj, GradientKind.parse(name), stop, phi_true=prob.phi_true)
    else:
        method = Baseline(name)
        if method is Baseline.LANDWEBER:
            psi, report = landweber(prob.op, prob.g_noisy, stop, phi_true=prob.phi_true)
        elif method is Baseline.CGLS:
            psi, report = cgls(prob.op, prob.g_noisy, stop, phi_true=prob.phi_true)
        else:
            psi, report, _ = tikhonov_identity(prob.op, prob.g_noisy, stop, phi_true=prob.phi_true)
    report.config = cfg.to_dict()
    return prob, psi, report


def write_artifacts(out: Path, prob, psi, report: RunReport) -> None:
    out.mkdir(parents=True, exist_ok=True)
    report.write_history_csv(out / "history.csv")
    report.write_json(out / "report.json")
    if prob.side:
        io.write_pgm(out / "solution.pgm", unflatten_image(psi, prob.side))
    io.write_vector_csv(out / "solution.csv", psi, "psi")


def _exit_for(report: RunReport) -> int:
    return EXIT_OK if report.stopping is StopReason.DISCREPANCY else EXIT_NOT_CONVERGED


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("SMOOTHREG_THREADS", "")))
    except ValueError:
        return max(1, min(8, os.cpu_count() or 1))


def _config_from_args(args, **override) -> RunConfig:
    base = {f.name: getattr(args, f.name) for f in fields(RunConfig) if hasattr(args, f.name)}
    base.update(override)
    return RunConfig(**base)


def cmd_run(args) -> int:
    cfg = _config_from_args(args)
    prob, psi, report = execute(cfg)
    write_artifacts(Path(args.out), prob, psi, report)
    final = report.final
    print(f"{cfg.method} on {cfg.problem}: {report.stopping.value} after {report.iterations} "
          f"iterations, residual {final.residual_norm:.6g}, rel_error "
          f"{'n/a' if final.rel_error is None else f'{final.rel_error:.4f}'}")
    return _exit_for(report)


def _slug(text: str) -> str:
    return text.replace(":", "_").replace("/", "_")


def cmd_compare(args) -> int:
    methods = [m for m in (args.methods or []) if m]
    if not methods:
        print("compare: no methods given", file=sys.stderr)
        return EXIT_ERROR
    for m in methods:
        _config_from_args(args, method=m, problem=args.problems[0]).validate()
    out = Path(args.out)
    jobs = [(p, m, s) for p in args.problems for m in methods for s in args.seeds]

    def work(job):
        p, m, s = job
        cfg = _config_from_args(args, problem=p, method=m, seed=s)
        try:
            prob, psi, report = execute(cfg)
            write_artifacts(out / "runs" / _slug(p) / _slug(m) / f"seed{s}", prob, psi, report)
            return job, report, None
        except Exception as exc:  # one failed run must not sink the table
            log.error("run %s failed: %s", job, exc)
            return job, None, str(exc)

    with ThreadPoolExecutor(max_workers=_workers()) as pool:
        results = list(pool.map(work, jobs))

    rows, failed = [], False
    for p in args.problems:
        for m in methods:
            runs = [(r, e) for (jp, jm, _), r, e in results if jp == p and jm == m]
            errs = [r.final_rel_error for r, _ in runs if r is not None]
            zeros = [r.zeros for r, _ in runs if r is not None]
            n_failed = sum(1 for r, _ in runs if r is None)
            failed |= n_failed > 0
            rows.append({
                "problem": p, "method": m, "runs": len(errs), "failed": n_failed,
                "mean_rel_error": fmt(np.mean(errs)) if errs else "",
                "min_rel_error": fmt(np.min(errs)) if errs else "",
                "max_rel_error": fmt(np.max(errs)) if errs else "",
                "mean_zeros": fmt(np.mean(zeros)) if zeros else "",
                "status": "failed" if n_failed == len(runs) else ("partial" if n_failed else "ok"),
            })
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "table.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    for row in rows:
        print(f"{row['problem']:>12} {row['method']:>22}  mean {row['mean_rel_error'][:8]:>8}"
              f"  [{row['status']}]")
    return EXIT_ERROR if failed else EXIT_OK


def cmd_sweep_dx(args) -> int:
    mults = args.multipliers
    if not mults or any(not m > 0 for m in mults):
        print("sweep-dx: multipliers must be positive", file=sys.stderr)
        return EXIT_ERROR
    if not args.method.startswith("ours:"):
        print("sweep-dx: only ours:<gradient> methods use the integration mesh size",
              file=sys.stderr)
        return EXIT_ERROR
    out = Path(args.out)

    def work(m):
        cfg = _config_from_args(args, dx_multiplier=m)
        prob, psi, report = execute(cfg)
        write_artifacts(out / f"dx_{fmt(m)}", prob, psi, report)
        return m, report

    with ThreadPoolExecutor(max_workers=_workers()) as pool:
        results = list(pool.map(work, mults))

    out.mkdir(parents=True, exist_ok=True)
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["multiplier", "dx_int", "stopping", "iterations", "final_rel_error",
                    "min_rel_error", "argmin_iter", "growth_ratio"])
        for m, rep in results:
            errs = rep.rel_errors
            w.writerow([fmt(m), fmt(rep.extra["dx_int"]), rep.stopping.value, rep.iterations,
                        fmt(rep.final_rel_error), fmt(min(errs)), int(np.argmin(errs)),
                        fmt(growth_ratio(errs))])
            print(f"dx x{m:g}: final {rep.final_rel_error:.4f}  min {min(errs):.4f}"
                  f" at iter {int(np.argmin(errs))}")
    return EXIT_OK


def cmd_dump_problem(args) -> int:
    prob = problem_from_name(args.problem, rel_level=args.noise, seed=args.seed, n=args.n,
                             side=args.side, sigma=args.sigma, n_angles=args.n_angles,
                             n_detectors=args.n_detectors)
    out = dump_problem(prob, args.out)
    print(f"wrote {prob.meta['name']} ({prob.op.rows}x{prob.op.cols}) to {out}")
    return EXIT_OK


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _add_problem_args(p: argparse.ArgumentParser, many: bool = False) -> None:
    if many:
        p.add_argument("--problem", dest="problems", action="append", required=True,
                       help="problem name (repeatable): numdiff:g1, numdiff:g2, deblur, "
                            "deblur:IMAGE.pgm, tomo")
    else:
        p.add_argument("--problem", default="numdiff:g1",
                       help="numdiff:g1, numdiff:g2, deblur, deblur:IMAGE.pgm or tomo")
    p.add_argument("--noise", type=float, default=0.1, help="relative noise level (default 0.1)")
    p.add_argument("--n", type=int, default=200, help="grid nodes for numdiff (default 200)")
    p.add_argument("--side", type=int, default=None,
                   help="image side for deblur/tomo (defaults 32 and 16)")
    p.add_argument("--sigma", type=float, default=3.0, help="blur width (default 3)")
    p.add_argument("--angles", dest="n_angles", type=int, default=18,
                   help="tomography angles (default 18)")
    p.add_argument("--detectors", dest="n_detectors", type=int, default=24,
                   help="tomography detectors per angle (default 24)")


def _add_method_args(p: argparse.ArgumentParser, with_method: bool = True) -> None:
    if with_method:
        p.add_argument("--method", default="ours:conj-l2-l2",
                       help="ours:<gradient> or baseline:{landweber,cgls,tikhonov}; gradients: "
                            + ", ".join(valid_kind_names()))
    p.add_argument("--mode", choices=sorted(_MODES), default="full",
                   help="functional: full G, data-only G1 or smooth-only G2 (default full)")
    p.add_argument("--constraint", choices=["auto", "none", "nonneg"], default="auto",
                   help="non-negativity projection; auto = on for image problems")
    p.add_argument("--tau", type=float, default=1.0, help="discrepancy factor (default 1)")
    p.add_argument("--max-iter", dest="max_iter", type=int, default=5000,
                   help="iteration cap (default 5000)")
    p.add_argument("--no-stop", dest="stop", action="store_false",
                   help="disable the discrepancy stop and run to --max-iter")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smoothreg",
        description="Smoothed-gradient iterative regularization experiments.",
        epilog="SMOOTHREG_THREADS caps the worker threads used by compare and sweep-dx.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one method on one problem")
    _add_problem_args(p)
    _add_method_args(p)
    p.add_argument("--seed", type=int, default=0, help="noise seed (default 0)")
    p.add_argument("--dx-mult", dest="dx_multiplier", type=float, default=1.0,
                   help="integration mesh-size multiplier (default 1)")
    p.add_argument("--out", default="out", help="output directory (default ./out)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="table of relative errors over methods and seeds")
    _add_problem_args(p, many=True)
    _add_method_args(p, with_method=False)
    p.add_argument("--methods", type=lambda s: [m.strip() for m in s.split(",") if m.strip()],
                   default=None, help="comma-separated method list")
    p.add_argument("--seeds", type=_ints, default=[0], help="comma-separated seeds (default 0)")
    p.add_argument("--dx-mult", dest="dx_multiplier", type=float, default=1.0,
                   help="integration mesh-size multiplier for ours:* (default 1)")
    p.add_argument("--out", default="out", help="output directory (default ./out)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep-dx", help="repeat one run over integration mesh-size multipliers")
    _add_problem_args(p)
    _add_method_args(p)
    p.add_argument("--seed", type=int, default=0, help="noise seed (default 0)")
    p.add_argument("--multipliers", type=_floats, default=[1.0, 3.0, 5.0],
                   help="comma-separated multipliers (default 1,3,5)")
    p.add_argument("--out", default="out", help="output directory (default ./out)")
    p.set_defaults(func=cmd_sweep_dx)

    p = sub.add_parser("dump-problem", help="write a problem instance to CSV/JSON files")
    _add_problem_args(p)
    p.add_argument("--seed", type=int, default=0, help="noise seed (default 0)")
    p.add_argument("--out", default="problem", help="output directory (default ./problem)")
    p.set_defaults(func=cmd_dump_problem)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError, FloatingPointError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
