"""Benchmark problems with ground truth and seeded noise."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import scipy.sparse as sp

from . import io
from .functional import Constraint, Mode, Objective
from .operators import (
    Grid, LinearOperator, OperatorKind, SparseOperator, make_gaussian_blur,
    make_tomography, make_volterra,
)
from .smoothing import smooth_data

DEFAULT_IMAGE_DX = 1e-4


@dataclass(frozen=True)
class ProblemInstance:
    op: LinearOperator
    grid: Grid
    phi_true: np.ndarray
    g_exact: np.ndarray
    g_noisy: np.ndarray
    delta: float
    meta: dict[str, Any] = field(default_factory=dict)
    domain_grid: Grid | None = None

    @property
    def side(self) -> int | None:
        return self.meta.get("side")

    def objective(self, mode=Mode.FULL, constraint=Constraint.NONE,
                  dx_multiplier: float = 1.0) -> Objective:
        """Objective on the noisy data, with the quadrature weight scaled by ``dx_multiplier``."""
        if not dx_multiplier > 0:
            raise ValueError("dx multiplier must be positive")
        data_grid = self.grid.with_dx(self.grid.dx_int * dx_multiplier)
        domain = self.domain_grid
        if domain is not None:
            domain = domain.with_dx(domain.dx_int * dx_multiplier)
        return Objective(self.op, smooth_data(self.g_noisy, data_grid), Mode(mode),
                         Constraint(constraint), domain)

    def rel_error(self, psi) -> float:
        return float(np.linalg.norm(psi - self.phi_true) / np.linalg.norm(self.phi_true))


def add_noise(g, rel_level: float, seed: int) -> tuple[np.ndarray, float]:
    """Add Gaussian noise rescaled so that ``||noise|| / ||g||`` is exactly ``rel_level``.

    Samples come from numpy's PCG64 generator seeded with ``seed``.
    """
    g = np.asarray(g, dtype=float)
    if rel_level < 0:
        raise ValueError("noise level must be >= 0")
    if rel_level == 0:
        return g.copy(), 0.0
    g_norm = np.linalg.norm(g)
    if g_norm == 0:
        raise ValueError("cannot add relative noise to a zero vector")
    noise = np.random.default_rng(seed).standard_normal(g.shape)
    delta = rel_level * g_norm
    noise *= delta / np.linalg.norm(noise)
    return g + noise, float(delta)


# --- numerical differentiation ------------------------------------------------

_NUMDIFF = {
    # name: (g, g')
    "g1": (lambda x: x**3 / 3 - x, lambda x: x**2 - 1),
    "g2": (lambda x: x**3 / 3 - x / 2, lambda x: x**2 - 0.5),
}


def make_numdiff_problem(which: str = "g1", n: int = 200, rel_level: float = 0.1,
                         seed: int = 0) -> ProblemInstance:
    """Recover ``g'`` on [-1, 1] from noisy samples of ``g(x) - g(-1)``."""
    if which not in _NUMDIFF:
        raise ValueError(f"unknown numdiff problem {which!r}; choose from {sorted(_NUMDIFF)}")
    if n < 10:
        raise ValueError("numdiff problem needs n >= 10")
    grid = Grid(-1.0, 1.0, n)
    g, dg = _NUMDIFF[which]
    x = grid.nodes
    g_exact = g(x) - g(grid.a)
    g_noisy, delta = add_noise(g_exact, rel_level, seed)
    return ProblemInstance(
        op=make_volterra(grid), grid=grid, phi_true=dg(x), g_exact=g_exact,
        g_noisy=g_noisy, delta=delta,
        meta={"name": f"numdiff:{which}", "n": n, "noise": rel_level, "seed": seed},
    )


# --- images -------------------------------------------------------------------

def flatten_image(img) -> np.ndarray:
    img = np.asarray(img, dtype=float)
    if img.ndim != 2:
        raise ValueError("image must be 2-D")
    return img.ravel(order="F")


def unflatten_image(v, side: int) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.size != side * side:
        raise ValueError(f"vector of length {v.size} is not a {side}x{side} image")
    return v.reshape((side, side), order="F")


def builtin_scene(side: int) -> np.ndarray:
    """Piecewise-constant test scene in [0, 1]: blocks, a disk and a thin bar."""
    c = (np.arange(side) + 0.5) / side
    yy, xx = np.meshgrid(c, c, indexing="ij")
    img = np.zeros((side, side))
    img[(yy > 0.12) & (yy < 0.45) & (xx > 0.1) & (xx < 0.42)] = 0.6
    img[(yy - 0.62) ** 2 + (xx - 0.66) ** 2 < 0.22**2] = 1.0
    img[(yy > 0.55) & (yy < 0.85) & (xx > 0.14) & (xx < 0.3)] = 0.8
    img[(yy > 0.2) & (yy < 0.27) & (xx > 0.5) & (xx < 0.9)] = 0.4
    return img


def make_deblur_problem(side: int = 32, sigma: float = 3.0, rel_level: float = 0.1,
                        seed: int = 0, image: str = "builtin", band: int | None = None,
                        dx_int: float = DEFAULT_IMAGE_DX) -> ProblemInstance:
    """Gaussian-blurred image plus noise; ``image`` is ``"builtin"`` or a PGM/CSV path."""
    if image == "builtin":
        if side < 8:
            raise ValueError("deblur problem needs side >= 8")
        img = builtin_scene(side)
    else:
        img = io.read_image(image)
        if img.shape[0] != img.shape[1]:
            raise ValueError(f"image {image} is {img.shape[0]}x{img.shape[1]}, not square")
        side = img.shape[0]
    op = make_gaussian_blur(side, sigma, band)
    phi = flatten_image(img)
    g_exact = op.apply(phi)
    g_noisy, delta = add_noise(g_exact, rel_level, seed)
    grid = Grid.artificial(side * side, dx_int)
    return ProblemInstance(
        op=op, grid=grid, phi_true=phi, g_exact=g_exact, g_noisy=g_noisy, delta=delta,
        meta={"name": "deblur", "side": side, "sigma": sigma, "band": op.band,
              "noise": rel_level, "seed": seed, "image": str(image)},
    )


def make_tomo_problem(side: int = 16, n_angles: int = 18, n_detectors: int = 24,
                      rel_level: float = 0.1, seed: int = 0, phantom_seed: int | None = None,
                      dx_int: float = DEFAULT_IMAGE_DX) -> ProblemInstance:
    if side < 8:
        raise ValueError("tomography problem needs side >= 8")
    op, phantom = make_tomography(side, n_angles, n_detectors, phantom_seed)
    g_exact = op.apply(phantom)
    g_noisy, delta = add_noise(g_exact, rel_level, seed)
    return ProblemInstance(
        op=op, grid=Grid.artificial(op.rows, dx_int), phi_true=phantom, g_exact=g_exact,
        g_noisy=g_noisy, delta=delta,
        meta={"name": "tomo", "side": side, "n_angles": n_angles, "n_detectors": n_detectors,
              "noise": rel_level, "seed": seed, "phantom_seed": phantom_seed},
        domain_grid=Grid.artificial(op.cols, dx_int),
    )


def dump_problem(inst: ProblemInstance, directory) -> Path:
    """Write operator, vectors and metadata of ``inst`` into ``directory``."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    if isinstance(inst.op, SparseOperator):
        io.write_triplets_csv(out / "operator.csv", *inst.op.triplets())
    elif inst.op.kind is OperatorKind.GAUSSIAN_BLUR:
        coo = sp.kron(sp.csr_matrix(inst.op.kernel), sp.csr_matrix(inst.op.kernel)).tocoo()
        order = np.lexsort((coo.col, coo.row))
        io.write_triplets_csv(out / "operator.csv", coo.row[order], coo.col[order], coo.data[order])
    else:
        io.write_matrix_csv(out / "operator.csv", inst.op.to_dense())
    io.write_vector_csv(out / "phi_true.csv", inst.phi_true, "phi_true")
    io.write_vector_csv(out / "g_exact.csv", inst.g_exact, "g_exact")
    io.write_vector_csv(out / "g_noisy.csv", inst.g_noisy, "g_noisy")
    meta = dict(inst.meta, operator=inst.op.kind.value, rows=inst.op.rows, cols=inst.op.cols,
                delta=inst.delta, grid={"a": inst.grid.a, "b": inst.grid.b, "n": inst.grid.n,
                                        "dx_int": inst.grid.dx_int})
    (out / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    if inst.side:
        io.write_pgm(out / "phi_true.pgm", unflatten_image(inst.phi_true, inst.side))
    return out


def problem_from_name(name: str, *, rel_level: float = 0.1, seed: int = 0, n: int = 200,
                      side: int | None = None, sigma: float = 3.0, n_angles: int = 18,
                      n_detectors: int = 24, image: str = "builtin") -> ProblemInstance:
    """Build a problem from a CLI-style name: ``numdiff:g1``, ``numdiff:g2``, ``deblur``, ``tomo``."""
    family, _, arg = name.partition(":")
    if family == "numdiff":
        return make_numdiff_problem(arg or "g1", n, rel_level, seed)
    if family == "deblur":
        return make_deblur_problem(side or 32, sigma, rel_level, seed, image=arg or image)
    if family == "tomo":
        return make_tomo_problem(side or 16, n_angles, n_detectors, rel_level, seed)
    raise ValueError(f"unknown problem {name!r}; valid: numdiff:g1, numdiff:g2, deblur, tomo")


__all__ = [
    "ProblemInstance", "add_noise", "make_numdiff_problem", "make_deblur_problem",
    "make_tomo_problem", "flatten_image", "unflatten_image", "builtin_scene", "dump_problem",
    "problem_from_name",
]
