"""Discrete linear operators and the 1-D grid they live on.

Every operator exposes ``apply`` (the forward map T) and ``apply_adjoint``
(its transpose under the plain Euclidean inner product). Operators are
immutable once built.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


class DimensionError(ValueError):
    """Raised when a vector does not have the length an operator expects."""

    def __init__(self, expected: int, actual: int, what: str = "vector"):
        self.expected = expected
        self.actual = actual
        super().__init__(f"{what} has length {actual}, expected {expected}")


def check_length(v, n: int, what: str = "vector") -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.shape[0] != n:
        raise DimensionError(n, v.shape[0] if v.ndim == 1 else v.size, what)
    return v


@dataclass(frozen=True)
class Grid:
    """Uniform node set on ``[a, b]`` plus the quadrature weight ``dx_int``.

    ``dx_int`` defaults to the node spacing ``h``. It may be set to any
    positive value: it only rescales the Riemann sums used for smoothing
    and norms, it never resamples the data.
    """

    a: float
    b: float
    n: int
    dx_int: float | None = field(default=None)

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError(f"need b > a, got [{self.a}, {self.b}]")
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"need n >= 2 nodes, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if self.dx_int is None:
            object.__setattr__(self, "dx_int", self.h)
        elif not self.dx_int > 0:
            raise ValueError(f"dx_int must be positive, got {self.dx_int}")
        object.__setattr__(self, "dx_int", float(self.dx_int))

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.n - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.n)

    def with_dx(self, dx_int: float) -> "Grid":
        return Grid(self.a, self.b, self.n, dx_int)

    @classmethod
    def artificial(cls, n: int, dx_int: float) -> "Grid":
        """Grid ``[0, (n-1) dx_int]`` for flattened multi-dimensional data."""
        return cls(0.0, (n - 1) * dx_int, n, dx_int)


class OperatorKind(str, enum.Enum):
    DENSE = "DenseMatrix"
    VOLTERRA = "Volterra"
    GAUSSIAN_BLUR = "GaussianBlur2D"
    TOMOGRAPHY = "Tomography"


class LinearOperator:
    """Base class: a forward/adjoint pair between R^cols and R^rows."""

    kind: OperatorKind

    def __init__(self, rows: int, cols: int):
        if rows < 1 or cols < 1:
            raise ValueError("operator dimensions must be positive")
        self.rows = int(rows)
        self.cols = int(cols)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def apply(self, x) -> np.ndarray:
        return self._matvec(check_length(x, self.cols, "input"))

    def apply_adjoint(self, y) -> np.ndarray:
        return self._rmatvec(check_length(y, self.rows, "adjoint input"))

    def to_dense(self) -> np.ndarray:
        """Explicit matrix, built column by column. Fine for desk-scale sizes."""
        eye = np.eye(self.cols)
        return np.column_stack([self._matvec(eye[:, j]) for j in range(self.cols)])

    def _matvec(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _rmatvec(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(rows={self.rows}, cols={self.cols})"


class DenseOperator(LinearOperator):
    kind = OperatorKind.DENSE

    def __init__(self, matrix):
        a = np.array(matrix, dtype=float)
        if a.ndim != 2:
            raise ValueError("dense operator needs a 2-D matrix")
        a.setflags(write=False)
        super().__init__(*a.shape)
        self.matrix = a

    def _matvec(self, x):
        return self.matrix @ x

    def _rmatvec(self, y):
        return self.matrix.T @ y

    def to_dense(self):
        return self.matrix.copy()

    @classmethod
    def from_csv(cls, path) -> "DenseOperator":
        return cls(np.loadtxt(path, delimiter=",", ndmin=2))


class SparseOperator(LinearOperator):
    """Operator backed by a scipy CSR matrix."""

    kind = OperatorKind.DENSE

    def __init__(self, matrix):
        m = sp.csr_matrix(matrix, dtype=float)
        super().__init__(*m.shape)
        self.matrix = m
        self._transpose = m.T.tocsr()

    def _matvec(self, x):
        return self.matrix @ x

    def _rmatvec(self, y):
        return self._transpose @ y

    def to_dense(self):
        return self.matrix.toarray()

    def triplets(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return coo.row[order], coo.col[order], coo.data[order]


class VolterraOperator(LinearOperator):
    """Cumulative integral from ``a`` by the left Riemann rule.

    ``(T x)_k = dx * sum_{i<k} x_i``, so ``(T x)_0 = 0`` and the adjoint
    ``(T* y)_k = dx * sum_{i>k} y_i`` always vanishes at the last node.
    """

    kind = OperatorKind.VOLTERRA

    def __init__(self, grid: Grid):
        super().__init__(grid.n, grid.n)
        self.grid = grid
        self.dx = grid.dx_int

    def _matvec(self, x):
        out = np.empty_like(x)
        out[0] = 0.0
        np.cumsum(x[:-1], out=out[1:])
        return self.dx * out

    def _rmatvec(self, y):
        out = np.empty_like(y)
        out[-1] = 0.0
        out[:-1] = np.cumsum(y[:0:-1])[::-1]
        return self.dx * out

    def to_dense(self):
        return self.dx * np.tril(np.ones((self.rows, self.cols)), -1)


def make_volterra(grid: Grid) -> VolterraOperator:
    return VolterraOperator(grid)


def gaussian_kernel_matrix(side: int, sigma: float, band: int) -> np.ndarray:
    """Banded symmetric Toeplitz matrix of a normalized 1-D Gaussian."""
    offsets = np.arange(-band, band + 1)
    weights = np.exp(-(offsets**2) / (2.0 * sigma**2))
    weights /= weights.sum()
    idx = np.arange(side)
    diff = idx[:, None] - idx[None, :]
    mat = np.zeros((side, side))
    inside = np.abs(diff) <= band
    mat[inside] = weights[diff[inside] + band]
    return mat


class GaussianBlurOperator(LinearOperator):
    """Separable 2-D Gaussian blur on column-major flattened square images.

    The action is ``X -> B X B^T`` with ``B`` the 1-D kernel matrix, which
    equals ``kron(B, B)`` on column-major vectors. ``B`` is symmetric, so the
    operator is self-adjoint. Pixels near the border lose the kernel mass
    that falls outside the image (zero boundary condition).
    """

    kind = OperatorKind.GAUSSIAN_BLUR

    def __init__(self, side: int, sigma: float, band: int | None = None):
        if side < 2:
            raise ValueError("side must be at least 2")
        if not sigma > 0:
            raise ValueError("sigma must be positive")
        if band is None:
            band = math.ceil(4 * sigma)
        band = int(min(max(band, 0), side - 1))
        super().__init__(side * side, side * side)
        self.side = side
        self.sigma = float(sigma)
        self.band = band
        k = gaussian_kernel_matrix(side, sigma, band)
        k.setflags(write=False)
        self.kernel = k

    def _blur(self, v):
        img = v.reshape((self.side, self.side), order="F")
        return (self.kernel @ img @ self.kernel.T).ravel(order="F")

    def _matvec(self, x):
        return self._blur(x)

    def _rmatvec(self, y):
        return self._blur(y)

    def to_dense(self):
        return np.kron(self.kernel, self.kernel)


def make_gaussian_blur(side: int, sigma: float, band: int | None = None) -> GaussianBlurOperator:
    return GaussianBlurOperator(side, sigma, band)


# --- parallel-beam tomography -------------------------------------------------

def ray_pixel_lengths(side: int, origin, direction) -> tuple[np.ndarray, np.ndarray]:
    """Siddon-style traversal of a straight line through a ``side x side`` image.

    The image occupies ``[-side/2, side/2]^2`` with unit pixels; row 0 is at
    the top. Returns column-major flat pixel indices and intersection lengths.
    """
    ox, oy = map(float, origin)
    dx, dy = map(float, direction)
    norm = math.hypot(dx, dy)
    if norm == 0:
        raise ValueError("ray direction must be nonzero")
    dx, dy = dx / norm, dy / norm
    half = side / 2.0
    edges = np.arange(side + 1) - half

    t_lo, t_hi = -np.inf, np.inf
    for o, d in ((ox, dx), (oy, dy)):
        if d == 0.0:
            if not -half <= o <= half:
                return np.empty(0, dtype=int), np.empty(0)
        else:
            t0, t1 = sorted(((-half - o) / d, (half - o) / d))
            t_lo, t_hi = max(t_lo, t0), min(t_hi, t1)
    if not t_hi > t_lo:
        return np.empty(0, dtype=int), np.empty(0)

    ts = [np.array([t_lo, t_hi])]
    for o, d in ((ox, dx), (oy, dy)):
        if d != 0.0:
            t = (edges - o) / d
            ts.append(t[(t > t_lo) & (t < t_hi)])
    t = np.unique(np.concatenate(ts))
    seg = np.diff(t)
    keep = seg > 1e-12
    mid = 0.5 * (t[:-1] + t[1:])[keep]
    seg = seg[keep]
    col = np.floor(ox + mid * dx + half).astype(int)
    row = side - 1 - np.floor(oy + mid * dy + half).astype(int)
    np.clip(col, 0, side - 1, out=col)
    np.clip(row, 0, side - 1, out=row)
    return col * side + row, seg


def tomography_matrix(side: int, n_angles: int, n_detectors: int) -> sp.csr_matrix:
    """Ray matrix for equally spaced angles in [0, 180) degrees.

    Detectors are evenly spread over the image diagonal, so every ray that
    can meet the image is represented. Row index is ``angle * n_detectors +
    detector``.
    """
    span = side * math.sqrt(2.0)
    offsets = -span / 2 + (np.arange(n_detectors) + 0.5) * span / n_detectors
    rows, cols, vals = [], [], []
    for ia in range(n_angles):
        theta = math.pi * ia / n_angles
        normal = (math.cos(theta), math.sin(theta))
        direction = (-math.sin(theta), math.cos(theta))
        for idet, s in enumerate(offsets):
            pix, lengths = ray_pixel_lengths(side, (s * normal[0], s * normal[1]), direction)
            rows.append(np.full(pix.size, ia * n_detectors + idet))
            cols.append(pix)
            vals.append(lengths)
    shape = (n_angles * n_detectors, side * side)
    mat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=shape
    )
    return mat.tocsr()


# (intensity, semi-axis x, semi-axis y, centre x, centre y, rotation degrees)
_SHEPP_LOGAN = np.array([
    [1.0, 0.69, 0.92, 0.0, 0.0, 0.0],
    [-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0],
    [-0.2, 0.11, 0.31, 0.22, 0.0, -18.0],
    [-0.2, 0.16, 0.41, -0.22, 0.0, 18.0],
    [0.1, 0.21, 0.25, 0.0, 0.35, 0.0],
    [0.1, 0.046, 0.046, 0.0, 0.1, 0.0],
    [0.1, 0.046, 0.046, 0.0, -0.1, 0.0],
    [0.1, 0.046, 0.023, -0.08, -0.605, 0.0],
    [0.1, 0.023, 0.023, 0.0, -0.606, 0.0],
    [0.1, 0.023, 0.046, 0.06, -0.605, 0.0],
])


def shepp_logan(side: int, seed: int | None = None) -> np.ndarray:
    """Modified Shepp-Logan phantom as a ``side x side`` array in [0, 1].

    With a seed the ellipse centres and intensities are jittered slightly,
    reproducibly.
    """
    ellipses = _SHEPP_LOGAN.copy()
    if seed is not None:
        rng = np.random.default_rng(seed)
        ellipses[:, 3:5] += rng.normal(0.0, 0.02, size=(len(ellipses), 2))
        ellipses[1:, 0] *= 1.0 + rng.uniform(-0.1, 0.1, size=len(ellipses) - 1)
    centres = (np.arange(side) + 0.5) / side * 2.0 - 1.0
    xx, yy = np.meshgrid(centres, centres[::-1])
    img = np.zeros((side, side))
    for val, ax, ay, cx, cy, rot in ellipses:
        c, s = math.cos(math.radians(rot)), math.sin(math.radians(rot))
        xr = (xx - cx) * c + (yy - cy) * s
        yr = -(xx - cx) * s + (yy - cy) * c
        img[(xr / ax) ** 2 + (yr / ay) ** 2 <= 1.0] += val
    return np.clip(img, 0.0, 1.0)


class TomographyOperator(SparseOperator):
    kind = OperatorKind.TOMOGRAPHY

    def __init__(self, side: int, n_angles: int, n_detectors: int):
        if side < 4:
            raise ValueError("tomography needs side >= 4")
        super().__init__(tomography_matrix(side, n_angles, n_detectors))
        self.side = side
        self.n_angles = n_angles
        self.n_detectors = n_detectors


def make_tomography(side: int, n_angles: int = 18, n_detectors: int | None = None,
                    seed: int | None = None) -> tuple[TomographyOperator, np.ndarray]:
    """Parallel-beam ray operator and a column-major flattened phantom."""
    if n_detectors is None:
        n_detectors = int(math.ceil(side * math.sqrt(2.0)))
    op = TomographyOperator(side, n_angles, n_detectors)
    phantom = shepp_logan(side, seed).ravel(order="F")
    return op, phantom
