"""Plain-text file formats: CSV vectors/matrices/triplets and PGM (P2) images."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .report import fmt


def write_vector_csv(path, v, header: str = "value") -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([header])
        for x in np.asarray(v, dtype=float):
            w.writerow([fmt(x)])


def read_vector_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=1)


def write_matrix_csv(path, a) -> None:
    """Rows of comma-separated decimals, no header (readable by DenseOperator.from_csv)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in np.atleast_2d(np.asarray(a, dtype=float)):
            w.writerow([fmt(x) for x in row])


def write_triplets_csv(path, rows, cols, vals) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "col", "value"])
        for r, c, v in zip(rows, cols, vals):
            w.writerow([int(r), int(c), fmt(v)])


def read_triplets_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0].astype(int), data[:, 1].astype(int), data[:, 2]


def _pgm_tokens(text: str):
    for line in text.splitlines():
        line = line.split("#", 1)[0]
        yield from line.split()


def read_pgm(path) -> np.ndarray:
    """Read an ASCII PGM and scale it to [0, 1]."""
    tokens = _pgm_tokens(Path(path).read_text())
    magic = next(tokens)
    if magic != "P2":
        raise ValueError(f"{path}: only ASCII PGM (P2) is supported, got {magic}")
    width, height, maxval = (int(next(tokens)) for _ in range(3))
    pixels = np.array([float(t) for t in tokens])
    if pixels.size != width * height:
        raise ValueError(f"{path}: expected {width * height} pixels, found {pixels.size}")
    return pixels.reshape(height, width) / maxval


def write_pgm(path, img, maxval: int = 255) -> None:
    """Write a [0, 1] image as ASCII PGM; values outside are clipped."""
    img = np.asarray(img, dtype=float)
    q = np.rint(np.clip(img, 0.0, 1.0) * maxval).astype(int)
    h, w = q.shape
    lines = ["P2", f"{w} {h}", str(maxval)]
    lines += [" ".join(map(str, row)) for row in q]
    Path(path).write_text("\n".join(lines) + "\n")


def read_image(path) -> np.ndarray:
    """PGM or CSV (rows of decimals) image."""
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        return read_pgm(path)
    return np.loadtxt(path, delimiter=",", ndmin=2)
