"""Dataset loading and synthetic manifolds with known latent coordinates."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass
class Dataset:
    name: str
    Y: np.ndarray
    truth: np.ndarray | None = None
    labels: np.ndarray | None = None

    def __post_init__(self):
        self.Y = np.asarray(self.Y, dtype=float)
        if self.Y.ndim != 2:
            raise ValueError("data must be a points x features matrix")
        if not np.all(np.isfinite(self.Y)):
            i, j = np.argwhere(~np.isfinite(self.Y))[0]
            raise ValueError(f"non-finite value at row {i + 1}, column {j + 1}")


def load_csv(path, header: bool = False, delimiter: str = ",", name: str | None = None) -> Dataset:
    """Read a numeric CSV, one point per row.

    Row and column numbers in error messages are 1-based and count the
    header line when present.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh, delimiter=delimiter))
    offset = 1
    if header and rows:
        rows = rows[1:]
        offset = 2
    rows = [(k, r) for k, r in enumerate(rows) if any(c.strip() for c in r)]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    width = len(rows[0][1])
    data = []
    for k, r in rows:
        if len(r) != width:
            raise ValueError(f"{path}: row {k + offset} has {len(r)} fields, expected {width}")
        vals = []
        for c, cell in enumerate(r):
            try:
                v = float(cell)
            except ValueError:
                raise ValueError(f"{path}: non-numeric value {cell.strip()!r} "
                                 f"at row {k + offset}, column {c + 1}") from None
            if not math.isfinite(v):
                raise ValueError(f"{path}: non-finite value {cell.strip()!r} "
                                 f"at row {k + offset}, column {c + 1}")
            vals.append(v)
        data.append(vals)
    return Dataset(name or path.stem, np.array(data))


def swiss_roll(n: int, noise: float = 0.0, seed=None) -> Dataset:
    rng = np.random.default_rng(seed)
    t = 1.5 * np.pi * (1 + 2 * rng.random(n))
    h = 21.0 * rng.random(n)
    Y = np.c_[t * np.cos(t), h, t * np.sin(t)]
    Y += noise * rng.standard_normal(Y.shape)
    return Dataset("swiss_roll", Y, np.c_[t, h], t)


def s_curve(n: int, noise: float = 0.0, seed=None) -> Dataset:
    rng = np.random.default_rng(seed)
    t = 3 * np.pi * (rng.random(n) - 0.5)
    h = 2.0 * rng.random(n)
    Y = np.c_[np.sin(t), h, np.sign(t) * (np.cos(t) - 1)]
    Y += noise * rng.standard_normal(Y.shape)
    return Dataset("s_curve", Y, np.c_[t, h], t)


def ring(n: int, noise: float = 0.0, seed=None, p: int = 3) -> Dataset:
    """Points on the unit circle in the first two of ``p`` dimensions."""
    rng = np.random.default_rng(seed)
    t = np.sort(2 * np.pi * rng.random(n))
    Y = np.zeros((n, p))
    Y[:, 0], Y[:, 1] = np.cos(t), np.sin(t)
    Y += noise * rng.standard_normal(Y.shape)
    return Dataset("ring", Y, t[:, None], t)


def circle_images_proxy(n: int, noise: float = 0.0, seed=None, size: int = 16) -> Dataset:
    """Rotations of one fixed random image: a closed 1-d manifold in pixel space."""
    rng = np.random.default_rng(seed)
    base = rng.random((size, size))
    t = np.sort(2 * np.pi * rng.random(n))
    c = (size - 1) / 2.0
    yy, xx = np.mgrid[0:size, 0:size] - c
    Y = np.empty((n, size * size))
    for k, a in enumerate(t):
        ca, sa = math.cos(a), math.sin(a)
        xs = ca * xx + sa * yy + c
        ys = -sa * xx + ca * yy + c
        Y[k] = _bilinear(base, ys, xs).ravel()
    Y += noise * rng.standard_normal(Y.shape)
    return Dataset("circle_images_proxy", Y, t[:, None], t)


def _bilinear(img, ys, xs):
    size = img.shape[0]
    ys = np.clip(ys, 0, size - 1)
    xs = np.clip(xs, 0, size - 1)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, size - 1)
    x1 = np.minimum(x0 + 1, size - 1)
    fy, fx = ys - y0, xs - x0
    return ((1 - fy) * (1 - fx) * img[y0, x0] + (1 - fy) * fx * img[y0, x1]
            + fy * (1 - fx) * img[y1, x0] + fy * fx * img[y1, x1])


GENERATORS = {
    "swiss_roll": swiss_roll,
    "s_curve": s_curve,
    "ring": ring,
    "circle_images_proxy": circle_images_proxy,
}


def generate(name: str, n: int, noise: float = 0.0, seed=None) -> Dataset:
    if name not in GENERATORS:
        raise ValueError(f"unknown generator {name!r}; choose from {sorted(GENERATORS)}")
    if n < 10:
        raise ValueError("need at least 10 points")
    return GENERATORS[name](n, noise, seed)
