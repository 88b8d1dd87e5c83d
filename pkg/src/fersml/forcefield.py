"""Socceral force fields.

For every pitch cell and each team the field keeps a running average of where
the ball was heading when it passed through that cell: on every tick the
stored vector is replaced by the mean of itself and the current displacement
``(lcx - lx, lcy - ly)``.  Cells are one coordinate unit wide, so the grid is
1025 x 641.
"""

from __future__ import annotations

import io
import math
from typing import Iterable, Union

import numpy as np

from fersml.errors import BadNormalizer, OutOfBounds

HOME, AWAY = 0, 1
WIDTH, HEIGHT = 1024, 640
GRID_SHAPE = (WIDTH + 1, HEIGHT + 1)


class ForceField:
    """Per-cell, per-team displacement averages.

    ``grid[x, y, axis, team]`` with axis 0 = x, 1 = y and team 0 = home,
    1 = away.
    """

    def __init__(self):
        self.grid = np.zeros(GRID_SHAPE + (2, 2), dtype=np.float64)

    def team(self, team: int) -> np.ndarray:
        return self.grid[:, :, :, team]

    def __eq__(self, other):
        if not isinstance(other, ForceField):
            return NotImplemented
        return np.array_equal(self.grid, other.grid)

    def copy(self) -> "ForceField":
        out = ForceField()
        out.grid[...] = self.grid
        return out


def _check(x, y):
    if not (0 <= x <= WIDTH and 0 <= y <= HEIGHT):
        raise OutOfBounds(f"({x}, {y}) is outside the {WIDTH} x {HEIGHT} pitch")


def update_cell(field: ForceField, lx: int, ly: int, lcx: int, lcy: int, team: int) -> ForceField:
    _check(lx, ly)
    _check(lcx, lcy)
    if team not in (HOME, AWAY):
        raise ValueError(f"team must be 0 (home) or 1 (away), not {team!r}")
    cell = field.grid[lx, ly]
    cell[0, team] = (cell[0, team] + (lcx - lx)) / 2
    cell[1, team] = (cell[1, team] + (lcy - ly)) / 2
    return field


def accumulate(field: ForceField, trace: Union[np.ndarray, Iterable]) -> ForceField:
    """Apply :func:`update_cell` for each ``(lx, ly, lcx, lcy, possession)`` record in order."""
    records = np.asarray(trace, dtype=np.int64).reshape(-1, 5)
    if len(records):
        lo = records[:, :4].min(axis=0)
        hi = records[:, :4].max(axis=0)
        if lo.min() < 0 or max(hi[0], hi[2]) > WIDTH or max(hi[1], hi[3]) > HEIGHT:
            bad = next(r for r in records.tolist()
                       if not (0 <= r[0] <= WIDTH and 0 <= r[1] <= HEIGHT
                               and 0 <= r[2] <= WIDTH and 0 <= r[3] <= HEIGHT))
            raise OutOfBounds(f"trace record {bad} leaves the pitch")
    grid = field.grid
    for lx, ly, lcx, lcy, team in records.tolist():
        cell = grid[lx, ly]
        cell[0, team] = (cell[0, team] + (lcx - lx)) / 2
        cell[1, team] = (cell[1, team] + (lcy - ly)) / 2
    return field


def sum_fields(field: ForceField) -> np.ndarray:
    """Home plus away, one 2-vector per cell."""
    return field.grid[:, :, :, HOME] + field.grid[:, :, :, AWAY]


def magnitude_color(n: float, N: float) -> tuple[int, int, int]:
    if not N > 0:
        raise BadNormalizer(f"normalizer must be positive, got {N!r}")
    if n < 0 or n > N:
        raise BadNormalizer(f"length {n!r} is outside [0, {N!r}]")
    return (math.floor(255 * n / N), 255, 0)


def _vectors(grid) -> np.ndarray:
    if isinstance(grid, ForceField):
        grid = sum_fields(grid)
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 3 or grid.shape[2] != 2:
        raise ValueError(f"expected a (width, height, 2) grid, got shape {grid.shape}")
    return grid


def render(grid, mode: str = "heatmap_ppm") -> bytes:
    """Render a vector grid (or a ForceField's summed grid).

    ``heatmap_ppm`` gives a binary P6 image, one pixel per cell, coloured by
    :func:`magnitude_color` against the largest magnitude present;
    ``vectors_csv`` lists the non-zero cells as ``x,y,vx,vy``.
    """
    vectors = _vectors(grid)
    if mode == "heatmap_ppm":
        return _ppm(vectors)
    if mode == "vectors_csv":
        return _csv(vectors)
    raise ValueError(f"unknown render mode {mode!r}")


def _ppm(vectors: np.ndarray) -> bytes:
    width, height = vectors.shape[:2]
    mags = np.hypot(vectors[:, :, 0], vectors[:, :, 1])
    top = float(mags.max()) if mags.size else 0.0
    norm = top if top > 0 else 1.0
    pixels = np.empty((height, width, 3), dtype=np.uint8)
    pixels[:, :, 0] = np.floor(255 * mags.T / norm).astype(np.uint8)
    pixels[:, :, 1] = 255
    pixels[:, :, 2] = 0
    return f"P6\n{width} {height}\n255\n".encode("ascii") + pixels.tobytes()


def _csv(vectors: np.ndarray) -> bytes:
    out = io.StringIO()
    out.write("x,y,vx,vy\n")
    xs, ys = np.nonzero((vectors[:, :, 0] != 0) | (vectors[:, :, 1] != 0))
    for x, y in zip(xs.tolist(), ys.tolist()):
        vx, vy = vectors[x, y].tolist()
        out.write(f"{x},{y},{vx!r},{vy!r}\n")
    return out.getvalue().encode("utf-8")


def read_ppm(data: bytes) -> np.ndarray:
    """Decode a P6 image written by :func:`render` into a (height, width, 3) array."""
    parts = data.split(b"\n", 3)
    if parts[0] != b"P6":
        raise ValueError("not a binary PPM")
    width, height = map(int, parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(height, width, 3)
