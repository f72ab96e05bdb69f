"""Overlapping 3x4 patch grid over a view, split into the two 6-patch sets.

Patches are indexed 1..12 left-to-right, top-to-bottom. Indices
{2,3,5,8,10,11} trace a ring (the "O" set) and {1,4,6,7,9,12} two columns
(the "I" set); each set is kept in ascending index order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import ShapeError
from .geometry import ConfigError

GRID_ROWS = 3
GRID_COLS = 4
O_INDICES = (2, 3, 5, 8, 10, 11)
I_INDICES = (1, 4, 6, 7, 9, 12)


@dataclass(frozen=True)
class GridSpec:
    view_size: int
    patch_size: int
    x_offsets: tuple[int, ...]
    y_offsets: tuple[int, ...]


@dataclass
class PatchGrid:
    patches: list[np.ndarray]  # 12 windows, index j stored at patches[j-1]
    spec: GridSpec


def _round_half_away(x: float) -> int:
    return int(np.floor(x + 0.5)) if x >= 0 else -int(np.floor(-x + 0.5))


def make_gridspec(view_size: int, patch_size: int) -> GridSpec:
    """Window offsets for the 3x4 grid; rejects gappy or colliding layouts."""
    if patch_size <= 0 or patch_size > view_size:
        raise ConfigError(f"patch size {patch_size} must be in (0, {view_size}]")
    span = view_size - patch_size
    xs = tuple(_round_half_away(k * span / (GRID_COLS - 1)) for k in range(GRID_COLS))
    ys = tuple(_round_half_away(k * span / (GRID_ROWS - 1)) for k in range(GRID_ROWS))
    for name, offs in (("x", xs), ("y", ys)):
        steps = np.diff(offs)
        if span > 0 and (steps <= 0).any():
            raise ConfigError(f"{name} offsets {offs} collide; view {view_size} too close to patch {patch_size}")
        if (steps > patch_size).any():
            raise ConfigError(f"{name} offsets {offs} leave uncovered pixels for patch size {patch_size}")
    return GridSpec(view_size=view_size, patch_size=patch_size, x_offsets=xs, y_offsets=ys)


def extract_patches(view: np.ndarray, spec: GridSpec) -> PatchGrid:
    """Copy out the 12 windows; pixels are taken verbatim."""
    if view.shape != (spec.view_size, spec.view_size):
        raise ShapeError(f"view shape {view.shape} does not match spec size {spec.view_size}")
    h = spec.patch_size
    patches = []
    for j in range(GRID_ROWS * GRID_COLS):
        y = spec.y_offsets[j // GRID_COLS]
        x = spec.x_offsets[j % GRID_COLS]
        patches.append(view[y : y + h, x : x + h].copy())
    return PatchGrid(patches=patches, spec=spec)


def o_i_sequences(grid: PatchGrid):
    """The ring-shaped and column-shaped patch sequences, ascending order."""
    o = [grid.patches[j - 1] for j in O_INDICES]
    i = [grid.patches[j - 1] for j in I_INDICES]
    return o, i
