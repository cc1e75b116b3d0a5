"""Occupancy grid and position repair.

Randomly generated positions frequently put components inside each other.
Rather than discarding such configurations, the repair procedure moves the
offending components: a grid subdivides the parent interior, cells covered by
a component are flagged occupied, and a component to be repaired is moved to
the free grid point closest to where it started.  Components attached to a
panel are repaired the same way on a 2D grid spanning the panel rectangle.

A grid point is *free* for a component when the component's bounding box,
centered on that point, stays inside the grid bounds and covers no occupied
cell.  Cells are occupied conservatively: any cell sharing positive volume
(or area, in 2D) with an inserted bounding box is flagged.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import product
from pathlib import Path

import numpy as np

from .config import ComponentNode, SpacecraftConfig
from .errors import OutOfBounds, RepairFailed

DEFAULT_RESOLUTION = 0.05  # m
_EPS = 1e-9


@dataclass
class OccupancyGrid:
    """Regular grid of cells over an axis-aligned region (2D or 3D).

    The requested resolution is adjusted per axis so that an integer number
    of cells tiles the bounds exactly.  Grid points are cell centers.
    """

    lo: np.ndarray
    hi: np.ndarray
    cell_size: np.ndarray
    cells: np.ndarray   # uint8, 0 free / 1 occupied

    @classmethod
    def from_bounds(cls, lo, hi, resolution: float) -> "OccupancyGrid":
        if resolution <= 0:
            raise ValueError("resolution must be positive")
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        span = hi - lo
        if np.any(span <= 0):
            raise ValueError("grid bounds must have positive extent")
        counts = np.maximum(1, np.rint(span / resolution).astype(int))
        return cls(lo=lo, hi=hi, cell_size=span / counts,
                   cells=np.zeros(tuple(counts), dtype=np.uint8))

    @property
    def ndim(self) -> int:
        return self.cells.ndim

    @property
    def occupied_count(self) -> int:
        return int(self.cells.sum())

    def centers_1d(self, axis: int) -> np.ndarray:
        n = self.cells.shape[axis]
        return self.lo[axis] + (np.arange(n) + 0.5) * self.cell_size[axis]

    def _cell_range(self, lo_box, hi_box) -> tuple[np.ndarray, np.ndarray]:
        rel_lo = (np.asarray(lo_box) - self.lo) / self.cell_size
        rel_hi = (np.asarray(hi_box) - self.lo) / self.cell_size
        i0 = np.floor(rel_lo + _EPS).astype(int)
        i1 = np.ceil(rel_hi - _EPS).astype(int) - 1
        return i0, i1

    def insert_box(self, lo_box, hi_box, clip: bool = False) -> None:
        """Mark every cell sharing positive volume with the box as occupied."""
        lo_box = np.asarray(lo_box, dtype=float)
        hi_box = np.asarray(hi_box, dtype=float)
        if not clip and (np.any(lo_box < self.lo - _EPS) or np.any(hi_box > self.hi + _EPS)):
            raise OutOfBounds(f"box [{lo_box}, {hi_box}] exceeds grid bounds")
        i0, i1 = self._cell_range(lo_box, hi_box)
        i0 = np.maximum(i0, 0)
        i1 = np.minimum(i1, np.array(self.cells.shape) - 1)
        if np.any(i1 < i0):
            return
        sl = tuple(slice(a, b + 1) for a, b in zip(i0, i1))
        self.cells[sl] = 1

    def free_center_mask(self, half_extents) -> np.ndarray:
        """Boolean mask over grid points where a box of the given half
        extents could be centered: in bounds and clear of occupied cells."""
        he = np.asarray(half_extents, dtype=float)
        ratio = he / self.cell_size
        k_lo = np.floor(0.5 - ratio + _EPS).astype(int)
        k_hi = np.ceil(0.5 + ratio - _EPS).astype(int) - 1
        window = k_hi - k_lo + 1
        shape = np.array(self.cells.shape)
        valid = shape - window + 1
        mask = np.zeros(tuple(shape), dtype=bool)
        if np.any(valid < 1):
            return mask
        sums = _window_sums(self.cells, window)
        inner = sums == 0
        sl = tuple(slice(-k_lo[d], -k_lo[d] + valid[d]) for d in range(len(shape)))
        mask[sl] = inner
        return mask

    def to_csv(self, path: str | Path) -> None:
        """Debug dump: one row per cell with its index and occupancy flag."""
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow([f"i{d}" for d in range(self.ndim)] + ["occupied"])
            for idx in np.ndindex(self.cells.shape):
                writer.writerow(list(idx) + [int(self.cells[idx])])


def _window_sums(occ: np.ndarray, window: np.ndarray) -> np.ndarray:
    """Sums of ``occ`` over every sliding window of the given size."""
    padded = np.zeros(tuple(np.array(occ.shape) + 1), dtype=np.int64)
    padded[tuple(slice(1, None) for _ in occ.shape)] = occ
    for axis in range(occ.ndim):
        np.cumsum(padded, axis=axis, out=padded)
    out_shape = tuple(np.array(occ.shape) - window + 1)
    total = np.zeros(out_shape, dtype=np.int64)
    for corner in product((0, 1), repeat=occ.ndim):
        sign = (-1) ** (occ.ndim - sum(corner))
        sl = tuple(
            slice(window[d], window[d] + out_shape[d]) if bit else slice(0, out_shape[d])
            for d, bit in enumerate(corner)
        )
        total += sign * padded[sl]
    return total


def insert_component(grid: OccupancyGrid, node: ComponentNode) -> OccupancyGrid:
    """Insert a free-floating component's bounding box into a 3D grid."""
    if node.position is None or len(node.position) != grid.ndim:
        raise OutOfBounds(f"component {node.uid} has no {grid.ndim}D position")
    he = np.asarray(node.half_extents()[: grid.ndim])
    center = np.asarray(node.position)
    grid.insert_box(center - he, center + he)
    return grid


# ---------------------------------------------------------------------------
# Overlap detection

def _aabbs(config: SpacecraftConfig) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    out = {}
    for node in config.placeable_components():
        lo, hi = config.component_aabb(node)
        out[node.uid] = (np.asarray(lo), np.asarray(hi))
    return out


def _boxes_overlap(a, b, eps: float = 1e-12) -> bool:
    return bool(np.all(np.minimum(a[1], b[1]) - np.maximum(a[0], b[0]) > eps))


def detect_overlaps(config: SpacecraftConfig) -> list[tuple[str, str]]:
    """Every unordered pair of positioned components whose bounding boxes
    intersect with positive volume.  Face contact does not count."""
    boxes = _aabbs(config)
    nodes = sorted(config.placeable_components(), key=lambda n: (n.id, n.instance))
    pairs = []
    for i, a in enumerate(nodes):
        for b in nodes[i + 1:]:
            if _boxes_overlap(boxes[a.uid], boxes[b.uid]):
                pairs.append((a.uid, b.uid))
    return pairs


# ---------------------------------------------------------------------------
# Repair

def _panel_footprint(config: SpacecraftConfig, node: ComponentNode) -> np.ndarray:
    """Half extents of the component's footprint in its panel's (u, v) frame."""
    panel = config.panel_by_id(node.parent_id)
    _, u, v, _ = config.panel_frame(panel)
    he = node.half_extents()
    return np.array([
        sum(abs(u[i]) * he[i] for i in range(3)),
        sum(abs(v[i]) * he[i] for i in range(3)),
    ])


def _nearest_free_center(grid: OccupancyGrid, half_extents, origin) -> np.ndarray | None:
    """Free grid point nearest to ``origin``; ties break on the
    lexicographically smallest cell index."""
    mask = grid.free_center_mask(half_extents)
    if not mask.any():
        return None
    origin = np.asarray(origin, dtype=float)
    d2 = np.zeros(mask.shape)
    for axis in range(grid.ndim):
        axis_d2 = (grid.centers_1d(axis) - origin[axis]) ** 2
        shape = [1] * grid.ndim
        shape[axis] = -1
        d2 = d2 + axis_d2.reshape(shape)
    d2 = np.where(mask, d2, np.inf)
    best = d2.min()
    # first flat index within tolerance of the minimum = lexicographic winner
    winner = np.unravel_index(int(np.argmax(d2 <= best + 1e-12)), mask.shape)
    return grid.lo + (np.asarray(winner) + 0.5) * grid.cell_size


def _repair_free(config: SpacecraftConfig, target: ComponentNode, resolution: float) -> None:
    he = config.parent_half_extents()
    grid = OccupancyGrid.from_bounds([-x for x in he], list(he), resolution)
    for node in config.placeable_components():
        if node.uid == target.uid:
            continue
        lo, hi = config.component_aabb(node)
        grid.insert_box(lo, hi, clip=True)
    center = _nearest_free_center(grid, target.half_extents(), target.position)
    if center is None:
        raise RepairFailed(f"no free grid point for component {target.uid}")
    target.position = tuple(float(c) for c in center)


def _repair_attached(config: SpacecraftConfig, target: ComponentNode, resolution: float) -> None:
    panel = config.panel_by_id(target.parent_id)
    grid = OccupancyGrid.from_bounds([-panel.l / 2, -panel.w / 2],
                                     [panel.l / 2, panel.w / 2], resolution)
    for node in config.placeable_components():
        if node.uid == target.uid or node.parent_id != target.parent_id:
            continue
        fp = _panel_footprint(config, node)
        pos = np.asarray(node.position)
        grid.insert_box(pos - fp, pos + fp, clip=True)
    center = _nearest_free_center(grid, _panel_footprint(config, target), target.position)
    if center is None:
        raise RepairFailed(f"no free grid point on panel {panel.role} for component {target.uid}")
    target.position = tuple(float(c) for c in center)


def repair_positions(config: SpacecraftConfig,
                     grid_resolution: float = DEFAULT_RESOLUTION) -> SpacecraftConfig:
    """Move overlapping components to the nearest free grid points.

    Components not involved in any intersection stay where they are.  The
    lowest-id intersecting component moves first; the loop repeats until the
    configuration is overlap-free.  Raises :class:`RepairFailed` when no free
    placement exists, which callers translate into a death penalty.
    """
    repaired = config.clone()
    limit = 4 * len(repaired.placeable_components()) + 8
    for _ in range(limit):
        pairs = detect_overlaps(repaired)
        if not pairs:
            return repaired
        involved = {uid for pair in pairs for uid in pair}
        target = min((repaired.node_by_uid(uid) for uid in involved),
                     key=lambda n: (n.id, n.instance))
        if repaired.is_attached(target):
            _repair_attached(repaired, target, grid_resolution)
        else:
            _repair_free(repaired, target, grid_resolution)
    raise RepairFailed("position repair did not converge")


def ring_positions(center, count: int, ring_radius: float) -> list[tuple[float, float, float]]:
    """Positions for a multi-vessel assembly: one vessel sits at the assembly
    center, several sit equally spaced on a circle around it in the x-z plane."""
    cx, cy, cz = center
    if count == 1:
        return [(cx, cy, cz)]
    step = 2.0 * np.pi / count
    return [
        (cx + ring_radius * float(np.cos(k * step)), cy,
         cz + ring_radius * float(np.sin(k * step)))
        for k in range(count)
    ]


def tank_ring_radius(tank_radius: float) -> float:
    """Assembly ring radius used when several tanks replace a single one."""
    return 1.2 * tank_radius
