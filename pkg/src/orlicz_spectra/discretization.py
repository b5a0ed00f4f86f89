"""Structured box meshes, node/cell fields and bump constructions.

Quadrature convention used everywhere in the package: gradients live at cell
centres (forward differences, averaged over the two cell edges in 2D), node
fields are averaged to cell centres, and every integral is the midpoint rule
over cells. The discrete energy and its gradient are built on exactly these
operators, so the gradient is the true derivative of the discrete energy.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import CapacityError, DomainError, GeometryError, ShapeError


@dataclass(frozen=True)
class Grid:
    """Uniform box mesh on ``[0, L_1] x ... x [0, L_dim]`` with ``dim`` in {1, 2}."""

    extents: tuple[float, ...]
    cells: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "extents", tuple(float(e) for e in self.extents))
        object.__setattr__(self, "cells", tuple(int(c) for c in self.cells))
        if len(self.extents) not in (1, 2) or len(self.extents) != len(self.cells):
            raise ShapeError("grid must be 1D or 2D with one cell count per axis")
        if any(e <= 0 for e in self.extents):
            raise GeometryError("extents must be positive")
        if any(c < 2 for c in self.cells):
            raise GeometryError("need at least 2 cells per axis for a nonempty interior")

    @property
    def dim(self) -> int:
        return len(self.extents)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.extents, self.cells))

    @property
    def h(self) -> float:
        """Largest mesh spacing."""
        return max(self.spacing)

    @property
    def cell_volume(self) -> float:
        return math.prod(self.spacing)

    @property
    def measure(self) -> float:
        return math.prod(self.extents)

    @property
    def nodes_shape(self) -> tuple[int, ...]:
        return tuple(n + 1 for n in self.cells)

    @property
    def n_nodes(self) -> int:
        return math.prod(self.nodes_shape)

    @property
    def n_cells(self) -> int:
        return math.prod(self.cells)

    def axis_nodes(self, axis: int) -> np.ndarray:
        return np.linspace(0.0, self.extents[axis], self.cells[axis] + 1)

    def axis_centers(self, axis: int) -> np.ndarray:
        x = self.axis_nodes(axis)
        return 0.5 * (x[:-1] + x[1:])

    @cached_property
    def node_coords(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*[self.axis_nodes(a) for a in range(self.dim)], indexing="ij"))

    @cached_property
    def cell_centers(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*[self.axis_centers(a) for a in range(self.dim)], indexing="ij"))

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.nodes_shape, dtype=bool)
        for axis in range(self.dim):
            idx = [slice(None)] * self.dim
            idx[axis] = 0
            mask[tuple(idx)] = True
            idx[axis] = -1
            mask[tuple(idx)] = True
        mask.setflags(write=False)
        return mask

    @cached_property
    def interior_index(self) -> np.ndarray:
        """Flat (row-major) indices of the interior nodes."""
        return np.flatnonzero(~self.boundary_mask.ravel())

    @cached_property
    def operators(self) -> dict[str, sp.csr_matrix]:
        """Sparse cell-by-node matrices: gradient components and averaging."""
        if self.dim == 1:
            (n,), (hx,) = self.cells, self.spacing
            rows = np.repeat(np.arange(n), 2)
            cols = np.stack([np.arange(n), np.arange(1, n + 1)], axis=1).ravel()
            dx = sp.csr_matrix((np.tile([-1.0 / hx, 1.0 / hx], n), (rows, cols)), shape=(n, n + 1))
            avg = sp.csr_matrix((np.full(2 * n, 0.5), (rows, cols)), shape=(n, n + 1))
            return {"dx": dx, "avg": avg}
        (nx, ny), (hx, hy) = self.cells, self.spacing
        ci, cj = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
        ci, cj = ci.ravel(), cj.ravel()
        cell = ci * ny + cj
        stride = ny + 1
        n00 = ci * stride + cj
        n10 = (ci + 1) * stride + cj
        n01 = ci * stride + cj + 1
        n11 = (ci + 1) * stride + cj + 1
        corners = np.stack([n00, n10, n01, n11], axis=1).ravel()
        rows = np.repeat(cell, 4)
        shape = (nx * ny, (nx + 1) * (ny + 1))
        wx = np.tile([-1.0, 1.0, -1.0, 1.0], nx * ny) / (2 * hx)
        wy = np.tile([-1.0, -1.0, 1.0, 1.0], nx * ny) / (2 * hy)
        return {
            "dx": sp.csr_matrix((wx, (rows, corners)), shape=shape),
            "dy": sp.csr_matrix((wy, (rows, corners)), shape=shape),
            "avg": sp.csr_matrix((np.full(4 * nx * ny, 0.25), (rows, corners)), shape=shape),
        }


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Node values on a grid; vanishes on the boundary unless ``dirichlet=False``."""

    grid: Grid
    values: np.ndarray
    dirichlet: bool = True

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != self.grid.nodes_shape:
            if vals.size == self.grid.n_nodes:
                vals = vals.reshape(self.grid.nodes_shape)
            else:
                raise ShapeError(f"expected node array of shape {self.grid.nodes_shape}, got {vals.shape}")
        if self.dirichlet and np.any(vals[self.grid.boundary_mask] != 0.0):
            raise GeometryError("Dirichlet field must vanish on the boundary")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_interior(cls, grid: Grid, x: np.ndarray) -> "ScalarField":
        vals = np.zeros(grid.n_nodes)
        vals[grid.interior_index] = x
        return cls(grid, vals.reshape(grid.nodes_shape))

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, np.zeros(grid.nodes_shape))

    @property
    def interior(self) -> np.ndarray:
        return self.values.ravel()[self.grid.interior_index]

    def __mul__(self, c: float) -> "ScalarField":
        return ScalarField(self.grid, c * self.values, self.dirichlet)

    __rmul__ = __mul__

    def __neg__(self) -> "ScalarField":
        return ScalarField(self.grid, -self.values, self.dirichlet)

    def __add__(self, other: "ScalarField") -> "ScalarField":
        _check_same_grid(self.grid, other.grid)
        return ScalarField(self.grid, self.values + other.values, self.dirichlet and other.dirichlet)

    def __sub__(self, other: "ScalarField") -> "ScalarField":
        return self + (-other)


@dataclass(frozen=True, eq=False)
class CellField:
    """One value per mesh cell."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).reshape(-1)
        if vals.size != self.grid.n_cells:
            raise ShapeError(f"expected {self.grid.n_cells} cell values, got {vals.size}")
        object.__setattr__(self, "values", vals)


def _check_same_grid(a: Grid, b: Grid):
    if a != b:
        raise ShapeError("fields live on different grids")


def gradient_components(u: ScalarField) -> list[np.ndarray]:
    ops = u.grid.operators
    flat = u.values.ravel()
    return [ops[k] @ flat for k in ("dx", "dy")[: u.grid.dim]]


def gradient_magnitude(u: ScalarField) -> CellField:
    comps = gradient_components(u)
    if len(comps) == 1:
        return CellField(u.grid, np.abs(comps[0]))
    return CellField(u.grid, np.hypot(comps[0], comps[1]))


def cell_average(u: ScalarField) -> CellField:
    return CellField(u.grid, u.grid.operators["avg"] @ u.values.ravel())


def integrate(f: CellField) -> float:
    return float(np.sum(f.values) * f.grid.cell_volume)


def _bump_profile(dist: np.ndarray, inner: float, outer: float) -> np.ndarray:
    s = (dist - inner) / (outer - inner)
    out = np.zeros_like(dist)
    out[s <= 0] = 1.0
    ann = (s > 0) & (s < 1)
    out[ann] = np.exp(1.0 - 1.0 / (1.0 - s[ann] ** 2))
    return out


def build_bump(grid: Grid, center, inner_radius: float, outer_radius: float) -> ScalarField:
    """Radial mollifier bump: 1 on the inner ball, 0 outside the outer ball."""
    center = np.atleast_1d(np.asarray(center, dtype=float))
    if center.size != grid.dim:
        raise ShapeError("center dimension does not match grid")
    if not 0 <= inner_radius < outer_radius:
        raise GeometryError("need 0 <= inner_radius < outer_radius")
    slack = 1e-12 * max(grid.extents)
    for c, L in zip(center, grid.extents):
        if c - outer_radius < -slack or c + outer_radius > L + slack:
            raise GeometryError(f"ball of radius {outer_radius} at {center.tolist()} leaves the domain")
    dist = np.sqrt(sum((x - c) ** 2 for x, c in zip(grid.node_coords, center)))
    vals = _bump_profile(dist, inner_radius, outer_radius)
    vals[grid.boundary_mask] = 0.0
    return ScalarField(grid, vals)


@dataclass(frozen=True)
class BumpLayout:
    """Placement of k disjoint bumps in k equal slots along the first axis."""

    centers: list[tuple[float, ...]]
    inner_radius: float
    outer_radius: float
    interface_nodes: list[int]  # first-axis node indices separating the slots


def bump_layout(grid: Grid, k: int) -> BumpLayout:
    """Deterministic sub-lattice placement of ``k`` disjoint balls.

    Balls have equal measure below ``|Omega| / (k + 1)``, which is exactly the
    condition for every new ball to take less than half of what the previous
    ones left over. Raises :class:`CapacityError` when a ball would span fewer
    than 3 cells or would not clear the slot interfaces.
    """
    if k < 1:
        raise DomainError("k must be >= 1")
    max_k = _max_bumps(grid)
    if k > max_k:
        raise CapacityError(f"{k} bumps do not fit on this grid; max feasible k is {max_k}", max_k)
    return _layout(grid, k)


def _layout(grid: Grid, k: int) -> BumpLayout:
    L = grid.extents[0]
    width = L / k
    if grid.dim == 1:
        r_out = 0.9 * L / (2 * (k + 1))
    else:
        Ly = grid.extents[1]
        r_out = 0.9 * min(width / 2, Ly / 2, math.sqrt(grid.measure / (math.pi * (k + 1))))
    centers = []
    for i in range(k):
        c = [(i + 0.5) * width]
        if grid.dim == 2:
            c.append(grid.extents[1] / 2)
        centers.append(tuple(c))
    nx = grid.cells[0]
    interfaces = [int(round(i * nx / k)) for i in range(1, k)]
    return BumpLayout(centers, 0.5 * r_out, r_out, interfaces)


def _layout_ok(grid: Grid, lay: BumpLayout) -> bool:
    if 2 * lay.outer_radius < 3 * grid.h:
        return False
    hx = grid.spacing[0]
    for i, c in enumerate(lay.centers):
        # snapped slot edges must stay clear of the ball support
        lo = 0 if i == 0 else lay.interface_nodes[i - 1]
        hi = grid.cells[0] if i == len(lay.centers) - 1 else lay.interface_nodes[i]
        if c[0] - lay.outer_radius < lo * hx or c[0] + lay.outer_radius > hi * hx:
            return False
    return True


def _max_bumps(grid: Grid) -> int:
    k = 0
    while k < 10_000 and _layout_ok(grid, _layout(grid, k + 1)):
        k += 1
    return k


def build_disjoint_bumps(grid: Grid, k: int) -> list[ScalarField]:
    lay = bump_layout(grid, k)
    return [build_bump(grid, c, lay.inner_radius, lay.outer_radius) for c in lay.centers]


def support_measure(u: ScalarField) -> float:
    """Measure of the cells on which ``u`` is not identically zero."""
    touched = (u.grid.operators["avg"] @ (np.abs(u.values.ravel()) > 0).astype(float)) > 0
    return float(np.count_nonzero(touched) * u.grid.cell_volume)


def write_field_csv(u: ScalarField, path) -> None:
    """Write ``x[,y],value`` rows in row-major node order, 17 significant digits."""
    grid = u.grid
    header = ["x", "y"][: grid.dim] + ["value"]
    coords = [c.ravel() for c in grid.node_coords]
    vals = u.values.ravel()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(vals.size):
            w.writerow([f"{c[i]:.17g}" for c in coords] + [f"{vals[i]:.17g}"])


def read_field_csv(path, grid: Grid) -> ScalarField:
    with open(Path(path), newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if header[-1] != "value" or len(header) != grid.dim + 1:
        raise ShapeError(f"unexpected field header {header}")
    vals = np.array([float(r[-1]) for r in body])
    if vals.size != grid.n_nodes:
        raise ShapeError(f"field file has {vals.size} nodes, grid has {grid.n_nodes}")
    return ScalarField(grid, vals.reshape(grid.nodes_shape))
