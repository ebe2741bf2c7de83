"""Differential entropies of quadrature marginals on uniform midpoint grids."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import MarginalNegativityError
from .polygauss import PolyGauss, evaluate_grid, marginalize, moment

__all__ = [
    "GridSpec",
    "DistributionGrid",
    "auto_grid",
    "sample_distribution",
    "differential_entropy",
    "conditional_entropy",
    "write_csv",
]

NEG_TOL = 1e-10
TINY = 1e-300
DEFAULT_NODES_1D = 8192
DEFAULT_NODES_2D = 1024
MIN_NODES = 16
RIDGE_CELLS = 24


@dataclass(frozen=True)
class GridSpec:
    """Uniform midpoint grid: one half-width and node count per axis."""

    half_widths: tuple
    nodes: tuple

    def __post_init__(self):
        hw = tuple(float(h) for h in self.half_widths)
        nodes = tuple(int(n) for n in self.nodes)
        if len(hw) != len(nodes) or len(hw) not in (1, 2):
            raise ValueError("grid must have one or two axes")
        if any(not h > 0 for h in hw):
            raise ValueError("half-widths must be positive")
        if any(n < MIN_NODES for n in nodes):
            raise ValueError(f"node counts must be at least {MIN_NODES}")
        object.__setattr__(self, "half_widths", hw)
        object.__setattr__(self, "nodes", nodes)

    @property
    def widths(self) -> tuple:
        return tuple(2.0 * h / n for h, n in zip(self.half_widths, self.nodes))

    @property
    def cell_area(self) -> float:
        return math.prod(self.widths)

    def midpoints(self) -> list:
        return [
            -h + w * (np.arange(n) + 0.5)
            for h, w, n in zip(self.half_widths, self.widths, self.nodes)
        ]

    def refined(self, factor: int = 2) -> "GridSpec":
        return replace(self, nodes=tuple(n * factor for n in self.nodes))


@dataclass(frozen=True)
class DistributionGrid:
    """Density sampled at the cell midpoints of ``spec``."""

    axes: tuple
    spec: GridSpec
    values: np.ndarray

    @property
    def mass(self) -> float:
        return float(np.sum(self.values) * self.spec.cell_area)


def auto_grid(
    pg: PolyGauss,
    axes: Sequence[str],
    width_mult: float = 6.0,
    nodes: int | None = None,
) -> GridSpec:
    """Grid covering ``width_mult`` standard deviations (+1) per axis.

    For 2D grids the node count is raised until at least ``RIDGE_CELLS``
    cells span the narrowest principal width of the joint distribution,
    which matters for strongly squeezed states.
    """
    axes = tuple(axes)
    var = [moment(pg, {a: 2}) for a in axes]
    half = tuple(width_mult * math.sqrt(v) + 1.0 for v in var)
    if len(axes) == 1:
        count = DEFAULT_NODES_1D if nodes is None else nodes
        return GridSpec(half, (count,))
    if nodes is None:
        cov_xy = moment(pg, {axes[0]: 1, axes[1]: 1})
        cov = np.array([[var[0], cov_xy], [cov_xy, var[1]]])
        sigma_min = math.sqrt(max(np.linalg.eigvalsh(cov)[0], 1e-300))
        count = max(DEFAULT_NODES_2D, math.ceil(RIDGE_CELLS * max(half) / sigma_min))
    else:
        count = nodes
    return GridSpec(half, (count, count))


def sample_distribution(
    pg: PolyGauss, axes: Sequence[str], spec: GridSpec
) -> DistributionGrid:
    """Exact marginal of ``pg`` on ``axes`` evaluated at grid midpoints."""
    axes = tuple(axes)
    if len(axes) not in (1, 2) or len(axes) != len(spec.nodes):
        raise ValueError("axes must match the grid dimension (1 or 2)")
    marginal = marginalize(pg, axes)
    coords = spec.midpoints()
    if len(axes) == 1:
        values = evaluate_grid(marginal, coords[0])
    else:
        values = np.empty(spec.nodes)
        rows = max(1, 4_000_000 // spec.nodes[1])
        for start in range(0, spec.nodes[0], rows):
            stop = start + rows
            values[start:stop] = evaluate_grid(marginal, coords[0][start:stop], coords[1])
    low = values.min()
    if low < -NEG_TOL:
        raise MarginalNegativityError(
            f"marginal over {axes} reaches {low:.3e}; quadrature marginals must be nonnegative"
        )
    np.maximum(values, 0.0, out=values)
    values.setflags(write=False)
    return DistributionGrid(axes, spec, values)


def differential_entropy(d: DistributionGrid) -> float:
    """``-sum p ln p * cell_area`` in nats, with ``0 ln 0 = 0``."""
    p = d.values.ravel()
    p = p[p > TINY]
    # numpy sums with pairwise summation, deterministic for a fixed grid
    return float(-np.sum(p * np.log(p)) * d.spec.cell_area)


def conditional_entropy(
    pg: PolyGauss,
    target: str,
    given: str,
    spec: GridSpec | None = None,
    given_spec: GridSpec | None = None,
) -> float:
    """``h(target | given) = h(target, given) - h(given)``.

    ``spec`` is the 2D grid over ``(target, given)``; the 1D grid for the
    conditioning marginal defaults to ``auto_grid``.
    """
    if target == given:
        raise ValueError("target and given must differ")
    if spec is None:
        spec = auto_grid(pg, (target, given))
    if given_spec is None:
        given_spec = auto_grid(pg, (given,))
    joint = differential_entropy(sample_distribution(pg, (target, given), spec))
    single = differential_entropy(sample_distribution(pg, (given,), given_spec))
    return joint - single


def write_csv(d: DistributionGrid, path) -> None:
    """Header ``axis,density`` (1D) or ``axis1,axis2,density`` (2D)."""
    coords = d.spec.midpoints()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if len(d.axes) == 1:
            writer.writerow(["axis", "density"])
            for x, p in zip(coords[0], d.values):
                writer.writerow([f"{x:.17g}", f"{p:.17g}"])
        else:
            writer.writerow(["axis1", "axis2", "density"])
            for i, x in enumerate(coords[0]):
                for j, y in enumerate(coords[1]):
                    writer.writerow([f"{x:.17g}", f"{y:.17g}", f"{d.values[i, j]:.17g}"])
