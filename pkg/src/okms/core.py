"""Grids, scalar fields, quadrature, and run-record bookkeeping.

Two grid kinds are supported: rectangular boxes with uniform cells (the
diffuse solver lives on cell midpoints, which is the natural node layout
for the cosine spectral basis) and the radial mesh on the unit ball.
Resolution rule of thumb for all phase-field work: keep at least 8 nodes
across the interface width, i.e. h <= eps/8; under-resolved runs emit a
warning and their diagnostics are not trustworthy.
"""

from __future__ import annotations

import json
import math
import time
import uuid
from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatchError


def unit_sphere_area(space_dim: int) -> float:
    """Surface area of the unit (N-1)-sphere in R^N (2*pi for N=2, 4*pi for N=3)."""
    return 2.0 * math.pi ** (space_dim / 2.0) / math.gamma(space_dim / 2.0)


@dataclass(frozen=True)
class BoxGrid:
    """Uniform box (0,L1)x...x(0,Ld), d in {1,2}, nodes at cell midpoints."""

    lengths: tuple
    cells: tuple

    def __post_init__(self):
        lengths = tuple(float(l) for l in np.atleast_1d(self.lengths))
        cells = tuple(int(c) for c in np.atleast_1d(self.cells))
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "cells", cells)
        if len(lengths) != len(cells):
            raise GridMismatchError("lengths and cells must have equal length")
        if len(lengths) not in (1, 2):
            raise GridMismatchError("box grids support dim 1 or 2")
        if any(l <= 0 for l in lengths):
            raise GridMismatchError("box lengths must be positive")
        if any(c < 8 for c in cells):
            raise GridMismatchError("need at least 8 cells per axis")

    @property
    def dim(self) -> int:
        return len(self.cells)

    @property
    def spacing(self) -> tuple:
        return tuple(l / c for l, c in zip(self.lengths, self.cells))

    @property
    def shape(self) -> tuple:
        return self.cells

    @property
    def node_count(self) -> int:
        return int(np.prod(self.cells))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axis_nodes(self, axis: int) -> np.ndarray:
        h = self.spacing[axis]
        return (np.arange(self.cells[axis]) + 0.5) * h

    def meshgrid(self):
        axes = [self.axis_nodes(i) for i in range(self.dim)]
        return np.meshgrid(*axes, indexing="ij")


@dataclass(frozen=True)
class RadialGrid:
    """Uniform radial mesh of the unit ball B_1 in R^N, nodes from r=0 to r=1.

    space_dim=1 is permitted as a flat-slab degenerate case; it is used only
    to cross-validate the radial stepper against the 1D box solver.
    """

    space_dim: int
    nodes: int

    radius: float = 1.0

    def __post_init__(self):
        if self.space_dim < 1:
            raise GridMismatchError("space_dim must be >= 1")
        if self.nodes < 64:
            raise GridMismatchError("need at least 64 radial nodes")
        if self.radius != 1.0:
            raise GridMismatchError("only the unit ball is supported")

    @property
    def h(self) -> float:
        return 1.0 / (self.nodes - 1)

    @property
    def r(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.nodes)

    @property
    def node_count(self) -> int:
        return self.nodes

    @property
    def shape(self) -> tuple:
        return (self.nodes,)

    def cell_weights(self) -> np.ndarray:
        """Quadrature weights: exact integrals of omega_N r^(N-1) over each
        node's cell [r-h/2, r+h/2] clipped to [0,1].  Summing the weights
        gives the ball volume exactly, and the divergence-form Laplacian
        built on the same cells telescopes, which makes discrete mass
        conservation an identity rather than an accuracy statement."""
        n, h = self.space_dim, self.h
        lo = np.clip(self.r - 0.5 * h, 0.0, 1.0)
        hi = np.clip(self.r + 0.5 * h, 0.0, 1.0)
        return unit_sphere_area(n) * (hi**n - lo**n) / n

    @property
    def volume(self) -> float:
        n = self.space_dim
        return unit_sphere_area(n) / n


@dataclass
class ScalarField:
    """Grid-sampled real field; the order parameter and everything derived."""

    grid: object
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise GridMismatchError(
                f"values shape {self.values.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise GridMismatchError("field contains non-finite values")

    @classmethod
    def from_function(cls, grid, fn) -> "ScalarField":
        if isinstance(grid, RadialGrid):
            return cls(grid, fn(grid.r))
        return cls(grid, fn(*grid.meshgrid()))

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())


def quadrature_integral(f: ScalarField) -> float:
    """Integral of f over its domain.

    Boxes use the uniform midpoint-node rule (exact for the cosine basis);
    radial grids use the finite-volume weights of :meth:`RadialGrid.cell_weights`.
    Both are second order.
    """
    g = f.grid
    if isinstance(g, RadialGrid):
        return float(np.dot(g.cell_weights(), f.values))
    return g.cell_volume * float(f.values.sum())


def field_mean(f: ScalarField) -> float:
    """Average of f over the domain, using the same quadrature as the integral."""
    g = f.grid
    if isinstance(g, RadialGrid):
        return quadrature_integral(f) / g.volume
    return quadrature_integral(f) / float(np.prod(g.lengths))


@dataclass
class SimParams:
    """Run parameters for the diffuse dynamics.

    stabilization defaults to 13.3/eps (twice the sup of |f'| over the
    invariant range [-1.2, 1.2], scaled by 1/eps); dt defaults to eps^3
    clamped to [1e-8, 1e-3].
    """

    eps: float
    lam: float = 0.0
    dt: float | None = None
    t_end: float = 1.0e-3
    stabilization: float | None = None
    target_mass: float | None = None

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if self.dt is None:
            self.dt = min(max(self.eps**3, 1.0e-8), 1.0e-3)
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")
        if self.stabilization is None:
            self.stabilization = 13.3 / self.eps
        if self.stabilization < 0:
            raise ValueError("stabilization must be nonnegative")
        if self.target_mass is not None and not (-1.0 < self.target_mass < 1.0):
            raise ValueError("target_mass must lie in (-1, 1)")


_FMT = "%.17g"


@dataclass
class RunRecord:
    """Time series of diagnostics for one run; the persistence unit."""

    times: list = field(default_factory=list)
    series: dict = field(default_factory=dict)
    interface_radii: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def append(self, t, radii=None, **values):
        if self.times and t <= self.times[-1]:
            raise ValueError("record times must be strictly increasing")
        self.times.append(float(t))
        for k, v in values.items():
            self.series.setdefault(k, []).append(float(v))
        for k, col in self.series.items():
            if len(col) != len(self.times):
                raise ValueError(f"series {k!r} out of step with times")
        self.interface_radii.append(
            None if radii is None else np.asarray(radii, dtype=float)
        )

    def column(self, name) -> np.ndarray:
        return np.asarray(self.series[name])

    @property
    def t(self) -> np.ndarray:
        return np.asarray(self.times)

    def radii_matrix(self) -> np.ndarray:
        """Interface radii as a (n_times, max_count) array padded with NaN."""
        width = max((0 if r is None else len(r)) for r in self.interface_radii)
        out = np.full((len(self.times), width), np.nan)
        for i, r in enumerate(self.interface_radii):
            if r is not None:
                out[i, : len(r)] = r
        return out

    def write_csv(self, path):
        """One row per time; radii columns r_1..r_k after the named series."""
        names = list(self.series)
        radii = self.radii_matrix()
        with open(path, "w") as fh:
            header = ["time"] + names + [f"r_{i + 1}" for i in range(radii.shape[1])]
            fh.write(",".join(header) + "\n")
            for i, t in enumerate(self.times):
                row = [_FMT % t]
                row += [_FMT % self.series[k][i] for k in names]
                row += ["" if np.isnan(v) else _FMT % v for v in radii[i]]
                fh.write(",".join(row) + "\n")

    def write_meta(self, path, **extra):
        payload = dict(self.meta)
        payload.update(extra)
        payload.setdefault("run_id", uuid.uuid4().hex)
        payload.setdefault("wall_time", time.time())
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, default=_jsonable)
            fh.write("\n")


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (BoxGrid, RadialGrid, SimParams)):
        return {k: _jsonable_v(v) for k, v in vars(obj).items()}
    return str(obj)


def _jsonable_v(v):
    return v.tolist() if isinstance(v, np.ndarray) else v
