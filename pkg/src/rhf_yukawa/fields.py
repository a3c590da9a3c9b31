"""Periodic grids, grid functions, norms and the Yukawa interaction.

The computational domain is the torus of ``cells`` unit cells per axis,
each sampled by ``points_per_cell`` points per axis.  Cell ``k`` is the
cube ``[k - 1/2, k + 1/2)``; grid point ``j`` sits at ``-1/2 + j*h`` so a
grid point falls on every lattice site when ``points_per_cell`` is even.

All operators are Fourier multipliers, so the Laplacian and the screened
Poisson solve are exact on the band-limited grid functions.
"""
from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

EULER_GAMMA = 0.57721566490153286061

_SPHERE_MEASURE = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}

NORM_KINDS = ("L2", "L2_unif", "Hminus1", "H2_unif")


class GridMismatchError(ValueError):
    pass


class KernelSingularityError(ValueError):
    pass


@dataclass(frozen=True)
class TorusGrid:
    d: int
    cells: int
    points_per_cell: int

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.d}")
        if self.cells < 1 or self.points_per_cell < 1:
            raise ValueError("cells and points_per_cell must be positive")

    @property
    def h(self) -> float:
        return 1.0 / self.points_per_cell

    @property
    def n_axis(self) -> int:
        return self.cells * self.points_per_cell

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_axis,) * self.d

    @property
    def size(self) -> int:
        return self.n_axis**self.d

    @property
    def n_cells(self) -> int:
        return self.cells**self.d

    @property
    def weight(self) -> float:
        """Quadrature weight ``h**d`` of one grid point."""
        return self.h**self.d

    def coordinates(self) -> np.ndarray:
        """1D coordinates, wrapped into ``[-L/2, L/2)``."""
        x = -0.5 + self.h * np.arange(self.n_axis)
        return (x + self.cells / 2) % self.cells - self.cells / 2

    def mesh(self) -> list[np.ndarray]:
        x = self.coordinates()
        return np.meshgrid(*([x] * self.d), indexing="ij")

    @cached_property
    def frequencies(self) -> np.ndarray:
        """Angular frequencies ``2*pi*j/L`` along one axis (FFT order)."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n_axis, d=self.h)

    @cached_property
    def k_squared(self) -> np.ndarray:
        k = self.frequencies
        grids = np.meshgrid(*([k] * self.d), indexing="ij")
        return sum(g**2 for g in grids)

    @cached_property
    def cell_of_point(self) -> np.ndarray:
        """Flat cell index of each grid point, shape ``self.shape``."""
        per_axis = np.arange(self.n_axis) // self.points_per_cell
        grids = np.meshgrid(*([per_axis] * self.d), indexing="ij")
        flat = np.zeros(self.shape, dtype=np.int64)
        for g in grids:
            flat = flat * self.cells + g
        return flat

    def cell_sites(self) -> np.ndarray:
        """Integer lattice coordinates of every cell, shape ``(n_cells, d)``."""
        idx = np.arange(self.n_cells)
        return np.array(np.unravel_index(idx, (self.cells,) * self.d)).T

    def cell_index(self, site) -> int:
        site = np.atleast_1d(np.asarray(site, dtype=np.int64)) % self.cells
        if site.shape != (self.d,):
            raise ValueError(f"site must have {self.d} coordinates")
        return int(np.ravel_multi_index(tuple(site), (self.cells,) * self.d))

    def cell_mask(self, site) -> np.ndarray:
        return self.cell_of_point == self.cell_index(site)

    def cell_distances(self, site) -> np.ndarray:
        """Periodic Euclidean distance from ``site`` to every cell center."""
        delta = np.abs(self.cell_sites() - np.asarray(site) % self.cells)
        delta = np.minimum(delta, self.cells - delta)
        return np.sqrt((delta**2).sum(axis=1))

    def distances_to_cells(self, sites) -> np.ndarray:
        """Distance of every cell center to the nearest of ``sites``."""
        sites = list(sites)
        if not sites:
            return np.full(self.n_cells, np.inf)
        return np.min([self.cell_distances(s) for s in sites], axis=0)

    def shift(self, values: np.ndarray, site) -> np.ndarray:
        """Translate a grid function by a whole lattice vector (exact)."""
        site = np.atleast_1d(site)
        shifts = tuple(int(s) * self.points_per_cell for s in site)
        return np.roll(values, shifts, axis=tuple(range(self.d)))


@dataclass(frozen=True)
class YukawaParams:
    m: float
    d: int

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError("screening mass m must be positive")
        if self.d not in _SPHERE_MEASURE:
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.d}")

    @property
    def sphere_measure(self) -> float:
        return _SPHERE_MEASURE[self.d]


@dataclass
class ScalarField:
    grid: TorusGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            self.values = self.values.reshape(self.grid.shape)

    @classmethod
    def zeros(cls, grid: TorusGrid) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def constant(cls, grid: TorusGrid, c: float) -> "ScalarField":
        return cls(grid, np.full(grid.shape, float(c)))

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def integral(self) -> float:
        return float(self.values.sum() * self.grid.weight)

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())

    def shifted(self, site) -> "ScalarField":
        return ScalarField(self.grid, self.grid.shift(self.values, site))

    def _check(self, other: "ScalarField"):
        if other.grid != self.grid:
            raise GridMismatchError(f"{self.grid} != {other.grid}")

    def __add__(self, other):
        if isinstance(other, ScalarField):
            self._check(other)
            return ScalarField(self.grid, self.values + other.values)
        return ScalarField(self.grid, self.values + other)

    def __sub__(self, other):
        if isinstance(other, ScalarField):
            self._check(other)
            return ScalarField(self.grid, self.values - other.values)
        return ScalarField(self.grid, self.values - other)

    def __mul__(self, c):
        if isinstance(c, ScalarField):
            self._check(c)
            return ScalarField(self.grid, self.values * c.values)
        return ScalarField(self.grid, self.values * c)

    __rmul__ = __mul__
    __radd__ = __add__

    def __neg__(self):
        return ScalarField(self.grid, -self.values)


def _k0_series(x: float) -> float:
    # K0(x) = -(log(x/2) + gamma) I0(x) + sum_k (x^2/4)^k / (k!)^2 H_k
    q = 0.25 * x * x
    term = 1.0
    i0 = 1.0
    tail = 0.0
    harmonic = 0.0
    for k in range(1, 60):
        term *= q / (k * k)
        harmonic += 1.0 / k
        i0 += term
        tail += term * harmonic
        if term * max(harmonic, 1.0) < 1e-18 * abs(i0):
            break
    return -(math.log(0.5 * x) + EULER_GAMMA) * i0 + tail


def _k0_continued_fraction(x: float) -> float:
    # Steed's method on Temme's CF2 for K_0; converges fast for x >= 2.
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    a1 = 0.25
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, 10000):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < 1e-17:
            break
    return math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) / s


def bessel_k0(x: float) -> float:
    """Modified Bessel function of the second kind, order zero."""
    if x <= 0:
        raise KernelSingularityError("K0 is singular at 0")
    if x <= 2.0:
        return _k0_series(x)
    return _k0_continued_fraction(x)


def yukawa_kernel_closed_form(d: int, m: float, r: float) -> float:
    """Free-space Yukawa kernel ``Y_m(r)`` (Fourier symbol ``|S^{d-1}|/(k^2+m^2)``)."""
    if m <= 0:
        raise ValueError("m must be positive")
    if r < 0:
        raise ValueError("r must be non-negative")
    if d == 1:
        return math.exp(-m * r) / m
    if r == 0:
        raise KernelSingularityError(f"Y_m is singular at r=0 in dimension {d}")
    if d == 2:
        return bessel_k0(m * r)
    if d == 3:
        return math.exp(-m * r) / r
    raise ValueError(f"dimension must be 1, 2 or 3, got {d}")


def _multiplier(f: ScalarField, symbol: np.ndarray) -> ScalarField:
    axes = tuple(range(f.grid.d))
    out = np.fft.ifftn(np.fft.fftn(f.values, axes=axes) * symbol, axes=axes)
    return ScalarField(f.grid, out.real)


def yukawa_convolve(f: ScalarField, params: YukawaParams) -> ScalarField:
    """Solve ``-Lap V + m^2 V = |S^{d-1}| f`` on the torus."""
    if params.d != f.grid.d:
        raise GridMismatchError("Yukawa dimension does not match the grid")
    return _multiplier(f, params.sphere_measure / (f.grid.k_squared + params.m**2))


def laplacian(f: ScalarField) -> ScalarField:
    return _multiplier(f, -f.grid.k_squared)


def one_minus_laplacian(f: ScalarField) -> ScalarField:
    return _multiplier(f, 1.0 + f.grid.k_squared)


def cell_l2_norms(f: ScalarField) -> np.ndarray:
    """Local L2 norm of ``f`` on every unit cell (flat cell order)."""
    sq = np.bincount(f.grid.cell_of_point.ravel(), weights=f.flat**2,
                     minlength=f.grid.n_cells)
    return np.sqrt(sq * f.grid.weight)


def cell_norms(f: ScalarField, kind: str = "L2") -> np.ndarray:
    """Per-cell local norms; ``kind`` is ``"L2"`` or ``"H2"``.

    The H2 variant applies ``1 - Lap`` on the whole torus first and then
    restricts to each cell.
    """
    if kind == "L2":
        return cell_l2_norms(f)
    if kind == "H2":
        return cell_l2_norms(one_minus_laplacian(f))
    raise ValueError(f"unknown local norm {kind!r}")


def hminus1_inner(f: ScalarField, g: ScalarField, m: float = 1.0) -> float:
    """``<f, (-Lap + m^2)^{-1} g>`` with the discrete L2 pairing."""
    if f.grid != g.grid:
        raise GridMismatchError("fields live on different grids")
    inv = _multiplier(g, 1.0 / (g.grid.k_squared + m**2))
    return float(np.dot(f.flat, inv.flat) * f.grid.weight)


def field_norm(f: ScalarField, kind: str = "L2", m: float = 1.0) -> float:
    if kind == "L2":
        return float(math.sqrt(np.dot(f.flat, f.flat) * f.grid.weight))
    if kind == "L2_unif":
        return float(cell_l2_norms(f).max())
    if kind == "Hminus1":
        return math.sqrt(max(hminus1_inner(f, f, m), 0.0))
    if kind == "H2_unif":
        return float(cell_norms(f, "H2").max())
    raise ValueError(f"unknown norm kind {kind!r}; expected one of {NORM_KINDS}")


def interaction_energy(f: ScalarField, g: ScalarField, params: YukawaParams) -> float:
    """Yukawa interaction ``D_m(f, g)``; symmetric and positive definite."""
    if f.grid != g.grid:
        raise GridMismatchError("fields live on different grids")
    return float(np.dot(f.flat, yukawa_convolve(g, params).flat) * f.grid.weight)


def yukawa_matrix(grid: TorusGrid, params: YukawaParams) -> np.ndarray:
    """Dense matrix of ``f -> Y_m * f`` acting on flattened grid values."""
    eye = np.eye(grid.size).reshape((grid.size,) + grid.shape)
    axes = tuple(range(1, grid.d + 1))
    symbol = params.sphere_measure / (grid.k_squared + params.m**2)
    cols = np.fft.ifftn(np.fft.fftn(eye, axes=axes) * symbol, axes=axes).real
    return cols.reshape(grid.size, grid.size).T


# -- serialization ---------------------------------------------------------

_HEADER = struct.Struct("<iiid")


def write_field_binary(path, f: ScalarField, m: float = 0.0) -> None:
    """Header (d, L, n as int32; m as float64) then row-major little-endian float64."""
    g = f.grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(g.d, g.cells, g.points_per_cell, float(m)))
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def read_field_binary(path) -> tuple[ScalarField, float]:
    raw = Path(path).read_bytes()
    d, cells, n, m = _HEADER.unpack_from(raw)
    grid = TorusGrid(d, cells, n)
    values = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if values.size != grid.size:
        raise ValueError(f"{path}: expected {grid.size} values, found {values.size}")
    return ScalarField(grid, values.reshape(grid.shape).copy()), m


def write_field_csv(path, f: ScalarField) -> None:
    d = f.grid.d
    idx = np.indices(f.grid.shape).reshape(d, -1).T
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"i{a}" for a in range(d)] + ["value"])
        for row, v in zip(idx, f.flat):
            w.writerow([*row.tolist(), repr(float(v))])
