"""Dense diagonalization of ``H = -Lap/2 + V`` on the torus and spectral traces.

Eigenvectors are stored orthonormal in the Euclidean sense; the grid
functions ``psi = u / sqrt(h^d)`` are then orthonormal for the discrete
L2 pairing with weight ``h^d``.  Kernels of operators such as Fermi
projectors are kept as Euclidean matrices, for which trace, trace norm
and operator norm agree with those of the discretized operator.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.polynomial import Polynomial

from .fields import GridMismatchError, ScalarField, TorusGrid

DEFAULT_MAX_DIM = 4096


class SpectralError(RuntimeError):
    pass


class BudgetExceededError(SpectralError):
    pass


class GapError(SpectralError):
    """Fermi level too close to the spectrum (metallic configuration)."""


class IllConditionedError(SpectralError):
    pass


def _kinetic_1d(n_axis: int, h: float) -> np.ndarray:
    k = 2.0 * np.pi * np.fft.fftfreq(n_axis, d=h)
    col = np.fft.ifft(0.5 * k**2).real
    idx = (np.arange(n_axis)[None, :] - np.arange(n_axis)[:, None]) % n_axis
    return col[idx]


def kinetic_matrix(grid: TorusGrid) -> np.ndarray:
    """Spectral ``-Lap/2`` as a dense real symmetric matrix (Kronecker sum)."""
    t1 = _kinetic_1d(grid.n_axis, grid.h)
    eye = np.eye(grid.n_axis)
    total = np.zeros((grid.size, grid.size))
    for axis in range(grid.d):
        factors = [t1 if a == axis else eye for a in range(grid.d)]
        term = factors[0]
        for f in factors[1:]:
            term = np.kron(term, f)
        total += term
    return total


@dataclass
class Hamiltonian:
    grid: TorusGrid
    potential: ScalarField

    def __post_init__(self):
        if self.potential.grid != self.grid:
            raise GridMismatchError("potential lives on a different grid")

    @property
    def kinetic_multiplier(self) -> np.ndarray:
        return 0.5 * self.grid.k_squared

    def matrix(self) -> np.ndarray:
        mat = kinetic_matrix(self.grid)
        mat[np.diag_indices_from(mat)] += self.potential.flat
        return mat

    def apply(self, f: ScalarField) -> ScalarField:
        axes = tuple(range(self.grid.d))
        kin = np.fft.ifftn(np.fft.fftn(f.values, axes=axes) * self.kinetic_multiplier,
                           axes=axes).real
        return ScalarField(self.grid, kin + self.potential.values * f.values)


@dataclass(frozen=True)
class Spectrum:
    grid: TorusGrid
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)
    fermi_level: float | None = None

    def with_fermi_level(self, fermi_level: float) -> "Spectrum":
        return Spectrum(self.grid, self.eigenvalues, self.eigenvectors, fermi_level)

    @property
    def gap(self) -> float:
        """Distance from the Fermi level to the spectrum."""
        if self.fermi_level is None:
            raise SpectralError("no Fermi level attached to this spectrum")
        return float(np.min(np.abs(self.eigenvalues - self.fermi_level)))

    @property
    def n_occupied(self) -> int:
        if self.fermi_level is None:
            raise SpectralError("no Fermi level attached to this spectrum")
        return int(np.count_nonzero(self.eigenvalues <= self.fermi_level))

    def occupied(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.n_occupied
        return self.eigenvalues[:n], self.eigenvectors[:, :n]

    def unoccupied(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.n_occupied
        return self.eigenvalues[n:], self.eigenvectors[:, n:]

    def check_gap(self, g_min: float) -> None:
        if self.gap <= g_min:
            raise GapError(
                f"metallic configuration: distance {self.gap:.3e} from the Fermi "
                f"level to the spectrum is below {g_min:.3e}")

    def projector(self) -> np.ndarray:
        _, u = self.occupied()
        return u @ u.T

    @cached_property
    def cell_weights(self) -> np.ndarray:
        """``W[c, i] = int_{cell c} |psi_i|^2``; columns sum to one."""
        cells = self.grid.cell_of_point.ravel()
        w = np.zeros((self.grid.n_cells, self.eigenvalues.size))
        np.add.at(w, cells, self.eigenvectors**2)
        return w

    def residuals(self, hamiltonian: Hamiltonian) -> np.ndarray:
        mat = hamiltonian.matrix()
        r = mat @ self.eigenvectors - self.eigenvectors * self.eigenvalues
        return np.linalg.norm(r, axis=0)


def midgap_fermi_level(eigenvalues: np.ndarray, n_occupied: int) -> tuple[float, float]:
    """Fermi level halfway between states ``n_occupied`` and ``n_occupied + 1``.

    Returns ``(fermi_level, band_gap)``.
    """
    if not 0 < n_occupied < eigenvalues.size:
        raise SpectralError(f"cannot occupy {n_occupied} of {eigenvalues.size} states")
    lo, hi = eigenvalues[n_occupied - 1], eigenvalues[n_occupied]
    return 0.5 * (lo + hi), float(hi - lo)


def diagonalize(h: Hamiltonian, fermi_level: float | None = None,
                max_dim: int = DEFAULT_MAX_DIM) -> Spectrum:
    """Full spectrum of the dense Hamiltonian.

    Each eigenvector is signed so that its largest-magnitude component is
    positive.
    """
    if h.grid.size > max_dim:
        raise BudgetExceededError(
            f"matrix dimension {h.grid.size} exceeds the dense budget {max_dim}")
    try:
        w, u = np.linalg.eigh(h.matrix())
    except np.linalg.LinAlgError as exc:
        raise SpectralError(f"eigensolver failed: {exc}") from exc
    pivot = u[np.argmax(np.abs(u), axis=0), np.arange(u.shape[1])]
    u *= np.where(pivot < 0, -1.0, 1.0)
    return Spectrum(h.grid, w, u, fermi_level)


def density_from_fermi(s: Spectrum, g_min: float = 0.0) -> ScalarField:
    """Electronic density of the Fermi projector ``1(H <= eF)``."""
    if s.n_occupied and g_min > 0:
        s.check_gap(g_min)
    _, u = s.occupied()
    rho = (u**2).sum(axis=1) / s.grid.weight
    return ScalarField(s.grid, rho)


def projector_density(p: np.ndarray, grid: TorusGrid) -> ScalarField:
    """Diagonal density of an operator given by its Euclidean matrix."""
    return ScalarField(grid, np.diag(p) / grid.weight)


# -- test functions --------------------------------------------------------

@dataclass(frozen=True)
class TestFunction:
    """Schwartz test function ``q((x - c)/w) * exp(-((x - c)/w)^2 / 2)``.

    ``gaussian`` has ``q = amplitude``, ``gaussian_derivative`` is the
    x-derivative of the gaussian, and ``polynomial_damped`` uses
    ``q = amplitude * u**degree``.
    """

    __test__ = False  # not a pytest class

    family: str = "gaussian"
    center: float = 0.0
    width: float = 1.0
    degree: int = 0
    amplitude: float = 1.0

    def __post_init__(self):
        if self.family not in ("gaussian", "gaussian_derivative", "polynomial_damped"):
            raise ValueError(f"unknown test function family {self.family!r}")
        if not self.width > 0:
            raise ValueError("width must be positive")

    def _prefactor(self) -> Polynomial:
        if self.family == "gaussian":
            return Polynomial([self.amplitude])
        if self.family == "gaussian_derivative":
            return Polynomial([0.0, -self.amplitude / self.width])
        return Polynomial([0.0] * self.degree + [self.amplitude])

    def _derivative_prefactor(self, beta: int) -> Polynomial:
        q = self._prefactor()
        u = Polynomial([0.0, 1.0])
        for _ in range(beta):
            q = (q.deriv() - u * q) / self.width
        return q

    def derivative(self, x, beta: int = 0):
        u = (np.asarray(x, dtype=float) - self.center) / self.width
        return self._derivative_prefactor(beta)(u) * np.exp(-0.5 * u * u)

    def __call__(self, x):
        return self.derivative(x, 0)

    def seminorm(self, alpha: int, beta: int, n_samples: int = 20001) -> float:
        """Estimate ``sup_x |x^alpha d^beta phi(x)|`` on a wide sampling grid."""
        span = self.width * (12.0 + 2.0 * np.sqrt(alpha + beta + self.degree))
        x = np.linspace(self.center - span, self.center + span, n_samples)
        return float(np.max(np.abs(x**alpha * self.derivative(x, beta))))

    def seminorm_report(self, alpha_max: int, beta_max: int) -> dict[tuple[int, int], float]:
        return {(a, b): self.seminorm(a, b)
                for a in range(alpha_max + 1) for b in range(beta_max + 1)}


def trace_of_function(s: Spectrum, phi) -> float:
    return float(np.sum(phi(s.eigenvalues)))


def local_trace_of_function(s: Spectrum, phi, cell) -> float:
    """``Tr(1_cell phi(H) 1_cell)``."""
    c = s.grid.cell_index(cell)
    return float(np.dot(s.cell_weights[c], phi(s.eigenvalues)))


def region_mask(grid: TorusGrid, region) -> np.ndarray:
    """Flat boolean mask of grid points lying in any of the cells of ``region``."""
    idx = [grid.cell_index(c) for c in region]
    return np.isin(grid.cell_of_point.ravel(), idx)


def local_projector_distance(s1: Spectrum, s2: Spectrum, region) -> float:
    """Trace norm of ``1_B (P1 - P2) 1_B`` for the Fermi projectors of two spectra."""
    if s1.grid != s2.grid:
        raise GridMismatchError("spectra live on different grids")
    mask = region_mask(s1.grid, region)
    blocks = []
    for s in (s1, s2):
        _, u = s.occupied()
        ub = u[mask]
        blocks.append(ub @ ub.T)
    diff = blocks[0] - blocks[1]
    return float(np.sum(np.linalg.svd(diff, compute_uv=False)))


# -- resolvent decay probe -------------------------------------------------

@dataclass
class ResolventDecay:
    radii: np.ndarray
    shell_norms: np.ndarray
    distance_to_spectrum: float
    c1: float
    c2: float
    rate: float
    intercept: float
    r_squared: float


def exponential_fit(x, y) -> tuple[float, float, float]:
    """Fit ``log y = a - b x``; returns ``(b, a, R^2)``."""
    x = np.asarray(x, dtype=float)
    ly = np.log(np.asarray(y, dtype=float))
    slope, a = np.polyfit(x, ly, 1)
    pred = a + slope * x
    ss_res = np.sum((ly - pred) ** 2)
    ss_tot = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(-slope), float(a), float(r2)


def resolvent_kernel_decay(h: Hamiltonian, z: complex, source_cell, radii,
                           eigenvalues: np.ndarray | None = None) -> ResolventDecay:
    """Hilbert-Schmidt norms of ``1_shell (z - H)^{-1} 1_source`` versus distance.

    The shell at radius ``R`` is the set of cells whose periodic center
    distance to ``source_cell`` equals ``R``.
    """
    mat = h.matrix()
    if eigenvalues is None:
        eigenvalues = np.linalg.eigvalsh(mat)
    dist = float(np.min(np.abs(eigenvalues - z)))
    if dist < 1e-8:
        raise IllConditionedError(f"z={z} is within {dist:.1e} of the spectrum")
    grid = h.grid
    src = grid.cell_of_point.ravel() == grid.cell_index(source_cell)
    rhs = np.eye(grid.size)[:, src]
    sol = np.linalg.solve(z * np.eye(grid.size) - mat, rhs.astype(complex))
    cell_dist = grid.cell_distances(source_cell)
    cells = grid.cell_of_point.ravel()
    row_sq = np.sum(np.abs(sol) ** 2, axis=1)
    per_cell = np.bincount(cells, weights=row_sq, minlength=grid.n_cells)
    radii = np.asarray(radii, dtype=float)
    norms = np.array([np.sqrt(per_cell[np.isclose(cell_dist, r)].sum()) for r in radii])
    rate, a, r2 = exponential_fit(radii, norms)
    return ResolventDecay(radii, norms, dist, 1.0 / dist, dist / (1.0 + abs(z)),
                          rate, a, r2)


def write_spectrum_csv(path, s: Spectrum, cell_weights: bool = False) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        header = ["index", "eigenvalue"]
        if cell_weights:
            header += [f"cell{c}" for c in range(s.grid.n_cells)]
        w.writerow(header)
        for i, lam in enumerate(s.eigenvalues):
            row = [i, repr(float(lam))]
            if cell_weights:
                row += [repr(float(v)) for v in s.cell_weights[:, i]]
            w.writerow(row)
