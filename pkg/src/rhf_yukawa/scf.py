"""Periodic ground state, dielectric response and the defect fixed-point solver.

The defect problem is written for the response density ``rho`` alone::

    rho = L (1+L)^{-1} nu + (1+L)^{-1} rho_Q2(rho - nu)

where ``L f = -(first-order density response to the potential Y_m * f)``
and ``rho_Q2`` is the full nonlinear response minus its linear part.  The
map is iterated from its linear-response term.  A plain damped projector
iteration (:func:`solve_defect_direct`) is kept as an independent check.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import expm
from scipy.sparse.linalg import LinearOperator, cg

from .fields import (
    ScalarField,
    TorusGrid,
    YukawaParams,
    field_norm,
    interaction_energy,
    yukawa_convolve,
    yukawa_matrix,
)
from .spectral import (
    DEFAULT_MAX_DIM,
    GapError,
    Hamiltonian,
    Spectrum,
    density_from_fermi,
    diagonalize,
    kinetic_matrix,
    midgap_fermi_level,
)

log = logging.getLogger(__name__)


class SCFError(RuntimeError):
    pass


class NotInsulatorError(GapError):
    pass


class ConvergenceError(SCFError):
    pass


class NuTooLargeError(SCFError):
    """The defect lies outside the empirical contraction region."""


class PotentialTooLargeError(NuTooLargeError):
    pass


class KrylovError(SCFError):
    pass


@dataclass(frozen=True)
class SolverOptions:
    tol_scf: float = 1e-9
    mixing: float = 0.5
    g_min: float = 0.1
    max_iter: int = 500
    krylov_tol: float = 1e-10
    krylov_maxiter: int = 500
    max_dim: int = DEFAULT_MAX_DIM
    divergence_window: int = 5
    potential_safety: float = 0.5
    defect_g_min: float = 1e-3


@dataclass(frozen=True)
class CrystalSpec:
    """Periodic crystal: nuclear gaussians of charge ``nuclear_charge`` per cell.

    ``electrons_per_cell`` fixes how many bands are filled; the Yukawa
    interaction does not require the two to balance.
    """

    grid: TorusGrid
    yukawa: YukawaParams
    nuclear_charge: float
    nuclear_width: float
    electrons_per_cell: int

    def __post_init__(self):
        if self.yukawa.d != self.grid.d:
            raise ValueError("Yukawa dimension does not match the grid")
        if self.nuclear_charge < 0 or not self.nuclear_width > 0:
            raise ValueError("nuclear charge must be >= 0 and width > 0")
        if self.electrons_per_cell < 1:
            raise ValueError("at least one electron per cell is required")

    @property
    def n_occupied(self) -> int:
        return self.electrons_per_cell * self.grid.n_cells

    def nu_per(self) -> ScalarField:
        """Periodized gaussian of charge ``Z`` per cell; uniform when the width is infinite."""
        g = self.grid
        if math.isinf(self.nuclear_width):
            return ScalarField.constant(g, self.nuclear_charge)
        x = g.coordinates()
        offset = (x + 0.5) % 1.0 - 0.5
        profile = sum(np.exp(-((offset - j) ** 2) / (2 * self.nuclear_width**2))
                      for j in range(-2, 3))
        values = np.ones(g.shape)
        for axis in range(g.d):
            shape = [1] * g.d
            shape[axis] = g.n_axis
            values = values * profile.reshape(shape)
        per_cell = values[g.cell_of_point == 0].sum() * g.weight
        return ScalarField(g, values * (self.nuclear_charge / per_cell))


def tile_field(f: ScalarField, grid: TorusGrid) -> ScalarField:
    """Periodically extend a cell-periodic field onto a larger torus."""
    if grid.points_per_cell != f.grid.points_per_cell or grid.d != f.grid.d:
        raise ValueError("grids must share dimension and resolution")
    cell = f.values[(slice(0, f.grid.points_per_cell),) * f.grid.d]
    return ScalarField(grid, np.tile(cell, (grid.cells,) * grid.d))


@dataclass
class PeriodicGroundState:
    spec: CrystalSpec
    options: SolverOptions
    V_per: ScalarField
    rho_per: ScalarField
    spectrum: Spectrum
    band_gap: float
    residuals: list[float] = field(default_factory=list)

    @property
    def grid(self) -> TorusGrid:
        return self.spec.grid

    @property
    def yukawa(self) -> YukawaParams:
        return self.spec.yukawa

    @property
    def fermi_level(self) -> float:
        return self.spectrum.fermi_level

    @property
    def gap(self) -> float:
        return self.spectrum.gap

    @cached_property
    def rho0(self) -> ScalarField:
        """Density of ``1(H_per <= eF)``: the reference for defect densities."""
        return density_from_fermi(self.spectrum)

    @cached_property
    def kinetic(self) -> np.ndarray:
        return kinetic_matrix(self.grid)

    @cached_property
    def h0_matrix(self) -> np.ndarray:
        mat = self.kinetic.copy()
        mat[np.diag_indices_from(mat)] += self.V_per.flat
        return mat

    def yukawa_potential(self, f: ScalarField) -> ScalarField:
        return yukawa_convolve(f, self.yukawa)

    def perturbed_spectrum(self, W: ScalarField) -> Spectrum:
        """Spectrum of ``H_per + W`` with the crystal's Fermi level."""
        if self.grid.size > self.options.max_dim:
            from .spectral import BudgetExceededError
            raise BudgetExceededError("dense budget exceeded")
        mat = self.h0_matrix.copy()
        mat[np.diag_indices_from(mat)] += W.flat
        w, u = np.linalg.eigh(mat)
        return Spectrum(self.grid, w, u, self.fermi_level)

    @cached_property
    def _partition(self):
        eo, uo = self.spectrum.occupied()
        eu, uu = self.spectrum.unoccupied()
        return eo, uo, eu, uu, 1.0 / (eo[None, :] - eu[:, None])

    def density_response(self, W: np.ndarray) -> np.ndarray:
        """First-order density change for a potential ``W`` (flat, or columns)."""
        eo, uo, eu, uu, denom = self._partition
        single = W.ndim == 1
        Ws = W[:, None] if single else W
        out = np.empty_like(Ws, dtype=float)
        for c in range(Ws.shape[1]):
            m = uu.T @ (Ws[:, c:c + 1] * uo)
            m *= denom
            out[:, c] = 2.0 * np.sum((uu @ m) * uo, axis=1)
        out /= self.grid.weight
        return out[:, 0] if single else out


def solve_periodic(spec: CrystalSpec, options: SolverOptions = SolverOptions(),
                   rho_init: ScalarField | None = None) -> PeriodicGroundState:
    """Damped self-consistent iteration for the perfect crystal.

    The Fermi level is placed mid-gap between the ``N_e * L^d``-th and the
    next eigenvalue.  Raises :class:`NotInsulatorError` when the final
    distance from the Fermi level to the spectrum is below ``g_min``.
    """
    grid = spec.grid
    nu = spec.nu_per()
    if rho_init is None:
        if spec.nuclear_charge > 0:
            rho = nu * (spec.electrons_per_cell / spec.nuclear_charge)
        else:
            rho = ScalarField.constant(grid, spec.electrons_per_cell)
    else:
        rho = rho_init.copy()
    kin = kinetic_matrix(grid)
    if grid.size > options.max_dim:
        from .spectral import BudgetExceededError
        raise BudgetExceededError(f"grid size {grid.size} exceeds {options.max_dim}")
    residuals: list[float] = []
    alpha = options.mixing
    for it in range(options.max_iter):
        V = yukawa_convolve(rho - nu, spec.yukawa)
        mat = kin.copy()
        mat[np.diag_indices_from(mat)] += V.flat
        spectrum = diagonalize(Hamiltonian(grid, V))
        eF, band_gap = midgap_fermi_level(spectrum.eigenvalues, spec.n_occupied)
        scale = 1.0 + abs(eF)
        if band_gap < 1e-9 * scale:
            raise NotInsulatorError(
                f"not an insulator: degenerate levels at the Fermi level (iteration {it})")
        spectrum = spectrum.with_fermi_level(eF)
        rho_out = density_from_fermi(spectrum)
        res = field_norm(rho_out - rho, "L2")
        residuals.append(res)
        log.debug("periodic iter %d residual %.3e gap %.3e", it, res, band_gap)
        if res <= options.tol_scf:
            break
        rho = rho * (1.0 - alpha) + rho_out * alpha
    else:
        raise ConvergenceError(
            f"periodic SCF did not converge in {options.max_iter} iterations "
            f"(residual {residuals[-1]:.2e})")
    if spectrum.gap < options.g_min:
        raise NotInsulatorError(
            f"not an insulator: gap {spectrum.gap:.3e} below g_min={options.g_min}")
    return PeriodicGroundState(spec, options, V, rho, spectrum, band_gap, residuals)


# -- dielectric operator ---------------------------------------------------

def apply_dielectric_L(f: ScalarField, gs: PeriodicGroundState) -> ScalarField:
    """``L f = -rho_{Q1,f}``: minus the linear density response to ``Y_m * f``."""
    W = gs.yukawa_potential(f)
    return ScalarField(gs.grid, -gs.density_response(W.flat))


def dielectric_matrix(gs: PeriodicGroundState) -> np.ndarray:
    """Dense matrix of ``L`` on flattened grid values."""
    eo, uo, eu, uu, denom = gs._partition
    n = gs.grid.size
    chi0 = np.zeros((n, n))
    for i in range(eo.size):
        phi = uo[:, i:i + 1] * uu
        chi0 += (phi * (2.0 * denom[:, i])) @ phi.T
    chi0 /= gs.grid.weight
    return -chi0 @ yukawa_matrix(gs.grid, gs.yukawa)


def _metric_root(grid: TorusGrid, m: float, power: float) -> np.ndarray:
    return (grid.k_squared + m**2) ** power


def _apply_symbol(values: np.ndarray, grid: TorusGrid, symbol: np.ndarray) -> np.ndarray:
    axes = tuple(range(grid.d))
    v = values.reshape(grid.shape)
    return np.fft.ifftn(np.fft.fftn(v, axes=axes) * symbol, axes=axes).real.ravel()


def metric_symmetrized_L(gs: PeriodicGroundState, L: np.ndarray | None = None) -> np.ndarray:
    """``B^{1/2} L B^{-1/2}`` with ``B = (-Lap + m^2)^{-1}`` the H^-1 Gram operator."""
    grid = gs.grid
    if L is None:
        L = dielectric_matrix(gs)
    half = _metric_root(grid, gs.yukawa.m, -0.5)
    inv_half = _metric_root(grid, gs.yukawa.m, 0.5)
    right = np.stack([_apply_symbol(c, grid, inv_half) for c in np.eye(grid.size)], axis=1)
    tmp = L @ right
    return np.stack([_apply_symbol(c, grid, half) for c in tmp.T], axis=1)


def solve_one_plus_L(g: ScalarField, gs: PeriodicGroundState, tol: float | None = None,
                     maxiter: int | None = None) -> ScalarField:
    """Solve ``(1 + L) f = g`` matrix-free.

    ``1 + L`` is self-adjoint positive definite for the H^-1 pairing, so
    CG runs on the conjugated operator ``B^{1/2} (1+L) B^{-1/2}``.  A few
    refinement sweeps bring the plain L2 relative residual below ``tol``.
    """
    grid = gs.grid
    tol = gs.options.krylov_tol if tol is None else tol
    maxiter = gs.options.krylov_maxiter if maxiter is None else maxiter
    rhs = g.flat
    gnorm = np.linalg.norm(rhs)
    if gnorm == 0.0:
        return ScalarField.zeros(grid)
    half = _metric_root(grid, gs.yukawa.m, -0.5)
    inv_half = _metric_root(grid, gs.yukawa.m, 0.5)

    def one_plus_L(v: np.ndarray) -> np.ndarray:
        return v + apply_dielectric_L(ScalarField(grid, v), gs).flat

    def conj(y: np.ndarray) -> np.ndarray:
        return _apply_symbol(one_plus_L(_apply_symbol(y, grid, inv_half)), grid, half)

    op = LinearOperator((grid.size, grid.size), matvec=conj, dtype=float)
    f = np.zeros(grid.size)
    residual = rhs.copy()
    for _ in range(6):
        y, info = cg(op, _apply_symbol(residual, grid, half), rtol=tol * 1e-2,
                     atol=0.0, maxiter=maxiter)
        if info > 0:
            raise KrylovError(f"CG stagnated after {info} iterations")
        f += _apply_symbol(y, grid, inv_half)
        residual = rhs - one_plus_L(f)
        if np.linalg.norm(residual) <= tol * gnorm:
            break
    else:
        raise KrylovError("residual refinement did not reach the requested tolerance")
    return ScalarField(grid, f)


@dataclass
class BlockDecay:
    separations: np.ndarray
    block_norms: np.ndarray
    diagonal_norm: float


def one_plus_L_offdiagonal_profile(gs: PeriodicGroundState, separations,
                                   source_cell=None) -> BlockDecay:
    """Operator norms of ``1_{cell j} (1+L)^{-1} 1_{cell k}`` against ``|j - k|``.

    Separations are taken along the first axis from ``source_cell``.
    """
    grid = gs.grid
    if source_cell is None:
        source_cell = (0,) * grid.d
    inv = np.linalg.inv(np.eye(grid.size) + dielectric_matrix(gs))
    cells = grid.cell_of_point.ravel()
    src = cells == grid.cell_index(source_cell)

    def block(sep):
        target = np.array(source_cell)
        target[0] += sep
        rows = cells == grid.cell_index(target)
        return np.linalg.norm(inv[np.ix_(rows, src)], 2)

    seps = np.asarray(separations, dtype=int)
    return BlockDecay(seps, np.array([block(s) for s in seps]), float(block(0)))


# -- nonlinear response ----------------------------------------------------

def _check_potential(W: ScalarField, gs: PeriodicGroundState) -> None:
    bound = gs.options.potential_safety * gs.gap
    wmax = float(np.max(np.abs(W.values)))
    if wmax >= bound:
        raise PotentialTooLargeError(
            f"potential too large: |Y_m*f|_inf = {wmax:.3e} >= {bound:.3e}")


def full_response_density(f: ScalarField, gs: PeriodicGroundState,
                          check: bool = True) -> tuple[ScalarField, Spectrum]:
    """``rho[1(H_per + Y_m*f <= eF)] - rho0`` and the perturbed spectrum."""
    W = gs.yukawa_potential(f)
    if check:
        _check_potential(W, gs)
    s = gs.perturbed_spectrum(W)
    return density_from_fermi(s) - gs.rho0, s


def second_order_density(f: ScalarField, gs: PeriodicGroundState) -> ScalarField:
    """Full nonlinear response to ``Y_m * f`` minus its linear part."""
    full, _ = full_response_density(f, gs)
    return full + apply_dielectric_L(f, gs)


@dataclass
class DefectSolution:
    nu: ScalarField
    rho_nu: ScalarField
    V_nu: ScalarField
    iterations: int
    contraction_estimate: float
    residuals: list[float]
    spectrum: Spectrum
    consistency_residual: float
    response_ratio: float

    @property
    def gap(self) -> float:
        return self.spectrum.gap


def not_contracting(steps: list[float], window: int) -> bool:
    """True when the last ``window`` step ratios are all >= 1."""
    if len(steps) <= window:
        return False
    tail = steps[-window - 1:]
    return all(b >= a for a, b in zip(tail, tail[1:]))


def _contraction_factor(steps: list[float], floor: float) -> float:
    ratios = [b / a for a, b in zip(steps, steps[1:]) if a > floor]
    return max(ratios) if ratios else 0.0


def _finish(nu, rho, steps, it, gs, contraction) -> DefectSolution:
    V = gs.yukawa_potential(rho - nu)
    s = gs.perturbed_spectrum(V)
    if s.gap < gs.options.defect_g_min:
        raise GapError(f"gap of the defect Hamiltonian {s.gap:.3e} below threshold")
    consistency = field_norm(density_from_fermi(s) - gs.rho0 - rho, "L2_unif")
    nu_norm = field_norm(nu, "L2_unif")
    ratio = field_norm(rho, "L2_unif") / nu_norm if nu_norm > 0 else 0.0
    return DefectSolution(nu, rho, V, it, contraction, steps, s, consistency, ratio)


def solve_defect_scf(nu: ScalarField, gs: PeriodicGroundState,
                     options: SolverOptions | None = None,
                     rho_init: ScalarField | None = None) -> DefectSolution:
    """Fixed point of ``rho -> L(1+L)^{-1} nu + (1+L)^{-1} rho_Q2(rho - nu)``.

    Raises :class:`NuTooLargeError` when the step ratio stays >= 1 for
    ``divergence_window`` consecutive iterations or when the effective
    potential threatens to close the gap.
    """
    opts = options or gs.options
    if nu.grid != gs.grid:
        raise ValueError("defect density lives on a different grid")
    screened = solve_one_plus_L(nu, gs, tol=opts.krylov_tol)
    base = nu - screened
    rho = base.copy() if rho_init is None else rho_init.copy()
    steps: list[float] = []
    floor = 10.0 * opts.tol_scf
    # rounding floor of the density differences, set by the size of rho0
    noise = 1e3 * np.finfo(float).eps * field_norm(gs.rho0, "L2_unif")
    for it in range(1, opts.max_iter + 1):
        try:
            q2 = second_order_density(rho - nu, gs)
        except PotentialTooLargeError as exc:
            raise NuTooLargeError(f"nu too large: {exc}") from exc
        new = base + solve_one_plus_L(q2, gs, tol=opts.krylov_tol)
        step = field_norm(new - rho, "L2_unif")
        steps.append(step)
        rho = new
        if step <= opts.tol_scf:
            break
        if not_contracting(steps, opts.divergence_window):
            if step <= noise:
                raise ConvergenceError(
                    f"stagnated at {step:.2e}: tol_scf is below the attainable precision")
            raise NuTooLargeError(f"nu too large: step ratio >= 1 over "
                                  f"{opts.divergence_window} consecutive iterations")
    else:
        raise ConvergenceError(f"defect SCF did not converge in {opts.max_iter} iterations")
    return _finish(nu, rho, steps, it, gs, _contraction_factor(steps, floor))


def solve_defect_direct(nu: ScalarField, gs: PeriodicGroundState, mixing: float = 0.5,
                        tol: float | None = None, max_iter: int = 2000) -> DefectSolution:
    """Damped projector iteration on the density, without preconditioning."""
    tol = gs.options.tol_scf if tol is None else tol
    rho = ScalarField.zeros(gs.grid)
    steps: list[float] = []
    for it in range(1, max_iter + 1):
        out, _ = full_response_density(rho - nu, gs, check=False)
        step = field_norm(out - rho, "L2_unif")
        steps.append(step)
        if step <= tol:
            rho = out
            break
        rho = rho * (1.0 - mixing) + out * mixing
    else:
        raise ConvergenceError("direct defect SCF did not converge")
    return _finish(nu, rho, steps, it, gs, _contraction_factor(steps, 10 * tol))


# -- energies --------------------------------------------------------------

def defect_energy(Q: np.ndarray, nu: ScalarField, gs: PeriodicGroundState) -> float:
    """``Tr((H_per - eF) Q) + D_m(rho_Q - nu, rho_Q - nu) / 2``.

    In finite dimension the trace relative to the crystal projector is the
    plain trace.
    """
    if Q.shape != (gs.grid.size, gs.grid.size):
        raise ValueError("Q does not match the grid")
    shifted = gs.h0_matrix - gs.fermi_level * np.eye(gs.grid.size)
    kinetic_part = float(np.sum(shifted * Q))
    charge = ScalarField(gs.grid, np.diag(Q) / gs.grid.weight) - nu
    return kinetic_part + 0.5 * interaction_energy(charge, charge, gs.yukawa)


def defect_projector_difference(sol: DefectSolution, gs: PeriodicGroundState) -> np.ndarray:
    return sol.spectrum.projector() - gs.spectrum.projector()


def random_rotation_generator(n_occ: int, n_unocc: int, rng: np.random.Generator,
                              window: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Random occupied/unoccupied coupling near the Fermi level.

    Returns the indices of the coupled eigenstates and the antisymmetric
    generator restricted to them (unit Frobenius norm of the coupling block).
    """
    k_o, k_u = min(window, n_occ), min(window, n_unocc)
    idx = np.r_[np.arange(n_occ - k_o, n_occ), np.arange(n_occ, n_occ + k_u)]
    b = rng.standard_normal((k_u, k_o))
    b /= np.linalg.norm(b)
    a = np.zeros((k_o + k_u, k_o + k_u))
    a[k_o:, :k_o] = b
    a[:k_o, k_o:] = -b.T
    return idx, a


def relative_energy(sol: DefectSolution, gs: PeriodicGroundState, idx: np.ndarray,
                    generator: np.ndarray, theta: float) -> float:
    """Relative energy of the state rotated by ``exp(theta * generator)``.

    The rotation acts in the eigenbasis of the defect mean-field
    Hamiltonian, on the states listed in ``idx``.
    """
    s = sol.spectrum
    n_occ = s.n_occupied
    occ_hat = np.diag((idx < n_occ).astype(float))
    rot = expm(theta * generator)
    delta_hat = rot @ occ_hat @ rot.T - occ_hat
    energy_part = float(np.sum((s.eigenvalues[idx] - s.fermi_level) * np.diag(delta_hat)))
    u = s.eigenvectors[:, idx]
    drho = np.einsum("xi,ij,xj->x", u, delta_hat, u) / gs.grid.weight
    f = ScalarField(gs.grid, drho)
    return energy_part + 0.5 * interaction_energy(f, f, gs.yukawa)


@dataclass
class RelativeEnergyReport:
    theta: float
    energies: np.ndarray
    energies_half: np.ndarray
    ratios: np.ndarray
    energy_at_zero: float

    @property
    def all_positive(self) -> bool:
        return bool(np.all(self.energies > 0))


def relative_energy_check(sol: DefectSolution, gs: PeriodicGroundState,
                          perturbation_size: float, n_directions: int = 20,
                          seed: int = 0) -> RelativeEnergyReport:
    rng = np.random.default_rng(seed)
    s = sol.spectrum
    n_occ = s.n_occupied
    energies, halves = [], []
    zero = None
    for _ in range(n_directions):
        idx, a = random_rotation_generator(n_occ, s.eigenvalues.size - n_occ, rng)
        if zero is None:
            zero = relative_energy(sol, gs, idx, a, 0.0)
        energies.append(relative_energy(sol, gs, idx, a, perturbation_size))
        halves.append(relative_energy(sol, gs, idx, a, 0.5 * perturbation_size))
    e, eh = np.array(energies), np.array(halves)
    return RelativeEnergyReport(perturbation_size, e, eh, e / eh, float(zero))


def linear_response_limit(chi: ScalarField, gs: PeriodicGroundState) -> ScalarField:
    """``L (1+L)^{-1} chi``, the small-amplitude limit of ``rho_{s chi} / s``."""
    return chi - solve_one_plus_L(chi, gs)


def defect_shape(grid: TorusGrid, amplitude: float = 0.2, width: float = 0.15,
                 site=None) -> ScalarField:
    """Gaussian of total charge ``amplitude`` truncated to one unit cell."""
    if site is None:
        site = (0,) * grid.d
    x = grid.coordinates()
    vals = np.ones(grid.shape)
    for axis in range(grid.d):
        shape = [1] * grid.d
        shape[axis] = grid.n_axis
        vals = vals * np.exp(-(x**2) / (2 * width**2)).reshape(shape)
    vals = np.where(grid.cell_of_point == grid.cell_index((0,) * grid.d), vals, 0.0)
    vals *= amplitude / (vals.sum() * grid.weight)
    return ScalarField(grid, grid.shift(vals, site))





def write_defect_solution(path, sol: DefectSolution, gs: PeriodicGroundState) -> list[str]:
    """Directory with ``nu``, ``rho_nu`` and ``V_nu`` binaries plus ``manifest.json``."""
    import json
    from pathlib import Path

    from .fields import write_field_binary

    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    m = gs.yukawa.m
    files = []
    for name, f in (("nu", sol.nu), ("rho_nu", sol.rho_nu), ("V_nu", sol.V_nu)):
        write_field_binary(out / f"{name}.bin", f, m)
        files.append(f"{name}.bin")
    manifest = {
        "iterations": sol.iterations,
        "residuals": sol.residuals,
        "contraction_estimate": sol.contraction_estimate,
        "response_ratio": sol.response_ratio,
        "consistency_residual": sol.consistency_residual,
        "gap": sol.gap,
        "fermi_level": gs.fermi_level,
        "files": files,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return files + ["manifest.json"]


def read_defect_fields(path) -> dict[str, ScalarField]:
    from pathlib import Path

    from .fields import read_field_binary

    return {name: read_field_binary(Path(path) / f"{name}.bin")[0]
            for name in ("nu", "rho_nu", "V_nu")}
