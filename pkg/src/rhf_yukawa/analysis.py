"""Decay, locality, superposition and thermodynamic-limit measurements.

Every curve here is a sequence of independent defect solves followed by
cellwise norms.  Distances between cells use the periodic metric on
cell centers.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .fields import ScalarField, TorusGrid, cell_norms
from .scf import DefectSolution, PeriodicGroundState, SolverOptions, solve_defect_scf
from .spectral import local_projector_distance


@dataclass
class Fit:
    model: str
    rate: float
    intercept: float
    r_squared: float
    residual: float

    def predict(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.model == "exponential":
            return np.exp(self.intercept - self.rate * x)
        if self.model == "log_squared":
            return np.exp(self.intercept - self.rate * np.log(x) ** 2)
        return np.exp(self.intercept - self.rate * np.log(x))


def _linear_fit(t: np.ndarray, ly: np.ndarray, model: str) -> Fit:
    slope, a = np.polyfit(t, ly, 1)
    res = float(np.sum((ly - (a + slope * t)) ** 2))
    tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - res / tot if tot > 0 else 1.0
    return Fit(model, float(-slope), float(a), r2, res)


def fit_models(x, y) -> dict[str, Fit]:
    """Least-squares fits of ``log y`` against ``x``, ``(log x)^2`` and ``log x``."""
    x = np.asarray(x, dtype=float)
    ly = np.log(np.asarray(y, dtype=float))
    return {
        "exponential": _linear_fit(x, ly, "exponential"),
        "log_squared": _linear_fit(np.log(x) ** 2, ly, "log_squared"),
        "power": _linear_fit(np.log(x), ly, "power"),
    }


def local_exponents(x, y) -> np.ndarray:
    """``-dlog y / dlog x`` between consecutive samples."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    return -np.diff(ly) / np.diff(lx)


def support_cells(f: ScalarField) -> np.ndarray:
    """Flat indices of cells where ``f`` is not identically zero."""
    g = f.grid
    mass = np.bincount(g.cell_of_point.ravel(), weights=np.abs(f.flat), minlength=g.n_cells)
    return np.flatnonzero(mass > 0)


def distance_to_support(f: ScalarField) -> np.ndarray:
    g = f.grid
    supp = support_cells(f)
    if supp.size == 0:
        return np.full(g.n_cells, np.inf)
    return g.distances_to_cells(g.cell_sites()[supp])


# -- decay -----------------------------------------------------------------

@dataclass
class DecayProfile:
    radii: np.ndarray
    shell_norms: np.ndarray
    quantity: str
    fits: dict[str, Fit] = field(default_factory=dict)

    @property
    def exponents(self) -> np.ndarray:
        return local_exponents(self.radii, self.shell_norms)


def shell_profile(values: np.ndarray, dist: np.ndarray, radii) -> np.ndarray:
    """``max`` of per-cell values over cells at distance >= R, for each R."""
    return np.array([values[dist >= r - 1e-9].max(initial=0.0) for r in radii])


def decay_profile(sol: DefectSolution, radii, quantity: str = "V") -> DecayProfile:
    """Shell envelope of the defect potential (local H2) or density (local L2).

    The first radius is excluded from the fits.
    """
    grid = sol.nu.grid
    radii = np.asarray(radii, dtype=float)
    dist = distance_to_support(sol.nu)
    reach = dist[np.isfinite(dist)].max(initial=grid.cells / 2)
    if radii.size and radii.max() > reach + 1e-9:
        raise ValueError(f"radius {radii.max()} exceeds the torus reach {reach}")
    if quantity == "V":
        per_cell = cell_norms(sol.V_nu, "H2")
    elif quantity == "rho":
        per_cell = cell_norms(sol.rho_nu, "L2")
    else:
        raise ValueError("quantity must be 'V' or 'rho'")
    norms = shell_profile(per_cell, dist, radii)
    fits = {}
    if radii.size >= 3 and np.all(norms[1:] > 0):
        fits = fit_models(radii[1:], norms[1:])
    return DecayProfile(radii, norms, quantity, fits)


# -- locality, superposition, thermodynamic limit --------------------------

@dataclass
class ErrorCurve:
    parameters: np.ndarray
    errors: np.ndarray
    label: str

    @property
    def ratios(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.errors[1:] / self.errors[:-1]

    @property
    def power_exponent(self) -> float:
        good = self.errors > 0
        if good.sum() < 2:
            return math.inf
        return fit_models(self.parameters[good], self.errors[good])["power"].rate

    def to_rows(self) -> list[dict]:
        return [{"parameter": float(p), "error": float(e)}
                for p, e in zip(self.parameters, self.errors)]


def truncate(nu: ScalarField, size: float) -> ScalarField:
    """``nu * 1_{[-size/2, size/2)^d}`` in torus coordinates."""
    g = nu.grid
    inside = np.ones(g.shape, dtype=bool)
    for x in g.mesh():
        inside &= (x >= -size / 2) & (x < size / 2)
    return ScalarField(g, np.where(inside, nu.values, 0.0))


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(workers) as ex:
        return list(ex.map(fn, items))


def _local_error(a: DefectSolution, b: DefectSolution, cells: np.ndarray) -> float:
    dv = cell_norms(a.V_nu - b.V_nu, "H2")[cells]
    dr = cell_norms(a.rho_nu - b.rho_nu, "L2")[cells]
    return float(dv.max() + dr.max())


def probe_cells(grid: TorusGrid, center, radius: float) -> np.ndarray:
    """Cells whose center lies within ``radius`` of ``center`` (always includes it)."""
    return np.flatnonzero(grid.cell_distances(center) <= max(radius, 0.0) + 1e-9)


def locality_error(nu: ScalarField, gs: PeriodicGroundState, truncations, beta: float = 2.0,
                   options: SolverOptions | None = None, workers: int = 1) -> ErrorCurve:
    """Error of truncating ``nu`` to ``Gamma_L``, measured on ``B(0, L / 4^beta)``."""
    full = solve_defect_scf(nu, gs, options)
    sizes = np.asarray(truncations, dtype=float)
    origin = (0,) * gs.grid.d

    def one(size):
        part = solve_defect_scf(truncate(nu, size), gs, options)
        return _local_error(full, part, probe_cells(gs.grid, origin, size / 4**beta))

    return ErrorCurve(sizes, np.array(_map(one, sizes, workers)), "locality")


def superposition_error(chi: ScalarField, gs: PeriodicGroundState, separations,
                        beta: float = 2.0, options: SolverOptions | None = None,
                        workers: int = 1) -> ErrorCurve:
    """Local H2 norm of ``V_{nu1+nu2} - V_{nu1} - V_{nu2}`` near the second defect.

    ``nu1 = chi`` and ``nu2`` is ``chi`` translated by ``R`` cells along the
    first axis.  ``V_{nu2}`` is obtained from ``V_{nu1}`` by translation.
    """
    grid = gs.grid
    seps = np.asarray(separations, dtype=int)
    if seps.max(initial=0) > grid.cells // 2:
        raise ValueError("separation too large for the torus")
    single = solve_defect_scf(chi, gs, options)
    dist0 = distance_to_support(chi)
    supp_radius = float(dist0[support_cells(chi)].max(initial=0.0))

    def one(r):
        site = np.zeros(grid.d, dtype=int)
        site[0] = r
        pair = solve_defect_scf(chi + chi.shifted(site), gs, options)
        resid = pair.V_nu - single.V_nu - single.V_nu.shifted(site)
        near = distance_to_support(chi.shifted(site)) <= r / 4**beta + supp_radius + 1e-9
        norms = cell_norms(resid, "H2")[near]
        return float(norms.max()) if norms.size else 0.0

    return ErrorCurve(seps.astype(float), np.array(_map(one, seps, workers)), "superposition")


def thermodynamic_limit_curve(nu_global: ScalarField, gs: PeriodicGroundState, truncations,
                              region=None, options: SolverOptions | None = None,
                              workers: int = 1) -> ErrorCurve:
    """Local trace-norm distance between the Fermi projectors of ``nu`` and ``nu_L``."""
    if region is None:
        region = [(0,) * gs.grid.d]
    full = solve_defect_scf(nu_global, gs, options)
    sizes = np.asarray(truncations, dtype=float)

    def one(size):
        part = solve_defect_scf(truncate(nu_global, size), gs, options)
        return local_projector_distance(full.spectrum, part.spectrum, region)

    return ErrorCurve(sizes, np.array(_map(one, sizes, workers)), "thermodynamic")


def random_defect_lattice(grid: TorusGrid, chi: ScalarField, seed: int = 0,
                          low: float = 0.5, high: float = 1.0) -> ScalarField:
    """Non-decaying charge: ``chi`` at every site with seeded random weights."""
    rng = np.random.default_rng(seed)
    weights = rng.uniform(low, high, grid.n_cells)
    total = np.zeros(grid.shape)
    for w, site in zip(weights, grid.cell_sites()):
        total += w * grid.shift(chi.values, site)
    return ScalarField(grid, total)


# -- Gronwall-type recursion -----------------------------------------------

@dataclass
class GronwallReport:
    a: float
    radii: np.ndarray
    values: np.ndarray
    fit_max_radius: float
    rate: float
    prefactor: float
    log_squared_residual: float
    power_residual: float
    bound_holds: bool
    violations: int

    def summary(self) -> dict:
        d = asdict(self)
        d["radii"] = self.radii.tolist()
        d["values"] = self.values.tolist()
        return d


def gronwall_sequence(C: float, Cp: float, a: float, R_max: float, x0: float = 1.0):
    """Extremal non-increasing sequence with equality in the recursion on ``R_n = a^n``."""
    n = int(math.floor(math.log(R_max) / math.log(a) + 1e-9))
    radii = a ** np.arange(n + 1, dtype=float)
    x = [x0]
    for r in radii[1:]:
        x.append(min(x[-1], C / r * math.exp(-Cp * r) * x0 + C / r * x[-1]))
    return radii, np.array(x)


def gronwall_extremal_check(C: float, Cp: float, a: float, R_max: float,
                            x0: float = 1.0, extension: float = 2.0) -> GronwallReport:
    """Fit ``x_R <= C'' exp(-C''' (log R)^2) x0`` and test it beyond the fit window.

    The rate ``C'''`` comes from the curvature of ``log x`` in ``log R``
    (second differences), which is insensitive to lower-order terms; the
    prefactor is the smallest one valid on ``2 <= R <= R_max``.  The bound
    is then checked on the grid extended to ``R_max ** extension``.
    """
    if not (a > 1 and Cp > 0 and C >= 0):
        raise ValueError("need a > 1, C' > 0 and C >= 0")
    radii, x = gronwall_sequence(C, Cp, a, R_max**extension, x0)
    use = radii >= 2
    if x0 == 0 or not np.any(x[use] > 0):
        return GronwallReport(a, radii, x, R_max, 0.0, 0.0, 0.0, 0.0, True, 0)
    window = use & (radii <= R_max * (1 + 1e-12)) & (x > 0)
    u = np.log(radii[window])
    lx = np.log(x[window] / x0)
    if u.size >= 3:
        curv = np.diff(lx, 2) / np.diff(u)[:-1] ** 2
        rate = float(max(-0.5 * np.median(curv), 0.0))
    else:
        rate = 0.0
    log_pref = float(np.max(lx + rate * u**2))
    fits = fit_models(radii[window], x[window] / x0)
    u_all = np.log(radii[use])
    with np.errstate(divide="ignore"):
        lx_all = np.log(x[use] / x0)
    bound = log_pref - rate * u_all**2
    bad = int(np.count_nonzero(lx_all > bound + 1e-12 * (1 + np.abs(bound))))
    return GronwallReport(a, radii, x, R_max, rate, math.exp(log_pref),
                          fits["log_squared"].residual, fits["power"].residual,
                          bad == 0, bad)


# -- resolvent probe -------------------------------------------------------

def combes_thomas_probe(gs: PeriodicGroundState, radii, factors=(1.0, 2.0)):
    """Resolvent decay of ``H_per`` at ``z`` with ``d(z, sigma) = factor * gap``.

    ``z`` starts at the Fermi level and moves off the real axis, so the
    distance to the spectrum grows as requested while staying inside the gap.
    """
    from .spectral import Hamiltonian, resolvent_kernel_decay

    h = Hamiltonian(gs.grid, gs.V_per)
    out = []
    for f in factors:
        if f < 1.0:
            raise ValueError("distance factors below 1 leave the gap midpoint")
        z = gs.fermi_level + 1j * gs.gap * math.sqrt(f * f - 1.0)
        out.append(resolvent_kernel_decay(h, z, (0,) * gs.grid.d, radii,
                                          gs.spectrum.eigenvalues))
    return out
