"""Bernoulli defect ensembles and small-p expansion of the density of states.

Pairings against a test function ``phi`` are built from spectral shifts
``T_K = Tr phi(H_K) - Tr phi(H_0)``, where ``H_K`` is the self-consistent
mean-field Hamiltonian with a copy of ``chi`` on every site of ``K``.
Configurations are solved once per translation class and cached.
"""
from __future__ import annotations

import itertools
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from .fields import ScalarField, TorusGrid
from .scf import PeriodicGroundState, SCFError, SolverOptions, solve_defect_scf
from .spectral import SpectralError

DEFAULT_ENUMERATION_BUDGET = 10


class EnumerationBudgetError(ValueError):
    pass


class ConfigurationError(SCFError):
    """SCF failure for a specific defect configuration."""

    def __init__(self, sites, cause):
        super().__init__(f"SCF failed for configuration K={list(sites)}: {cause}")
        self.sites = sites


@dataclass(frozen=True)
class DefectConfig:
    """Finite set of lattice sites of a torus, each carrying a copy of ``chi``."""

    cells: int
    d: int
    sites: tuple[tuple[int, ...], ...] = ()

    @classmethod
    def from_sites(cls, grid: TorusGrid, sites) -> "DefectConfig":
        norm = [tuple(int(c) % grid.cells for c in np.atleast_1d(s)) for s in sites]
        if any(len(s) != grid.d for s in norm):
            raise ValueError(f"sites must have {grid.d} coordinates")
        if len(set(norm)) != len(norm):
            raise ValueError("defect sites must be distinct")
        return cls(grid.cells, grid.d, tuple(sorted(norm)))

    def __len__(self) -> int:
        return len(self.sites)

    def translated(self, t) -> "DefectConfig":
        t = np.atleast_1d(t)
        moved = [tuple((np.asarray(s) + t) % self.cells) for s in self.sites]
        return DefectConfig(self.cells, self.d, tuple(sorted(tuple(int(c) for c in s)
                                                             for s in moved)))

    def canonical(self) -> tuple["DefectConfig", tuple[int, ...]]:
        """Lexicographically smallest translate and the shift ``t`` with ``self = canon + t``."""
        if not self.sites:
            return self, (0,) * self.d
        best, best_t = None, None
        for t in itertools.product(range(self.cells), repeat=self.d):
            cand = self.translated(np.negative(t))
            if best is None or cand.sites < best.sites:
                best, best_t = cand, t
        return best, tuple(int(c) for c in best_t)

    def nu(self, chi: ScalarField) -> ScalarField:
        total = np.zeros(chi.grid.shape)
        for s in self.sites:
            total += chi.grid.shift(chi.values, s)
        return ScalarField(chi.grid, total)


@dataclass(frozen=True)
class EnsembleSpec:
    p: float
    seed: int
    samples: int
    grid: TorusGrid

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if self.samples < 2:
            raise ValueError("at least two samples are required")

    def occupation(self, index: int) -> np.ndarray:
        """Bernoulli draw of sample ``index``; depends only on ``(seed, index)``."""
        bitgen = np.random.Philox(key=self.seed, counter=[0, 0, 0, index])
        u = np.random.Generator(bitgen).random(self.grid.n_cells)
        return u < self.p

    def config(self, index: int) -> DefectConfig:
        occ = self.occupation(index)
        return DefectConfig.from_sites(self.grid, self.grid.cell_sites()[occ])


@dataclass
class DosPairing:
    value: float
    stderr: float
    provenance: str
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.stderr < 0:
            raise ValueError("stderr must be non-negative")


@dataclass
class _Entry:
    eigenvalues: np.ndarray
    cell_weights: np.ndarray


class ConfigurationSpectra:
    """Cache of self-consistent spectra, keyed by translation class of ``K``."""

    def __init__(self, gs: PeriodicGroundState, chi: ScalarField,
                 options: SolverOptions | None = None):
        if chi.grid != gs.grid:
            raise ValueError("defect shape lives on a different grid")
        self.gs, self.chi, self.options = gs, chi, options
        self._cache: dict[tuple, _Entry] = {}
        self._lock = threading.Lock()
        self.solves = 0

    @property
    def grid(self) -> TorusGrid:
        return self.gs.grid

    def _solve(self, canon: DefectConfig) -> _Entry:
        if not canon.sites:
            s = self.gs.spectrum
        else:
            try:
                s = solve_defect_scf(canon.nu(self.chi), self.gs, self.options).spectrum
            except (SCFError, SpectralError) as exc:
                raise ConfigurationError(canon.sites, exc) from exc
        return _Entry(s.eigenvalues, s.cell_weights)

    def entry(self, config: DefectConfig) -> tuple[_Entry, tuple[int, ...]]:
        canon, t = config.canonical()
        with self._lock:
            hit = self._cache.get(canon.sites)
        if hit is None:
            hit = self._solve(canon)
            with self._lock:
                if canon.sites not in self._cache:
                    self._cache[canon.sites] = hit
                    self.solves += 1
        return hit, t

    def prefetch(self, configs, workers: int = 1) -> None:
        classes = {}
        for c in configs:
            canon, _ = c.canonical()
            if canon.sites not in self._cache:
                classes.setdefault(canon.sites, canon)
        todo = [classes[k] for k in sorted(classes)]
        if workers <= 1:
            for c in todo:
                self.entry(c)
        else:
            with ThreadPoolExecutor(workers) as ex:
                list(ex.map(self.entry, todo))

    def trace(self, config: DefectConfig, phi, local: bool = False) -> float:
        """``Tr phi(H_K)``, or ``Tr 1_Gamma phi(H_K) 1_Gamma`` with ``local=True``."""
        e, t = self.entry(config)
        values = phi(e.eigenvalues)
        if not local:
            return float(np.sum(values))
        cell = self.grid.cell_index(np.negative(t))
        return float(np.dot(e.cell_weights[cell], values))

    def shift_pairing(self, config: DefectConfig, phi) -> float:
        return self.trace(config, phi) - self.trace(DefectConfig(self.grid.cells, self.grid.d), phi)


def spectral_shift_pairing(K: DefectConfig, phi, gs: PeriodicGroundState, chi: ScalarField,
                           options: SolverOptions | None = None) -> float:
    """``T_K(phi) = Tr phi(H_K) - Tr phi(H_0)`` from a fresh solve (no cache)."""
    if not K.sites:
        return 0.0
    sol = solve_defect_scf(K.nu(chi), gs, options)
    return float(np.sum(phi(sol.spectrum.eigenvalues)) - np.sum(phi(gs.spectrum.eigenvalues)))


def pair_sites(grid: TorusGrid, cutoff: float) -> list[tuple[tuple[int, ...], float]]:
    """Distinct nonzero torus sites within ``cutoff`` of the origin, with distances."""
    if cutoff > grid.cells / 2 + 1e-9:
        raise ValueError("cutoff must not exceed half the torus")
    dist = grid.cell_distances((0,) * grid.d)
    out = [(tuple(int(c) for c in s), float(r))
           for s, r in zip(grid.cell_sites(), dist) if 0 < r <= cutoff + 1e-9]
    return sorted(out, key=lambda item: (item[1], item[0]))


def mu_pairing(j: int, phi, cutoff: float, cache: ConfigurationSpectra) -> DosPairing:
    """First or second expansion coefficient paired with ``phi``.

    ``j = 2`` sums ``(T_{0,k} - 2 T_0) / 2`` over sites ``0 < |k| <= cutoff``;
    the contribution of the outermost shell is reported as ``tail``.
    """
    if j not in (1, 2):
        raise ValueError("only j in {1, 2} is supported")
    grid = cache.grid
    origin = DefectConfig.from_sites(grid, [(0,) * grid.d])
    t0 = cache.shift_pairing(origin, phi)
    if j == 1:
        return DosPairing(t0, 0.0, "mu_term", {"j": 1})
    sites = pair_sites(grid, cutoff)
    terms = []
    for s, r in sites:
        pair = DefectConfig.from_sites(grid, [(0,) * grid.d, s])
        terms.append((r, 0.5 * (cache.shift_pairing(pair, phi) - 2.0 * t0)))
    radii = sorted({r for r, _ in terms})
    by_shell = {r: sum(v for rr, v in terms if rr == r) for r in radii}
    value = float(sum(v for _, v in terms))
    tail = abs(by_shell[radii[-1]]) if radii else 0.0
    return DosPairing(value, 0.0, "mu_term",
                      {"j": 2, "cutoff": cutoff, "tail": tail,
                       "shells": {str(r): v for r, v in by_shell.items()}})


def all_configs(grid: TorusGrid, budget: int = DEFAULT_ENUMERATION_BUDGET):
    n = grid.n_cells
    if n > budget:
        raise EnumerationBudgetError(
            f"enumeration budget exceeded: {n} sites > budget {budget}")
    sites = grid.cell_sites()
    for mask in range(2**n):
        chosen = [sites[i] for i in range(n) if mask >> i & 1]
        yield DefectConfig.from_sites(grid, chosen)


def occupancy_traces(phi, cache: ConfigurationSpectra, budget: int = DEFAULT_ENUMERATION_BUDGET,
                     local: bool = False, workers: int = 1) -> np.ndarray:
    """``a_k = sum_{|K| = k} Tr phi(H_K)`` for ``k = 0..N``."""
    grid = cache.grid
    configs = list(all_configs(grid, budget))
    cache.prefetch(configs, workers)
    a = np.zeros(grid.n_cells + 1)
    for c in configs:
        a[len(c)] += cache.trace(c, phi, local)
    return a


def dos_exact_enumeration(p: float, phi, cache: ConfigurationSpectra,
                          budget: int = DEFAULT_ENUMERATION_BUDGET, local: bool = False,
                          workers: int = 1) -> DosPairing:
    """Exact ensemble average of the per-volume trace over all ``2^N`` configurations."""
    n = cache.grid.n_cells
    a = occupancy_traces(phi, cache, budget, local, workers)
    k = np.arange(n + 1)
    counts = np.array([math.comb(n, int(i)) for i in k], dtype=float)
    w = p**k * (1.0 - p) ** (n - k)
    scale = 1.0 if local else 1.0 / n
    value = float(np.dot(w, a)) * scale
    return DosPairing(value, 0.0, "exact_enumeration",
                      {"p": p, "sites": n, "weight_sum": float(np.dot(w, counts)),
                       "configurations": 2**n, "solves": cache.solves})


def enumeration_polynomial(phi, cache: ConfigurationSpectra,
                           budget: int = DEFAULT_ENUMERATION_BUDGET) -> np.ndarray:
    """Coefficients ``c_j`` of the exact average as a polynomial in ``p``."""
    n = cache.grid.n_cells
    a = occupancy_traces(phi, cache, budget)
    coef = np.zeros(n + 1)
    for k in range(n + 1):
        coef = P.polyadd(coef, a[k] * P.polymul(P.polypow([0.0, 1.0], k),
                                                P.polypow([1.0, -1.0], n - k)))
    return coef / n


def dos_monte_carlo(spec: EnsembleSpec, phi, cache: ConfigurationSpectra, workers: int = 1,
                    local: bool = False, max_failure_fraction: float = 0.01) -> DosPairing:
    """Sample mean and standard error of the per-volume trace over Bernoulli draws.

    Sample ``i`` depends only on ``(seed, i)``; values are reduced in index
    order, so the result does not depend on ``workers``.
    """
    if spec.grid != cache.grid:
        raise ValueError("ensemble and cache use different grids")
    n = spec.grid.n_cells
    configs = [spec.config(i) for i in range(spec.samples)]
    classes = {}
    for c in configs:
        canon, _ = c.canonical()
        classes.setdefault(canon.sites, canon)
    keys = sorted(classes)
    failures = {}

    def solve(key):
        try:
            cache.entry(classes[key])
        except ConfigurationError as exc:
            return key, str(exc)
        return key, None

    if workers <= 1:
        results = [solve(k) for k in keys]
    else:
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(solve, keys))
    failures = {k: msg for k, msg in results if msg is not None}
    values = np.full(spec.samples, np.nan)
    for i, c in enumerate(configs):
        if c.canonical()[0].sites in failures:
            continue
        values[i] = cache.trace(c, phi, local) * (1.0 if local else 1.0 / n)
    ok = ~np.isnan(values)
    n_failed = int(spec.samples - ok.sum())
    if n_failed > max_failure_fraction * spec.samples:
        raise SCFError(f"{n_failed} of {spec.samples} Monte Carlo samples failed")
    v = values[ok]
    mean = float(np.sum(v) / v.size)
    stderr = float(np.sqrt(np.sum((v - mean) ** 2) / (v.size - 1) / v.size))
    return DosPairing(mean, stderr, "monte_carlo",
                      {"p": spec.p, "seed": spec.seed, "samples": spec.samples,
                       "failed": n_failed, "classes": len(keys)})


@dataclass
class SlopeReport:
    p_values: np.ndarray
    baseline: float
    mu: dict[int, float]
    residuals: dict[int, np.ndarray]
    slopes: dict[int, np.ndarray]
    tail: float

    def summary(self) -> dict:
        return {
            "p_values": self.p_values.tolist(),
            "n0": self.baseline,
            "mu": {str(k): v for k, v in self.mu.items()},
            "residuals": {str(k): v.tolist() for k, v in self.residuals.items()},
            "slopes": {str(k): v.tolist() for k, v in self.slopes.items()},
            "mu2_tail": self.tail,
        }


def expansion_residual_slopes(p_values, phi, cache: ConfigurationSpectra, cutoff: float,
                              orders=(0, 1, 2), budget: int = DEFAULT_ENUMERATION_BUDGET,
                              workers: int = 1) -> SlopeReport:
    """Log-log slopes of ``|<n_p,phi> - <n_0,phi> - sum_{j<=J} mu_j p^j|``."""
    p_values = np.asarray(p_values, dtype=float)
    if p_values.size < 3 or np.any(p_values <= 0) or np.any(p_values > 0.15):
        raise ValueError("need at least three p values in (0, 0.15]")
    n0 = dos_exact_enumeration(0.0, phi, cache, budget, workers=workers).value
    mu = {1: mu_pairing(1, phi, cutoff, cache).value}
    mu2 = mu_pairing(2, phi, cutoff, cache)
    mu[2] = mu2.value
    values = np.array([dos_exact_enumeration(p, phi, cache, budget).value for p in p_values])
    residuals, slopes = {}, {}
    for J in orders:
        model = n0 + sum(mu[j] * p_values**j for j in range(1, J + 1))
        r = np.abs(values - model)
        residuals[J] = r
        slopes[J] = np.diff(np.log(r)) / np.diff(np.log(p_values))
    return SlopeReport(p_values, n0, mu, residuals, slopes, mu2.diagnostics["tail"])


def richardson_first_order(phi, cache: ConfigurationSpectra, h0: float = 0.02, levels: int = 4,
                           budget: int = DEFAULT_ENUMERATION_BUDGET) -> tuple[float, float]:
    """Estimate ``d<n_p,phi>/dp`` at ``p = 0`` by Richardson extrapolation.

    Returns ``(estimate, error_estimate)``, the error being the change
    produced by the last extrapolation level.
    """
    n0 = dos_exact_enumeration(0.0, phi, cache, budget).value
    hs = h0 / 2.0 ** np.arange(levels)
    table = [[(dos_exact_enumeration(h, phi, cache, budget).value - n0) / h for h in hs]]
    for k in range(1, levels):
        prev = table[-1]
        table.append([(2**k * prev[i + 1] - prev[i]) / (2**k - 1) for i in range(len(prev) - 1)])
    best = table[-1][0]
    err = abs(best - table[-2][-1]) if levels > 1 else abs(best)
    return float(best), float(err)
