import numpy as np
import pytest
from hypothesis import settings

from rhf_yukawa.fields import TorusGrid, YukawaParams
from rhf_yukawa.scf import CrystalSpec, SolverOptions, defect_shape, solve_periodic, tile_field

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

# Tight tolerances keep the measured curves far above the solver noise floor.
TIGHT = SolverOptions(tol_scf=1e-12, krylov_tol=1e-13)


def crystal(cells=32, n=16, charge=64.0, width=0.1, electrons=1, m=1.0, d=1):
    grid = TorusGrid(d, cells, n)
    return CrystalSpec(grid, YukawaParams(m, d), charge, width, electrons)


@pytest.fixture(scope="session")
def gs():
    """Default instance: d=1, L=32, n=16, m=1, Z=64, one electron per cell.

    Its gap and the admissibility of the default defect are checked here so
    that every dependent test starts from a valid insulator.
    """
    g = solve_periodic(crystal(), TIGHT)
    assert g.gap >= TIGHT.g_min
    w = g.yukawa_potential(defect_shape(g.grid)).values
    assert np.abs(w).max() < TIGHT.potential_safety * g.gap
    return g


@pytest.fixture(scope="session")
def gs64(gs):
    g64 = TorusGrid(1, 64, 16)
    return solve_periodic(crystal(cells=64), TIGHT, rho_init=tile_field(gs.rho_per, g64))


@pytest.fixture(scope="session")
def gs8():
    return solve_periodic(crystal(cells=8), TIGHT)


@pytest.fixture(scope="session")
def small_gs():
    """Cheap instance for property tests: L=6, n=8."""
    return solve_periodic(crystal(cells=6, n=8), TIGHT)


@pytest.fixture(scope="session")
def chi(gs):
    return defect_shape(gs.grid)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_configure(config):
    config._acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
