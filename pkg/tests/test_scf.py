import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import TIGHT, crystal
from rhf_yukawa.fields import ScalarField, TorusGrid, field_norm, hminus1_inner, yukawa_convolve
from rhf_yukawa.scf import (
    KrylovError,
    NotInsulatorError,
    NuTooLargeError,
    PotentialTooLargeError,
    SolverOptions,
    apply_dielectric_L,
    defect_energy,
    defect_projector_difference,
    dielectric_matrix,
    full_response_density,
    linear_response_limit,
    metric_symmetrized_L,
    not_contracting,
    one_plus_L_offdiagonal_profile,
    read_defect_fields,
    relative_energy,
    relative_energy_check,
    random_rotation_generator,
    second_order_density,
    solve_defect_direct,
    solve_defect_scf,
    solve_one_plus_L,
    solve_periodic,
    tile_field,
    write_defect_solution,
)
from rhf_yukawa.spectral import Hamiltonian, density_from_fermi, diagonalize


def random_field(grid, seed, scale=1.0):
    return ScalarField(grid, scale * np.random.default_rng(seed).standard_normal(grid.shape))


def smooth_field(grid, seed, scale=1.0):
    """Random trigonometric polynomial with a handful of low modes."""
    rng = np.random.default_rng(seed)
    x = grid.coordinates()
    vals = sum(rng.standard_normal() * np.cos(2 * np.pi * k * x / grid.cells + rng.uniform(0, 6))
               for k in range(1, 6))
    return ScalarField(grid, scale * vals)


# -- crystal ----------------------------------------------------------------

def test_nuclear_density_normalization():
    spec = crystal(cells=5, n=16, charge=7.0, width=0.12)
    nu = spec.nu_per()
    assert np.all(nu.values >= 0)
    g = spec.grid
    for c in range(g.n_cells):
        assert nu.values.ravel()[g.cell_of_point.ravel() == c].sum() * g.weight == \
            pytest.approx(7.0, abs=1e-10)


def test_crystal_validation():
    with pytest.raises(ValueError):
        crystal(electrons=0)
    with pytest.raises(ValueError):
        crystal(width=0.0)


def test_uniform_background_is_not_an_insulator():
    spec = crystal(cells=8, n=8, charge=1.0, width=math.inf)
    with pytest.raises(NotInsulatorError, match="not an insulator"):
        solve_periodic(spec)


def test_weak_wells_fail_gap_threshold():
    with pytest.raises(NotInsulatorError):
        solve_periodic(crystal(cells=8, n=8, charge=1.0), SolverOptions(g_min=0.5))


def test_periodic_ground_state_invariants(gs):
    assert gs.gap >= 0.1
    h = Hamiltonian(gs.grid, gs.V_per)
    fresh = diagonalize(h).with_fermi_level(gs.fermi_level)
    assert fresh.gap == pytest.approx(gs.gap, abs=1e-8)
    assert field_norm(density_from_fermi(fresh) - gs.rho_per, "L2") <= gs.options.tol_scf
    nu = gs.spec.nu_per()
    assert np.array_equal(gs.V_per.values,
                          yukawa_convolve(gs.rho_per - nu, gs.yukawa).values)
    cells = gs.rho_per.values.reshape(gs.grid.cells, -1)
    assert np.abs(cells - cells[0]).max() <= 1e-8
    assert gs.rho0.integral() == pytest.approx(gs.grid.n_cells, rel=1e-12)


def test_doubling_supercell_keeps_cell_density(gs, gs64):
    a = gs.rho_per.values[:16]
    b = gs64.rho_per.values[:16]
    assert np.abs(a - b).max() <= 1e-6
    # and from a cold start
    cold = solve_periodic(crystal(cells=16), TIGHT)
    assert np.abs(cold.rho_per.values[:16] - a).max() <= 1e-6


def test_tile_field_requires_same_resolution(gs):
    with pytest.raises(ValueError):
        tile_field(gs.rho_per, TorusGrid(1, 64, 8))


# -- dielectric operator ----------------------------------------------------

def test_L_of_zero(small_gs):
    assert np.all(apply_dielectric_L(ScalarField.zeros(small_gs.grid), small_gs).values == 0)


@given(st.integers(0, 10**6))
@settings(max_examples=20)
def test_L_self_adjoint_in_hminus1(small_gs, seed):
    g = small_gs.grid
    f, h = random_field(g, seed), random_field(g, seed + 1)
    lhs = hminus1_inner(f, apply_dielectric_L(h, small_gs))
    rhs = hminus1_inner(apply_dielectric_L(f, small_gs), h)
    scale = field_norm(f, "Hminus1") * field_norm(h, "Hminus1")
    assert abs(lhs - rhs) <= 1e-8 * scale


def test_L_psd_and_matches_dense(small_gs):
    L = dielectric_matrix(small_gs)
    M = metric_symmetrized_L(small_gs, L)
    assert np.linalg.norm(M - M.T) / np.linalg.norm(M) <= 1e-6
    assert np.linalg.eigvalsh(0.5 * (M + M.T)).min() >= -1e-8
    f = random_field(small_gs.grid, 3)
    assert np.allclose(L @ f.flat, apply_dielectric_L(f, small_gs).flat, atol=1e-13)


def _op_norm(gs):
    from rhf_yukawa.scf import _apply_symbol, _metric_root

    g = gs.grid
    root = _metric_root(g, gs.yukawa.m, 0.5)
    inv_metric = np.stack([_apply_symbol(c, g, root) for c in np.eye(g.size)], axis=1)
    return np.linalg.norm(dielectric_matrix(gs) @ inv_metric, 2)


def test_L_bounded_from_hminus1_to_l2():
    coarse = solve_periodic(crystal(cells=6, n=8), TIGHT)
    fine = solve_periodic(crystal(cells=6, n=16), TIGHT)
    c_coarse, c_fine = _op_norm(coarse), _op_norm(fine)
    assert abs(c_fine / c_coarse - 1) <= 0.2
    rng = np.random.default_rng(0)
    for _ in range(100):
        f = ScalarField(fine.grid, rng.standard_normal(fine.grid.shape))
        ratio = field_norm(apply_dielectric_L(f, fine), "L2") / field_norm(f, "Hminus1")
        assert ratio <= c_fine * (1 + 1e-10)


def test_linearization_residual_is_quadratic(gs, chi):
    ts = [0.4, 0.2, 0.1]
    res = []
    for t in ts:
        full, _ = full_response_density(chi * t, gs, check=False)
        res.append(field_norm(full + apply_dielectric_L(chi * t, gs), "L2"))
    ratios = np.array(res[:-1]) / np.array(res[1:])
    assert np.all((ratios >= 3.4) & (ratios <= 4.6))


def test_first_order_part_is_odd(small_gs):
    f = smooth_field(small_gs.grid, 5, 0.05)
    a = apply_dielectric_L(f, small_gs).values
    b = apply_dielectric_L(-f, small_gs).values
    assert np.array_equal(a, -b)
    q_plus = second_order_density(f, small_gs).values
    q_minus = second_order_density(-f, small_gs).values
    assert not np.allclose(q_plus, -q_minus)


# -- (1 + L)^{-1} ------------------------------------------------------------

def test_solve_one_plus_L(small_gs):
    g = small_gs.grid
    assert np.all(solve_one_plus_L(ScalarField.zeros(g), small_gs).values == 0)
    rhs = random_field(g, 9)
    f = solve_one_plus_L(rhs, small_gs)
    back = f + apply_dielectric_L(f, small_gs)
    assert np.linalg.norm(back.flat - rhs.flat) / np.linalg.norm(rhs.flat) <= 1e-9
    dense = np.linalg.solve(np.eye(g.size) + dielectric_matrix(small_gs), rhs.flat)
    assert np.abs(dense - f.flat).max() <= 1e-8 * np.abs(dense).max()


def test_krylov_stagnation_is_reported(small_gs):
    with pytest.raises(KrylovError):
        solve_one_plus_L(random_field(small_gs.grid, 1), small_gs, tol=1e-14, maxiter=1)


def test_offdiagonal_profile_default_instance(gs):
    prof = one_plus_L_offdiagonal_profile(gs, range(0, 12))
    assert np.all(prof.block_norms[1:] <= prof.diagonal_norm)
    assert np.all(np.diff(prof.block_norms[2:]) <= 0)


def test_offdiagonal_profile_weak_coupling():
    weak = solve_periodic(crystal(cells=6, m=10.0), TIGHT)
    prof = one_plus_L_offdiagonal_profile(weak, [0, 1, 2, 3])
    assert prof.diagonal_norm == pytest.approx(1.0, abs=1e-3)
    assert np.all(prof.block_norms[1:] <= 1e-3)


# -- second-order remainder --------------------------------------------------

def test_second_order_of_zero(small_gs):
    assert np.all(second_order_density(ScalarField.zeros(small_gs.grid), small_gs).values == 0)


def test_second_order_scales_quadratically(gs, chi):
    q = lambda t: field_norm(second_order_density(chi * t, gs), "L2") / t**2
    a, b = q(0.2), q(0.1)
    assert abs(a / b - 1) <= 0.25


def test_second_order_refuses_large_potentials(gs, chi):
    with pytest.raises(PotentialTooLargeError):
        second_order_density(chi * 20.0, gs)


# -- defect SCF ------------------------------------------------------------

def test_zero_defect(gs):
    sol = solve_defect_scf(ScalarField.zeros(gs.grid), gs, TIGHT)
    assert sol.iterations == 1
    assert np.all(sol.rho_nu.values == 0) and np.all(sol.V_nu.values == 0)


@pytest.fixture(scope="module")
def defect(gs, chi):
    return solve_defect_scf(chi, gs, TIGHT)


def test_defect_solution_invariants(gs, chi, defect):
    tol = TIGHT.tol_scf
    assert np.array_equal(defect.V_nu.values,
                          yukawa_convolve(defect.rho_nu - chi, gs.yukawa).values)
    assert defect.consistency_residual <= 5 * tol
    # one more application of the map moves rho by at most tol
    base = chi - solve_one_plus_L(chi, gs, tol=TIGHT.krylov_tol)
    again = base + solve_one_plus_L(second_order_density(defect.rho_nu - chi, gs), gs,
                                    tol=TIGHT.krylov_tol)
    assert field_norm(again - defect.rho_nu, "L2_unif") <= 2 * tol
    assert defect.residuals[-1] <= tol
    assert 0 <= defect.contraction_estimate < 1


def test_defect_matches_direct_scf(gs, chi, defect):
    direct = solve_defect_direct(chi, gs, tol=1e-12)
    assert np.abs(direct.V_nu.values - defect.V_nu.values).max() <= 1e-10


def test_defect_unique_from_two_starts(gs, chi, defect):
    cold = solve_defect_scf(chi, gs, TIGHT, rho_init=ScalarField.zeros(gs.grid))
    assert field_norm(cold.rho_nu - defect.rho_nu, "L2_unif") <= 5 * TIGHT.tol_scf


def test_small_amplitude_limit(gs, chi):
    target = linear_response_limit(chi, gs)
    errs = []
    for s in (1e-2, 1e-3):
        sol = solve_defect_scf(chi * s, gs, TIGHT)
        errs.append(field_norm(sol.rho_nu * (1 / s) - target, "L2_unif"))
    assert errs[1] <= 0.2 * errs[0]
    assert errs[0] <= 1e-2 * field_norm(target, "L2_unif")


def test_contraction_monotone_in_amplitude(gs, chi):
    est = [solve_defect_scf(chi * s, gs, TIGHT).contraction_estimate for s in (0.25, 0.5, 1.0)]
    assert est[0] <= est[1] <= est[2]


def test_large_defect_is_rejected(gs, chi):
    with pytest.raises(NuTooLargeError, match="nu too large"):
        solve_defect_scf(chi * 10.0, gs)


def test_not_contracting_rule():
    assert not not_contracting([1.0, 0.5, 0.25], 2)
    assert not_contracting([1.0, 0.5, 0.6, 0.7], 2)
    assert not not_contracting([1.0, 1.1, 1.2], 5)


def test_defect_solution_directory(tmp_path, gs, chi, defect):
    files = write_defect_solution(tmp_path / "sol", defect, gs)
    assert "manifest.json" in files
    back = read_defect_fields(tmp_path / "sol")
    assert np.array_equal(back["V_nu"].values, defect.V_nu.values)
    assert np.array_equal(back["nu"].values, chi.values)


# -- energies --------------------------------------------------------------

def test_defect_energy_trivial_cases(gs, chi):
    n = gs.grid.size
    assert defect_energy(np.zeros((n, n)), ScalarField.zeros(gs.grid), gs) == 0.0
    from rhf_yukawa.fields import interaction_energy
    assert defect_energy(np.zeros((n, n)), chi, gs) == pytest.approx(
        0.5 * interaction_energy(chi, chi, gs.yukawa), rel=1e-12)


def test_scf_solution_minimizes_energy(gs, chi, defect):
    q_opt = defect_projector_difference(defect, gs)
    e_opt = defect_energy(q_opt, chi, gs)
    rng = np.random.default_rng(11)
    s = defect.spectrum
    n_occ = s.n_occupied
    p0 = gs.spectrum.projector()
    from scipy.linalg import expm
    for _ in range(10):
        idx, a = random_rotation_generator(n_occ, s.eigenvalues.size - n_occ, rng)
        u = s.eigenvectors[:, idx]
        rot = expm(rng.uniform(0.05, 0.5) * a)
        occ = np.diag((idx < n_occ).astype(float))
        trial = s.projector() + u @ (rot @ occ @ rot.T - occ) @ u.T
        assert e_opt <= defect_energy(trial - p0, chi, gs)


def test_relative_energy(gs, defect):
    rng = np.random.default_rng(0)
    idx, a = random_rotation_generator(defect.spectrum.n_occupied,
                                       gs.grid.size - defect.spectrum.n_occupied, rng)
    assert relative_energy(defect, gs, idx, a, 0.0) == 0.0
    rep = relative_energy_check(defect, gs, 0.05, n_directions=20)
    assert rep.energy_at_zero == 0.0
    assert rep.all_positive
    assert np.all((rep.ratios >= 3.4) & (rep.ratios <= 4.6))
