import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import TIGHT
from rhf_yukawa.analysis import (
    decay_profile,
    fit_models,
    gronwall_extremal_check,
    gronwall_sequence,
    local_exponents,
    locality_error,
    random_defect_lattice,
    superposition_error,
    thermodynamic_limit_curve,
    truncate,
)
from rhf_yukawa.fields import ScalarField, field_norm
from rhf_yukawa.scf import solve_defect_scf


@pytest.fixture(scope="module")
def single(gs, chi):
    return solve_defect_scf(chi, gs, TIGHT)


def test_fit_models_recover_exact_laws():
    r = np.arange(2.0, 12.0)
    assert fit_models(r, 3 * np.exp(-0.7 * r))["exponential"].rate == pytest.approx(0.7)
    assert fit_models(r, np.exp(-0.3 * np.log(r) ** 2))["log_squared"].rate == pytest.approx(0.3)
    assert fit_models(r, r**-2.5)["power"].rate == pytest.approx(2.5)
    assert np.allclose(local_exponents(r, r**-2.0), 2.0)


def test_decay_profile_zero_defect(gs):
    sol = solve_defect_scf(ScalarField.zeros(gs.grid), gs, TIGHT)
    prof = decay_profile(sol, [1, 2, 3])
    assert np.all(prof.shell_norms == 0)


def test_decay_profile_decreasing_and_superpolynomial(single):
    radii = np.arange(1, 13)
    for quantity in ("V", "rho"):
        prof = decay_profile(single, radii, quantity)
        assert np.all(prof.shell_norms >= 0)
        assert np.all(np.diff(prof.shell_norms[1:]) < 0)
        p = local_exponents([2, 4, 8], prof.shell_norms[[1, 3, 7]])
        assert p[1] > p[0]
        # both fits reported; exponential not worse than the log-squared one by 10x
        assert prof.fits["exponential"].residual <= 10 * prof.fits["log_squared"].residual


def test_potential_and_density_envelopes_coincide_at_unit_mass(single):
    # at m = 1 the local H2 norm applies -Lap + m^2, which maps V_nu to 2 rho_nu off the support
    v = decay_profile(single, np.arange(1, 9), "V").shell_norms
    r = decay_profile(single, np.arange(1, 9), "rho").shell_norms
    assert np.allclose(v / r, 2.0, rtol=1e-8)


def test_decay_profile_rejects_radii_beyond_torus(single):
    with pytest.raises(ValueError):
        decay_profile(single, [1, 40])
    with pytest.raises(ValueError):
        decay_profile(single, [1, 2, 3], quantity="phi")


def test_truncation_is_exact_indicator(gs, chi):
    nu = random_defect_lattice(gs.grid, chi, seed=2)
    t = truncate(nu, 5.0)
    x = gs.grid.coordinates()
    inside = (x >= -2.5) & (x < 2.5)
    assert np.array_equal(t.values[inside], nu.values[inside])
    assert np.all(t.values[~inside] == 0)


def test_locality_zero_when_support_inside(gs, chi):
    curve = locality_error(chi, gs, [4.0, 8.0], options=TIGHT)
    assert np.all(curve.errors == 0)


def test_locality_curve(gs, chi):
    nu = random_defect_lattice(gs.grid, chi, seed=1)
    curve = locality_error(nu, gs, [4.0, 8.0, 16.0], options=TIGHT)
    assert np.all(np.diff(curve.errors) <= 0)
    assert np.all(curve.ratios <= 0.375)


def test_superposition_curve(gs, chi):
    curve = superposition_error(ScalarField.zeros(gs.grid), gs, [2, 4], options=TIGHT)
    assert np.all(curve.errors == 0)
    curve = superposition_error(chi, gs, [4, 8, 16], options=TIGHT)
    assert np.all(curve.ratios <= 0.375)
    with pytest.raises(ValueError):
        superposition_error(chi, gs, [20], options=TIGHT)


def test_superposition_triangle_inequality(gs, chi, single):
    site = (6,)
    pair = solve_defect_scf(chi + chi.shifted(site), gs, TIGHT)
    a = field_norm(pair.V_nu - single.V_nu.shifted(site), "H2_unif")
    b = field_norm(single.V_nu, "H2_unif")
    c = field_norm(pair.V_nu - single.V_nu - single.V_nu.shifted(site), "H2_unif")
    assert abs(a - b) <= c + 1e-12


def test_thermodynamic_curve(gs, chi):
    nu = random_defect_lattice(gs.grid, chi, seed=1)
    curve = thermodynamic_limit_curve(nu, gs, [2.0, 4.0, 8.0, 16.0], options=TIGHT)
    assert np.all(np.diff(curve.errors) <= 0)
    zero = thermodynamic_limit_curve(chi, gs, [4.0, 8.0], options=TIGHT)
    assert np.all(zero.errors <= 1e-10)


def test_curves_are_reproducible(gs, chi):
    a = superposition_error(chi, gs, [4, 8], options=TIGHT)
    b = superposition_error(chi, gs, [4, 8], options=TIGHT, workers=2)
    assert np.array_equal(a.errors, b.errors)


# -- Gronwall --------------------------------------------------------------

def test_gronwall_zero_start():
    rep = gronwall_extremal_check(1.0, 1.0, 4.0, 1e6, x0=0.0)
    assert rep.bound_holds and np.all(rep.values == 0)


@given(st.floats(0.2, 3.0), st.floats(0.1, 3.0), st.floats(1.5, 6.0))
def test_gronwall_sequence_non_increasing_and_recursive(C, Cp, a):
    radii, x = gronwall_sequence(C, Cp, a, 1e6)
    assert np.all(np.diff(x) <= 0)
    for n in range(1, len(x)):
        r = radii[n]
        assert x[n] <= C / r * np.exp(-Cp * r) * x[0] + C / r * x[n - 1] + 1e-300


def test_gronwall_log_squared_beats_power_law():
    rep = gronwall_extremal_check(1.0, 1.0, 4.0, 1e6)
    assert rep.log_squared_residual < rep.power_residual
    assert rep.bound_holds


def test_gronwall_constants_across_a():
    reps = [gronwall_extremal_check(1.0, 1.0, a, 1e6) for a in (2.0, 3.0, 4.0)]
    pref = [r.prefactor for r in reps]
    assert max(pref) / min(pref) <= 2.0
    rates = [r.rate for r in reps]
    # the rate follows 1 / (2 log a)
    assert np.allclose(rates, [1 / (2 * np.log(a)) for a in (2.0, 3.0, 4.0)], rtol=1e-3)


def test_gronwall_validation():
    with pytest.raises(ValueError):
        gronwall_extremal_check(1.0, 1.0, 1.0, 100.0)
