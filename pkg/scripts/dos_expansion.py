"""Small-p expansion of the Bernoulli density of states on a short chain.

Compares the exact enumeration average with its first- and second-order
expansions and with Monte Carlo estimates.

    python3 scripts/dos_expansion.py [--cells 8] [--width 2.0] [--samples 2000]
"""
import argparse

import numpy as np

from rhf_yukawa.dos import (
    ConfigurationSpectra,
    EnsembleSpec,
    dos_exact_enumeration,
    dos_monte_carlo,
    expansion_residual_slopes,
    richardson_first_order,
)
from rhf_yukawa.fields import TorusGrid, YukawaParams
from rhf_yukawa.scf import CrystalSpec, SolverOptions, defect_shape, solve_periodic
from rhf_yukawa.spectral import TestFunction


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cells", type=int, default=8)
    ap.add_argument("--width", type=float, default=2.0)
    ap.add_argument("--samples", type=int, default=2000)
    ap.add_argument("--workers", type=int, default=4)
    args = ap.parse_args()

    grid = TorusGrid(1, args.cells, 16)
    opts = SolverOptions(tol_scf=1e-12, krylov_tol=1e-13)
    gs = solve_periodic(CrystalSpec(grid, YukawaParams(1.0, 1), 64.0, 0.1, 1), opts)
    cache = ConfigurationSpectra(gs, defect_shape(grid), opts)
    phi = TestFunction("gaussian", gs.fermi_level, args.width)

    rep = expansion_residual_slopes([0.02, 0.04, 0.08], phi, cache, args.cells / 2,
                                    workers=args.workers)
    print(f"mu1 {rep.mu[1]:.6e}  mu2 {rep.mu[2]:.6e}  outer shell {rep.tail:.2e}")
    est, err = richardson_first_order(phi, cache)
    print(f"Richardson slope at p=0: {est:.6e} (+- {err:.1e})")
    print("    p     exact        J=0 res    J=1 res    J=2 res    MC")
    for i, p in enumerate([0.02, 0.04, 0.08, 0.1, 0.2]):
        exact = dos_exact_enumeration(p, phi, cache).value
        mc = dos_monte_carlo(EnsembleSpec(p, 0, args.samples, grid), phi, cache, args.workers)
        model = [rep.baseline + sum(rep.mu[j] * p**j for j in range(1, J + 1)) for J in (0, 1, 2)]
        res = "  ".join(f"{abs(exact - m):.2e}" for m in model)
        print(f"  {p:5.2f}  {exact:.6f}  {res}  {mc.value:.6f}+-{mc.stderr:.1e}")
    print("slopes", {J: np.round(s, 3).tolist() for J, s in rep.slopes.items()})
    print(f"{cache.solves} translation classes solved")


if __name__ == "__main__":
    main()
