"""Shell envelopes of a single defect's potential and density on a long chain.

Prints local power-law exponents over radius doublings and the exponential
and log-squared fits, for a few defect amplitudes.

    python3 scripts/decay_study.py [--cells 64] [--amplitudes 0.1,0.2,0.4]
"""
import argparse

import numpy as np

from rhf_yukawa.analysis import decay_profile, local_exponents
from rhf_yukawa.fields import TorusGrid, YukawaParams
from rhf_yukawa.scf import CrystalSpec, SolverOptions, defect_shape, solve_defect_scf, solve_periodic


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cells", type=int, default=64)
    ap.add_argument("--points", type=int, default=16)
    ap.add_argument("--m", type=float, default=1.0)
    ap.add_argument("--amplitudes", default="0.1,0.2,0.4")
    args = ap.parse_args()

    grid = TorusGrid(1, args.cells, args.points)
    opts = SolverOptions(tol_scf=1e-12, krylov_tol=1e-13)
    gs = solve_periodic(CrystalSpec(grid, YukawaParams(args.m, 1), 64.0, 0.1, 1), opts)
    print(f"gap {gs.gap:.4f}  band gap {gs.band_gap:.4f}  Fermi level {gs.fermi_level:.4f}")
    radii = np.arange(1, args.cells // 2 - 7)
    doublings = [r for r in (2, 4, 8, 16) if r <= radii[-1]]
    for amp in (float(a) for a in args.amplitudes.split(",")):
        sol = solve_defect_scf(defect_shape(grid, amp), gs, opts)
        for q in ("V", "rho"):
            prof = decay_profile(sol, radii, q)
            p = local_exponents(doublings, prof.shell_norms[np.array(doublings) - 1])
            fits = "  ".join(f"{k} rate {f.rate:.3f} R2 {f.r_squared:.6f}"
                             for k, f in prof.fits.items() if k != "power")
            print(f"amp {amp:<5g} {q:3s} exponents {np.round(p, 2).tolist()}  {fits}")


if __name__ == "__main__":
    main()
