"""Command-line runner: ``run <config>``, ``validate <config>``, ``list-experiments``.

Configs are INI files with sections ``model``, ``solver``, ``experiment``,
``output`` and ``run``.  Any key may be overridden with ``--set
section.key=value``.  Exit code 2 signals an invalid config, 3 a solver
failure; in both cases a JSON error record goes to stderr (and to
``error.json`` once the output directory is known).
"""
from __future__ import annotations

import argparse
import configparser
import csv
import json
import logging
import os
import platform
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .fields import TorusGrid, YukawaParams, write_field_binary, write_field_csv
from .spectral import SpectralError, TestFunction, write_spectrum_csv

OUTPUT_ROOT_ENV = "RHF_YUKAWA_OUTPUT_ROOT"
EXIT_VALIDATION = 2
EXIT_SOLVER = 3

log = logging.getLogger("rhf_yukawa")


class ConfigError(ValueError):
    pass


# -- schema ----------------------------------------------------------------

def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.replace(" ", "").split(",") if t]


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.replace(" ", "").split(",") if t]


def _str_list(text: str) -> list[str]:
    return [t for t in text.replace(" ", "").split(",") if t]


# (parser, default, positive?)
MODEL_KEYS = {
    "d": (int, 1, True),
    "cells": (int, 32, True),
    "points_per_cell": (int, 16, True),
    "m": (float, 1.0, True),
    "nuclear_charge": (float, 64.0, True),
    "nuclear_width": (float, 0.1, True),
    "electrons_per_cell": (int, 1, True),
    "defect_amplitude": (float, 0.2, False),
    "defect_width": (float, 0.15, True),
}
SOLVER_KEYS = {
    "tol_scf": (float, 1e-9, True),
    "mixing": (float, 0.5, True),
    "g_min": (float, 0.1, True),
    "max_iter": (int, 500, True),
    "krylov_tol": (float, 1e-10, True),
    "max_dim": (int, 4096, True),
}
OUTPUT_KEYS = {
    "directory": (str, "results", False),
    "formats": (_str_list, ["csv", "json", "bin"], False),
}
RUN_KEYS = {
    "seed": (int, 0, False),
    "workers": (int, 1, True),
}
_PHI = {
    "phi_family": (str, "gaussian", False),
    "phi_center_offset": (float, 0.0, False),
    "phi_width": (float, 2.0, True),
}

EXPERIMENTS: dict[str, tuple[str, dict]] = {
    "periodic": ("periodic ground state of the crystal", {}),
    "defect": ("single defect solved by the preconditioned fixed-point map",
               {"scale": (float, 1.0, False), "direct_check": (int, 0, False)}),
    "decay": ("shell envelope of the defect potential and density",
              {"max_radius": (int, 16, True), "quantity": (str, "V", False)}),
    "locality": ("error from truncating a non-decaying defect lattice",
                 {"truncations": (_float_list, [4.0, 8.0, 16.0], True),
                  "beta": (float, 2.0, True), "lattice_seed": (int, 1, False)}),
    "superposition": ("two-defect potential versus the sum of single-defect ones",
                      {"separations": (_int_list, [2, 4, 8, 16], True),
                       "beta": (float, 2.0, True)}),
    "thermo": ("local trace-norm distance of truncated-defect Fermi projectors",
               {"truncations": (_float_list, [2.0, 4.0, 8.0, 16.0], True),
                "lattice_seed": (int, 1, False)}),
    "ct-probe": ("resolvent kernel decay at growing distance to the spectrum",
                 {"max_radius": (int, 8, True), "factors": (_float_list, [1.0, 2.0], True)}),
    "offdiag-L": ("cell-block norms of the inverse of 1 + L",
                  {"max_separation": (int, 12, True)}),
    "dos-enum": ("exact Bernoulli average of the per-volume trace",
                 {"dos_cells": (int, 8, True), "p": (float, 0.1, False),
                  "budget": (int, 10, True), **_PHI}),
    "dos-mc": ("Monte Carlo Bernoulli average with counter-based seeding",
               {"dos_cells": (int, 8, True), "p": (float, 0.1, False),
                "samples": (int, 2000, True), **_PHI}),
    "dos-slopes": ("remainder slopes of the small-p expansion",
                   {"dos_cells": (int, 8, True),
                    "p_values": (_float_list, [0.02, 0.04, 0.08], True),
                    "cutoff": (float, 4.0, True), "budget": (int, 10, True), **_PHI}),
    "gronwall": ("extremal sequence of the Gronwall-type recursion",
                 {"C": (float, 1.0, False), "Cp": (float, 1.0, True),
                  "a": (float, 4.0, True), "R_max": (float, 1e6, True)}),
}

# columns of every CSV an experiment may emit
CSV_SCHEMA = {
    "rho_per.csv": ["i0..i{d-1}: grid index per axis", "value: density"],
    "V_per.csv": ["i0..i{d-1}: grid index per axis", "value: potential"],
    "spectrum.csv": ["index: eigenvalue rank", "eigenvalue"],
    "residuals.csv": ["iteration", "residual: step norm"],
    "decay.csv": ["radius", "shell_norm", "exponential_fit", "log_squared_fit"],
    "curve.csv": ["parameter: truncation size or separation", "error"],
    "ct_probe.csv": ["distance_factor", "radius", "shell_norm"],
    "offdiag.csv": ["separation", "block_norm", "relative_to_diagonal"],
    "dos.csv": ["p", "value", "stderr"],
    "slopes.csv": ["p", "pairing", "residual_J0", "residual_J1", "residual_J2"],
    "gronwall.csv": ["radius", "value", "bound"],
}


@dataclass
class ExperimentConfig:
    model: dict
    solver: dict
    experiment: dict
    output: dict
    run: dict

    @property
    def name(self) -> str:
        return self.experiment["name"]

    def as_dict(self) -> dict:
        def clean(d):
            return {k: (list(v) if isinstance(v, (list, tuple)) else v) for k, v in d.items()}
        return {s: clean(getattr(self, s)) for s in ("model", "solver", "experiment", "output", "run")}


def _parse_section(raw: dict, schema: dict, section: str) -> dict:
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"unknown key(s) in [{section}]: {', '.join(unknown)}")
    out = {}
    for key, (parse, default, positive) in schema.items():
        if key in raw:
            try:
                value = parse(raw[key])
            except ValueError as exc:
                raise ConfigError(f"[{section}] {key}: cannot parse {raw[key]!r}") from exc
        else:
            value = default
        values = value if isinstance(value, list) else [value]
        if positive and any(isinstance(v, (int, float)) and not v > 0 for v in values):
            raise ConfigError(f"[{section}] {key} must be positive, got {value!r}")
        out[key] = value
    return out


def load_config(path, overrides=()) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    if not Path(path).is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    raw = {s: dict(parser[s]) for s in parser.sections()}
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override must look like section.key=value: {item!r}")
        dotted, value = item.split("=", 1)
        section, key = dotted.split(".", 1)
        raw.setdefault(section.strip(), {})[key.strip()] = value.strip()
    return validate_config(raw)


def validate_config(raw: dict) -> ExperimentConfig:
    known = {"model", "solver", "experiment", "output", "run"}
    extra = sorted(set(raw) - known)
    if extra:
        raise ConfigError(f"unknown section(s): {', '.join(extra)}")
    exp_raw = dict(raw.get("experiment", {}))
    name = exp_raw.pop("name", None)
    if name not in EXPERIMENTS:
        raise ConfigError(f"experiment.name must be one of {sorted(EXPERIMENTS)}, got {name!r}")
    model = _parse_section(raw.get("model", {}), MODEL_KEYS, "model")
    solver = _parse_section(raw.get("solver", {}), SOLVER_KEYS, "solver")
    experiment = {"name": name, **_parse_section(exp_raw, EXPERIMENTS[name][1], "experiment")}
    output = _parse_section(raw.get("output", {}), OUTPUT_KEYS, "output")
    run = _parse_section(raw.get("run", {}), RUN_KEYS, "run")
    if model["d"] not in (1, 2, 3):
        raise ConfigError("model.d must be 1, 2 or 3")
    if not 0 < solver["mixing"] <= 1:
        raise ConfigError("solver.mixing must lie in (0, 1]")
    for key in ("p",):
        if key in experiment and not 0 <= experiment[key] <= 1:
            raise ConfigError("experiment.p must lie in [0, 1]")
    if "quantity" in experiment and experiment["quantity"] not in ("V", "rho"):
        raise ConfigError("experiment.quantity must be V or rho")
    if "phi_family" in experiment:
        try:
            TestFunction(experiment["phi_family"], 0.0, 1.0)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if experiment.get("max_radius", 0) > model["cells"] // 2:
        raise ConfigError("experiment.max_radius exceeds half the torus")
    bad = [f for f in output["formats"] if f not in ("csv", "json", "bin")]
    if bad:
        raise ConfigError(f"unknown output format(s): {bad}")
    return ExperimentConfig(model, solver, experiment, output, run)


def output_directory(cfg: ExperimentConfig) -> Path:
    d = Path(cfg.output["directory"])
    if d.is_absolute():
        return d
    root = os.environ.get(OUTPUT_ROOT_ENV)
    return (Path(root) if root else Path.cwd()) / d


# -- experiments -----------------------------------------------------------

class Writer:
    """Collects artifacts under one directory; refuses paths outside it."""

    def __init__(self, root: Path, formats):
        self.root = root.resolve()
        self.formats = set(formats)
        self.files: list[str] = []
        self.schema: dict[str, list[str]] = {}

    def _path(self, name: str) -> Path:
        p = (self.root / name).resolve()
        if self.root not in p.parents and p != self.root:
            raise ConfigError(f"refusing to write outside the output directory: {name}")
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def json(self, name: str, data) -> None:
        if "json" in self.formats:
            self._path(name).write_text(json.dumps(data, indent=2, sort_keys=True))
            self.files.append(name)

    def csv(self, name: str, header, rows) -> None:
        if "csv" in self.formats:
            with open(self._path(name), "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(header)
                for row in rows:
                    w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                                for v in row])
            self.files.append(name)
            self.schema[name] = CSV_SCHEMA.get(name, list(header))

    def field(self, stem: str, f, m: float) -> None:
        if "bin" in self.formats:
            write_field_binary(self._path(stem + ".bin"), f, m)
            self.files.append(stem + ".bin")
        if "csv" in self.formats:
            write_field_csv(self._path(stem + ".csv"), f)
            self.files.append(stem + ".csv")
            self.schema[stem + ".csv"] = CSV_SCHEMA.get(stem + ".csv",
                                                        ["i0..i{d-1}", "value"])


def _crystal(cfg: ExperimentConfig, cells: int | None = None):
    from .scf import CrystalSpec

    m = cfg.model
    grid = TorusGrid(m["d"], cells or m["cells"], m["points_per_cell"])
    return CrystalSpec(grid, YukawaParams(m["m"], m["d"]), m["nuclear_charge"],
                       m["nuclear_width"], m["electrons_per_cell"])


def _options(cfg: ExperimentConfig):
    from .scf import SolverOptions

    s = cfg.solver
    return SolverOptions(tol_scf=s["tol_scf"], mixing=s["mixing"], g_min=s["g_min"],
                         max_iter=s["max_iter"], krylov_tol=s["krylov_tol"],
                         max_dim=s["max_dim"])


def _ground_state(cfg: ExperimentConfig, cells: int | None = None):
    from .scf import solve_periodic

    return solve_periodic(_crystal(cfg, cells), _options(cfg))


def _chi(cfg: ExperimentConfig, grid):
    from .scf import defect_shape

    return defect_shape(grid, cfg.model["defect_amplitude"], cfg.model["defect_width"])


def _phi(cfg: ExperimentConfig, gs) -> TestFunction:
    e = cfg.experiment
    return TestFunction(e["phi_family"], gs.fermi_level + e["phi_center_offset"], e["phi_width"])


def _gs_summary(gs) -> dict:
    return {"fermi_level": gs.fermi_level, "gap": gs.gap, "band_gap": gs.band_gap,
            "iterations": len(gs.residuals), "final_residual": gs.residuals[-1]}


def exp_periodic(cfg, out: Writer) -> dict:
    gs = _ground_state(cfg)
    m = cfg.model["m"]
    out.field("rho_per", gs.rho_per, m)
    out.field("V_per", gs.V_per, m)
    if "csv" in out.formats:
        write_spectrum_csv(out._path("spectrum.csv"), gs.spectrum)
        out.files.append("spectrum.csv")
        out.schema["spectrum.csv"] = CSV_SCHEMA["spectrum.csv"]
    out.csv("residuals.csv", ["iteration", "residual"], enumerate(gs.residuals))
    summary = _gs_summary(gs)
    out.json("summary.json", summary)
    return summary


def exp_defect(cfg, out: Writer) -> dict:
    from .scf import solve_defect_direct, solve_defect_scf, write_defect_solution

    gs = _ground_state(cfg)
    nu = _chi(cfg, gs.grid) * cfg.experiment["scale"]
    sol = solve_defect_scf(nu, gs)
    summary = {"iterations": sol.iterations, "contraction_estimate": sol.contraction_estimate,
               "response_ratio": sol.response_ratio,
               "consistency_residual": sol.consistency_residual, "gap": sol.gap,
               "ground_state": _gs_summary(gs)}
    if cfg.experiment["direct_check"]:
        direct = solve_defect_direct(nu, gs)
        summary["direct_difference"] = float(np.max(np.abs(direct.V_nu.values - sol.V_nu.values)))
    if "bin" in out.formats:
        for f in write_defect_solution(out._path("defect"), sol, gs):
            out.files.append(f"defect/{f}")
    out.csv("residuals.csv", ["iteration", "residual"], enumerate(sol.residuals, 1))
    out.json("summary.json", summary)
    return summary


def exp_decay(cfg, out: Writer) -> dict:
    from .analysis import decay_profile
    from .scf import solve_defect_scf

    gs = _ground_state(cfg)
    sol = solve_defect_scf(_chi(cfg, gs.grid), gs)
    radii = np.arange(1, cfg.experiment["max_radius"] + 1)
    prof = decay_profile(sol, radii, cfg.experiment["quantity"])
    exp_fit, log_fit = prof.fits["exponential"], prof.fits["log_squared"]
    out.csv("decay.csv", CSV_SCHEMA["decay.csv"],
            zip(radii, prof.shell_norms, exp_fit.predict(radii), log_fit.predict(radii)))
    summary = {"exponents": prof.exponents.tolist(),
               "fits": {k: vars(v) for k, v in prof.fits.items()}}
    out.json("summary.json", summary)
    return summary


def _curve(out: Writer, curve) -> dict:
    out.csv("curve.csv", CSV_SCHEMA["curve.csv"], zip(curve.parameters, curve.errors))
    summary = {"parameters": curve.parameters.tolist(), "errors": curve.errors.tolist(),
               "ratios": curve.ratios.tolist(), "power_exponent": curve.power_exponent}
    out.json("summary.json", summary)
    return summary


def exp_locality(cfg, out: Writer) -> dict:
    from .analysis import locality_error, random_defect_lattice

    gs = _ground_state(cfg)
    nu = random_defect_lattice(gs.grid, _chi(cfg, gs.grid), cfg.experiment["lattice_seed"])
    e = cfg.experiment
    return _curve(out, locality_error(nu, gs, e["truncations"], e["beta"],
                                      workers=cfg.run["workers"]))


def exp_superposition(cfg, out: Writer) -> dict:
    from .analysis import superposition_error

    gs = _ground_state(cfg)
    e = cfg.experiment
    return _curve(out, superposition_error(_chi(cfg, gs.grid), gs, e["separations"], e["beta"],
                                           workers=cfg.run["workers"]))


def exp_thermo(cfg, out: Writer) -> dict:
    from .analysis import random_defect_lattice, thermodynamic_limit_curve

    gs = _ground_state(cfg)
    nu = random_defect_lattice(gs.grid, _chi(cfg, gs.grid), cfg.experiment["lattice_seed"])
    return _curve(out, thermodynamic_limit_curve(nu, gs, cfg.experiment["truncations"],
                                                 workers=cfg.run["workers"]))


def exp_ct_probe(cfg, out: Writer) -> dict:
    from .analysis import combes_thomas_probe

    gs = _ground_state(cfg)
    radii = np.arange(1, cfg.experiment["max_radius"] + 1)
    probes = combes_thomas_probe(gs, radii, cfg.experiment["factors"])
    rows = [(f, r, v) for f, p in zip(cfg.experiment["factors"], probes)
            for r, v in zip(p.radii, p.shell_norms)]
    out.csv("ct_probe.csv", CSV_SCHEMA["ct_probe.csv"], rows)
    summary = {"probes": [{"distance": p.distance_to_spectrum, "c1": p.c1, "c2": p.c2,
                           "rate": p.rate, "r_squared": p.r_squared} for p in probes]}
    out.json("summary.json", summary)
    return summary


def exp_offdiag(cfg, out: Writer) -> dict:
    from .scf import one_plus_L_offdiagonal_profile

    gs = _ground_state(cfg)
    seps = np.arange(0, cfg.experiment["max_separation"] + 1)
    prof = one_plus_L_offdiagonal_profile(gs, seps)
    rel = prof.block_norms / prof.diagonal_norm
    out.csv("offdiag.csv", CSV_SCHEMA["offdiag.csv"], zip(seps, prof.block_norms, rel))
    summary = {"separations": seps.tolist(), "relative": rel.tolist()}
    out.json("summary.json", summary)
    return summary


def _dos_cache(cfg):
    from .dos import ConfigurationSpectra

    gs = _ground_state(cfg, cfg.experiment["dos_cells"])
    return gs, ConfigurationSpectra(gs, _chi(cfg, gs.grid))


def exp_dos_enum(cfg, out: Writer) -> dict:
    from .dos import dos_exact_enumeration

    gs, cache = _dos_cache(cfg)
    e = cfg.experiment
    res = dos_exact_enumeration(e["p"], _phi(cfg, gs), cache, e["budget"],
                                workers=cfg.run["workers"])
    out.csv("dos.csv", CSV_SCHEMA["dos.csv"], [(e["p"], res.value, res.stderr)])
    summary = {"value": res.value, "stderr": res.stderr, "provenance": res.provenance,
               **res.diagnostics}
    out.json("summary.json", summary)
    return summary


def exp_dos_mc(cfg, out: Writer) -> dict:
    from .dos import EnsembleSpec, dos_monte_carlo

    gs, cache = _dos_cache(cfg)
    e = cfg.experiment
    spec = EnsembleSpec(e["p"], cfg.run["seed"], e["samples"], gs.grid)
    res = dos_monte_carlo(spec, _phi(cfg, gs), cache, workers=cfg.run["workers"])
    out.csv("dos.csv", CSV_SCHEMA["dos.csv"], [(e["p"], res.value, res.stderr)])
    summary = {"value": res.value, "stderr": res.stderr, "provenance": res.provenance,
               **res.diagnostics}
    out.json("summary.json", summary)
    return summary


def exp_dos_slopes(cfg, out: Writer) -> dict:
    from .dos import dos_exact_enumeration, expansion_residual_slopes

    gs, cache = _dos_cache(cfg)
    e = cfg.experiment
    phi = _phi(cfg, gs)
    rep = expansion_residual_slopes(e["p_values"], phi, cache, e["cutoff"],
                                    budget=e["budget"], workers=cfg.run["workers"])
    rows = [(p, dos_exact_enumeration(p, phi, cache, e["budget"]).value,
             rep.residuals[0][i], rep.residuals[1][i], rep.residuals[2][i])
            for i, p in enumerate(rep.p_values)]
    out.csv("slopes.csv", CSV_SCHEMA["slopes.csv"], rows)
    summary = rep.summary()
    out.json("summary.json", summary)
    return summary


def exp_gronwall(cfg, out: Writer) -> dict:
    from .analysis import gronwall_extremal_check

    e = cfg.experiment
    rep = gronwall_extremal_check(e["C"], e["Cp"], e["a"], e["R_max"])
    with np.errstate(divide="ignore"):
        bound = rep.prefactor * np.exp(-rep.rate * np.log(rep.radii) ** 2)
    out.csv("gronwall.csv", CSV_SCHEMA["gronwall.csv"], zip(rep.radii, rep.values, bound))
    summary = rep.summary()
    out.json("summary.json", summary)
    return summary


RUNNERS = {
    "periodic": exp_periodic, "defect": exp_defect, "decay": exp_decay,
    "locality": exp_locality, "superposition": exp_superposition, "thermo": exp_thermo,
    "ct-probe": exp_ct_probe, "offdiag-L": exp_offdiag, "dos-enum": exp_dos_enum,
    "dos-mc": exp_dos_mc, "dos-slopes": exp_dos_slopes, "gronwall": exp_gronwall,
}


def _error_kind(exc: Exception) -> str:
    from .dos import EnumerationBudgetError
    from .scf import NotInsulatorError, NuTooLargeError

    if isinstance(exc, NuTooLargeError):
        return "nu too large"
    if isinstance(exc, NotInsulatorError):
        return "not an insulator"
    if isinstance(exc, EnumerationBudgetError):
        return "enumeration budget exceeded"
    return type(exc).__name__


def run_experiment(cfg: ExperimentConfig) -> int:
    """Run one experiment; returns the process exit status."""
    from .dos import EnumerationBudgetError
    from .scf import SCFError

    outdir = output_directory(cfg)
    outdir.mkdir(parents=True, exist_ok=True)
    writer = Writer(outdir, cfg.output["formats"])
    start = time.perf_counter()
    log.info("running %s into %s", cfg.name, outdir)
    status, record = 0, None
    try:
        summary = RUNNERS[cfg.name](cfg, writer)
    except (SCFError, SpectralError, EnumerationBudgetError) as exc:
        status = EXIT_SOLVER
        record = {"status": "error", "exit_code": status, "kind": _error_kind(exc),
                  "message": str(exc)}
        summary = None
    elapsed = time.perf_counter() - start
    log.info("%s finished in %.2fs with status %d", cfg.name, elapsed, status)
    (outdir / "schema.json").write_text(json.dumps(writer.schema, indent=2, sort_keys=True))
    manifest = {
        "experiment": cfg.name,
        "config": cfg.as_dict(),
        "seed": cfg.run["seed"],
        "versions": {"rhf_yukawa": __version__, "python": platform.python_version(),
                     "numpy": np.__version__, "scipy": scipy.__version__},
        "timings": {"total_seconds": elapsed},
        "files": writer.files + ["schema.json"],
        "status": "ok" if status == 0 else "error",
    }
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    if record is not None:
        (outdir / "error.json").write_text(json.dumps(record, indent=2))
        print(json.dumps(record), file=sys.stderr)
    else:
        print(json.dumps({"status": "ok", "experiment": cfg.name, "directory": str(outdir),
                          "summary_keys": sorted(summary)}))
    return status


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="rhf-yukawa", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("run", "validate"):
        p = sub.add_parser(name)
        p.add_argument("config")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="SECTION.KEY=VALUE")
    sub.add_parser("list-experiments")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "list-experiments":
        for name, (desc, _) in EXPERIMENTS.items():
            print(f"{name:14s} {desc}")
        return 0
    try:
        cfg = load_config(args.config, args.overrides)
    except ConfigError as exc:
        print(json.dumps({"status": "error", "exit_code": EXIT_VALIDATION,
                          "kind": "validation", "message": str(exc)}), file=sys.stderr)
        return EXIT_VALIDATION
    if args.command == "validate":
        print(json.dumps(cfg.as_dict(), indent=2, sort_keys=True))
        return 0
    return run_experiment(cfg)


if __name__ == "__main__":
    sys.exit(main())
