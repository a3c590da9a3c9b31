import json
from pathlib import Path

import pytest

from rhf_yukawa.cli import CSV_SCHEMA, EXPERIMENTS, OUTPUT_ROOT_ENV, load_config, main

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "default.ini"
SMALL = ["--set", "model.cells=8", "--set", "model.points_per_cell=8"]


def run(tmp_path, *args):
    return main(["run", str(CONFIG), "--set", f"output.directory={tmp_path}", *args])


def test_list_experiments(capsys):
    assert main(["list-experiments"]) == 0
    out = capsys.readouterr().out
    for name in EXPERIMENTS:
        assert name in out


def test_validate_default_config(capsys):
    assert main(["validate", str(CONFIG)]) == 0
    cfg = json.loads(capsys.readouterr().out)
    assert cfg["model"]["cells"] == 32 and cfg["experiment"]["name"] == "periodic"


@pytest.mark.parametrize("override", [
    "model.colour=red", "nonsense.key=1", "model.cells=-4", "model.m=abc",
    "experiment.name=unknown", "output.formats=xml",
])
def test_invalid_config_exits_2(override, capsys):
    assert main(["validate", str(CONFIG), "--set", override]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["kind"] == "validation"


def test_experiment_specific_keys_are_checked():
    with pytest.raises(ValueError, match="unknown"):
        load_config(CONFIG, ["experiment.samples=10"])


def test_oversized_defect_exits_3(tmp_path, capsys):
    code = run(tmp_path, "--set", "experiment.name=defect", "--set", "model.defect_amplitude=2.0")
    assert code == 3
    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record["kind"] == "nu too large"
    assert json.loads((tmp_path / "error.json").read_text())["exit_code"] == 3
    assert json.loads((tmp_path / "manifest.json").read_text())["status"] == "error"


def test_enumeration_budget_exits_3(tmp_path, capsys):
    code = run(tmp_path, "--set", "experiment.name=dos-enum", "--set", "experiment.dos_cells=12",
               "--set", "model.points_per_cell=8")
    assert code == 3
    assert json.loads(capsys.readouterr().err)["kind"] == "enumeration budget exceeded"


def test_periodic_rerun_is_bit_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(a, *SMALL) == 0
    assert run(b, *SMALL) == 0
    manifest = json.loads((a / "manifest.json").read_text())
    assert {"config", "seed", "versions", "timings", "files", "status"} <= set(manifest)
    for name in manifest["files"]:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_outputs_stay_inside_directory(tmp_path):
    out = tmp_path / "out"
    assert run(out, *SMALL) == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["out"]
    manifest = json.loads((out / "manifest.json").read_text())
    assert sorted(manifest["files"]) == sorted(p.name for p in out.iterdir() if p.name != "manifest.json")
    schema = json.loads((out / "schema.json").read_text())
    assert schema["rho_per.csv"] == CSV_SCHEMA["rho_per.csv"]


def test_output_root_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ROOT_ENV, str(tmp_path))
    code = main(["run", str(CONFIG), "--set", "output.directory=rel/run", *SMALL])
    assert code == 0
    assert (tmp_path / "rel" / "run" / "manifest.json").exists()


def test_dos_slopes_summary(tmp_path):
    code = run(tmp_path, "--set", "experiment.name=dos-slopes", "--set", "model.points_per_cell=8")
    assert code == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert set(summary["slopes"]) == {"0", "1", "2"}
    assert (tmp_path / "slopes.csv").read_text().splitlines()[0].startswith("p,")


def test_gronwall_experiment(tmp_path):
    assert run(tmp_path, "--set", "experiment.name=gronwall") == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["bound_holds"]
