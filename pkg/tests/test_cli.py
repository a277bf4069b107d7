import json

import pytest

from ergolab.cli import EXIT_CONFIG, EXIT_GUARD, EXIT_OK, ExperimentConfig, main


def run(tmp_path, command, config, *extra):
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps(config))
    out = tmp_path / "out"
    return main([command, "--config", str(cfg), "--out", str(out), *extra]), out


def test_identity_roth_csv(tmp_path):
    code, out = run(tmp_path, "simulate", {"operation": "roth_average", "system": {"kind": "identity"},
                                           "set": [["0", "1/3"]], "schedule": [1, 10, 100]})
    assert code == EXIT_OK
    rows = (out / "series.csv").read_text().splitlines()
    assert rows[1:] == ["1,0.3333333333333333,1,3", "10,0.3333333333333333,1,3", "100,0.3333333333333333,1,3"]
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["operation"] == "roth_average"
    assert manifest["stages"][0]["stage"] == "roth_average"
    assert "version" in manifest


def test_certificate_json(tmp_path):
    code, out = run(tmp_path, "certify", {"operation": "positivity_certificate",
                                          "system": {"kind": "rotation", "alpha": "golden"},
                                          "set": [["0", "1/4"]], "params": {"epsilon": "1/20"}})
    assert code == EXIT_OK
    cert = json.loads((out / "certificate.json").read_text())
    assert cert["L"] == 987 and cert["lower_bound"] == [1, 9870]


def test_bad_interval_names_field(tmp_path):
    code, out = run(tmp_path, "simulate", {"operation": "roth_average", "system": {"kind": "identity"},
                                           "set": [["0", "1/4"], ["1/2", "1/3"]]})
    assert code == EXIT_CONFIG
    record = json.loads((out / "error.json").read_text())
    assert record["field"] == "set[1]"
    assert record["error"] == "config"


def test_unknown_field_and_wrong_command(tmp_path):
    code, out = run(tmp_path, "simulate", {"operation": "roth_average", "sytem": {}})
    assert code == EXIT_CONFIG
    assert json.loads((out / "error.json").read_text())["field"] == "sytem"
    code, out = run(tmp_path, "aps", {"operation": "roth_average"})
    assert code == EXIT_CONFIG
    assert json.loads((out / "error.json").read_text())["field"] == "operation"


def test_horizon_guard_exit(tmp_path):
    code, out = run(tmp_path, "simulate", {"operation": "roth_average", "system": {"kind": "chacon", "stage": 2},
                                           "set": [["0", "1/2"]], "schedule": [5, 50]})
    assert code == EXIT_GUARD
    assert json.loads((out / "error.json").read_text())["type"] == "HorizonError"


def test_deterministic_aps_with_seed(tmp_path):
    config = {"operation": "cyclic_roth_average", "params": {"modulus": 150, "density": 0.4}}
    code, out = run(tmp_path, "aps", config, "--seed", "11")
    first = (out / "counts.csv").read_bytes()
    code2, out = run(tmp_path, "aps", config, "--seed", "11")
    assert code == code2 == EXIT_OK
    assert (out / "counts.csv").read_bytes() == first
    assert json.loads((out / "summary.json").read_text())["identity_holds"]


@pytest.mark.parametrize("command,config,artifact", [
    ("simulate", {"operation": "l2_multicorrelation_defect", "system": {"kind": "cat"},
                  "observables": [{"kind": "cosine", "mode": [1, 0]}, {"kind": "cosine", "mode": [0, 1]}],
                  "schedule": {"dyadic": [3, 6]}}, "series.plot"),
    ("simulate", {"operation": "scalar_multicorrelation", "system": {"kind": "chacon", "stage": 6},
                  "observables": [{"kind": "levels", "stage": 2, "terminal": 6, "weights": {"0": 1, "1": -1}}] * 3,
                  "schedule": [10, 100]}, "series.csv"),
    ("certify", {"operation": "syndetic_return_bound", "params": {"alpha": "5/13", "delta": "1/7"}},
     "return_bound.json"),
    ("spectrum", {"operation": "kronecker_projector", "system": {"kind": "rotation", "alpha": "1/4"},
                  "params": {"cutoff": 3}}, "eigenvalues.csv"),
    ("spectrum", {"operation": "weak_mixing_defect", "system": {"kind": "cat"},
                  "observables": [{"kind": "cosine", "mode": [1, 0]}] * 2, "schedule": [64]}, "series.csv"),
    ("joinings", {"operation": "empirical_joining_6", "system": {"kind": "cat"},
                  "observables": [{"kind": "cosine", "mode": [1, 0]}] * 6, "params": {"N": 32}}, "joining.json"),
    ("joinings", {"operation": "invariance_defect", "system": {"kind": "rotation", "alpha": "2/9"},
                  "observables": [{"kind": "character", "mode": [1]}] * 3,
                  "params": {"N": 20, "pattern": "J"}}, "defect.json"),
    ("aps", {"operation": "count_3aps", "density_set": "0111010111"}, "counts.csv"),
])
def test_every_command_writes_artifacts(tmp_path, command, config, artifact):
    code, out = run(tmp_path, command, config)
    assert code == EXIT_OK
    assert (out / artifact).exists()
    assert (out / "manifest.json").exists()


def test_config_round_trip():
    cfg = ExperimentConfig.from_dict({"operation": "roth_average", "system": {"kind": "identity"},
                                      "set": [["0", "1/2"]], "schedule": {"dyadic": [2, 4]}, "seed": 5})
    assert ExperimentConfig.loads(cfg.dumps()) == cfg


def test_verify_correspondence(tmp_path, capsys):
    assert main(["verify", "correspondence", "--out", str(tmp_path)]) == EXIT_OK
    assert "PASS" in capsys.readouterr().out
    assert json.loads((tmp_path / "verify.json").read_text())["passed"]
