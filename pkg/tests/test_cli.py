from __future__ import annotations
import json

import pandas as pd
import pytest

import main
from conftest import encounter, event
from Services.dataset import Vital, write_encounters_csv, write_events_csv


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """Pipeline synth -> prep compartido por los tests de train/eval/timeline."""
    out = tmp_path_factory.mktemp("run")
    assert main.main(["synth", "--n", "400", "--prevalence", "0.3", "--seed", "3", "--out", str(out)]) == 0
    assert main.main(["prep", "--seed", "3", "--out", str(out)]) == 0
    return out


# ------------------------------------------------------
#   synth
# ------------------------------------------------------

def test_synth_writes_identical_files_for_same_seed(tmp_path):
    for name in ("a", "b"):
        code = main.main(["synth", "--n", "60", "--prevalence", "0.1", "--seed", "7", "--out", str(tmp_path / name)])
        assert code == 0
    for filename in ("events.csv", "encounters.csv"):
        assert (tmp_path / "a" / filename).read_bytes() == (tmp_path / "b" / filename).read_bytes()

    encounters = pd.read_csv(tmp_path / "a" / "encounters.csv")
    assert len(encounters) == 60
    assert encounters["transferred"].sum() == 6


def test_synth_rejects_invalid_prevalence(tmp_path, capsys):
    code = main.main(["synth", "--prevalence", "1.5", "--out", str(tmp_path)])
    assert code == 1
    assert "transfer_prevalence" in capsys.readouterr().err


def test_synth_config_file_and_shift(tmp_path):
    config = tmp_path / "synth.json"
    config.write_text(json.dumps({"n_encounters": 30, "measurement_rate": 1.0}))
    code = main.main([
        "synth", "--config", str(config), "--prevalence", "0.2",
        "--facility-shift", "HR=0.5", "--no-signal", "--out", str(tmp_path / "out"),
    ])
    assert code == 0
    assert len(pd.read_csv(tmp_path / "out" / "encounters.csv")) == 30

    assert main.main(["synth", "--facility-shift", "XX=1", "--out", str(tmp_path / "bad")]) == 1


def test_global_flags_before_or_after_subcommand(tmp_path):
    before = ["--seed", "4", "--out", str(tmp_path / "before"), "synth", "--n", "30", "--prevalence", "0.2"]
    after = ["synth", "--n", "30", "--prevalence", "0.2", "--seed", "4", "--out", str(tmp_path / "after")]
    assert main.main(before) == 0
    assert main.main(after) == 0
    for filename in ("events.csv", "encounters.csv"):
        assert (tmp_path / "before" / filename).read_bytes() == (tmp_path / "after" / filename).read_bytes()

    # el valor tras el subcomando tiene prioridad
    both = ["--seed", "99", "synth", "--n", "30", "--prevalence", "0.2", "--seed", "4", "--out", str(tmp_path / "both")]
    assert main.main(both) == 0
    assert (tmp_path / "both" / "events.csv").read_bytes() == (tmp_path / "after" / "events.csv").read_bytes()


def test_usage_errors_exit_with_one(tmp_path):
    assert main.main(["nonexistent"]) == 1
    assert main.main(["train", "--out", str(tmp_path)]) == 1
    assert main.main([]) == 1


# ------------------------------------------------------
#   prep
# ------------------------------------------------------

def _write_small_site(out):
    encounters = [
        encounter(f"T{i}", patient_id=f"PT{i}", transfer_hours=20, events=(
            event(f"T{i}", 15, Vital.HR, 150, patient_id=f"PT{i}"),
            event(f"T{i}", 16, Vital.SBP, 80, patient_id=f"PT{i}"),
        ))
        for i in range(3)
    ] + [
        encounter(f"N{i}", patient_id=f"PN{i}", events=(event(f"N{i}", 2, Vital.HR, 95, patient_id=f"PN{i}"),))
        for i in range(4)
    ]
    out.mkdir(parents=True, exist_ok=True)
    write_events_csv(encounters, out / "events.csv")
    write_encounters_csv(encounters, out / "encounters.csv")


def test_prep_balances_and_leaves_missing_cells_empty(tmp_path):
    _write_small_site(tmp_path)
    assert main.main(["prep", "--out", str(tmp_path), "--test-fraction", "0.34"]) == 0

    snapshots = pd.read_csv(tmp_path / "snapshots.csv", keep_default_na=False, dtype=str)
    assert len(snapshots) == 6
    assert (snapshots["label"] == "1").sum() == 3
    assert (snapshots["o2"] == "").all()
    assert (snapshots["dbp"] == "").all()

    train = pd.read_csv(tmp_path / "train.csv")
    test = pd.read_csv(tmp_path / "test.csv")
    assert len(train) + len(test) == 6
    assert not set(train["patient_id"]) & set(test["patient_id"])


def test_prep_holdout(tmp_path):
    _write_small_site(tmp_path)
    assert main.main(["prep", "--out", str(tmp_path), "--holdout"]) == 0
    assert len(pd.read_csv(tmp_path / "holdout.csv")) == 6
    assert not (tmp_path / "train.csv").exists()


def test_prep_cites_line_of_bad_timestamp(tmp_path, capsys):
    _write_small_site(tmp_path)
    lines = (tmp_path / "events.csv").read_text().splitlines()
    fields = lines[3].split(",")
    fields[2] = "2020-13-45T99:00:00Z"
    lines[3] = ",".join(fields)
    (tmp_path / "events.csv").write_text("\n".join(lines) + "\n")

    assert main.main(["prep", "--out", str(tmp_path)]) == 2
    assert "línea 4" in capsys.readouterr().err


def test_prep_without_inputs_is_a_data_error(tmp_path):
    assert main.main(["prep", "--out", str(tmp_path / "empty")]) == 2


# ------------------------------------------------------
#   train / eval
# ------------------------------------------------------

@pytest.mark.parametrize(
    "kind,extra",
    [
        ("ada", ["--rounds", "15"]),
        ("gbt", ["--trees", "6"]),
        ("ensemble", ["--rounds", "15", "--trees", "6", "--tune-threshold"]),
        ("pews", []),
    ],
)
def test_train_and_eval(workdir, kind, extra, capsys):
    assert main.main(["train", "--model", kind, "--out", str(workdir), *extra]) == 0
    model_file = workdir / f"model_{kind}.json"
    assert json.loads(model_file.read_text())["kind"] == kind

    report_path = workdir / f"report_{kind}.json"
    roc_path = workdir / f"roc_{kind}.csv"
    code = main.main([
        "eval", "--model-file", str(model_file), "--out", str(workdir),
        "--report", str(report_path), "--roc", str(roc_path),
    ])
    assert code == 0
    report = json.loads(report_path.read_text())
    assert {"tp", "fp", "tn", "fn", "accuracy", "sensitivity", "specificity", "auroc"} <= set(report)
    assert 0.0 <= report["auroc"] <= 1.0
    roc = pd.read_csv(roc_path)
    assert (roc.iloc[0]["fpr"], roc.iloc[0]["tpr"]) == (0.0, 0.0)
    assert (roc.iloc[-1]["fpr"], roc.iloc[-1]["tpr"]) == (1.0, 1.0)
    assert "AUROC=" in capsys.readouterr().out


def test_train_with_cv_and_search(workdir, tmp_path, capsys):
    model_file = tmp_path / "gbt.json"
    code = main.main([
        "train", "--model", "gbt", "--out", str(workdir), "--model-file", str(model_file),
        "--trees", "4", "--search", "trials=2", "--cv", "--folds", "3",
    ])
    assert code == 0
    assert "AUROC medio" in capsys.readouterr().out
    assert json.loads(model_file.read_text())["params"]["num_trees"] == 4


def test_train_option_errors(workdir):
    assert main.main(["train", "--model", "ada", "--tune-threshold", "--out", str(workdir)]) == 1
    assert main.main(["train", "--model", "gbt", "--search", "depth=3", "--out", str(workdir)]) == 1
    assert main.main(["train", "--model", "gbt", "--learning-rate", "2", "--out", str(workdir)]) == 1


def test_train_ada_with_zero_rounds(workdir, tmp_path):
    model_file = tmp_path / "ada0.json"
    code = main.main(["train", "--model", "ada", "--rounds", "0", "--out", str(workdir), "--model-file", str(model_file)])
    assert code == 0
    saved = json.loads(model_file.read_text())
    assert saved["rounds"] == 0
    assert saved["stumps"] == []


def test_eval_missing_model_file(workdir, tmp_path):
    assert main.main(["eval", "--model-file", str(tmp_path / "nope.json"), "--out", str(workdir)]) == 2


# ------------------------------------------------------
#   timeline
# ------------------------------------------------------

def test_timeline(workdir, tmp_path):
    assert main.main(["train", "--model", "ada", "--rounds", "10", "--out", str(workdir),
                      "--model-file", str(tmp_path / "ada.json")]) == 0
    encounters = pd.read_csv(workdir / "encounters.csv")
    transferred = encounters.loc[encounters["transferred"], "encounter_id"].iloc[0]

    out = tmp_path / "timeline.csv"
    code = main.main([
        "timeline", "--model-file", str(tmp_path / "ada.json"), "--out", str(workdir),
        "--encounter-id", transferred, "--timeline", str(out),
    ])
    assert code == 0
    rows = pd.read_csv(out)
    assert list(rows.columns) == ["encounter_id", "patient_id", "time", "vital", "value", "score"]
    assert set(rows["encounter_id"]) <= {transferred}
    assert rows["score"].between(0, 1).all()

    code = main.main([
        "timeline", "--model-file", str(tmp_path / "ada.json"), "--out", str(workdir),
        "--encounter-id", "missing-id", "--timeline", str(out),
    ])
    assert code == 0
    assert pd.read_csv(out).empty
