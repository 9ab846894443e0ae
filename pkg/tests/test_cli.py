import json

import numpy as np
import pytest

from entlock.cli import main
from entlock.experiments import (
    REGISTRY,
    ReportRow,
    list_experiments,
    run_experiment,
)


class TestRegistry:
    def test_twelve_experiments(self):
        assert len(REGISTRY) == 12

    def test_listing_has_summaries(self):
        listing = list_experiments()
        assert len(listing) == 12
        for name, summary in listing:
            assert name in REGISTRY
            assert summary

    def test_unknown_experiment_raises(self):
        with pytest.raises(KeyError, match="unknown experiment"):
            run_experiment("nope")

    def test_every_row_with_reference_has_finite_error(self):
        report = run_experiment("hiding-norm", {"d": 2, "l": 2}, seed=1)
        for row in report.rows:
            if row.reference is not None:
                assert np.isfinite(row.abs_err)


class TestReports:
    def test_deterministic_json(self):
        a = run_experiment("hiding-norm", {"d": 2, "l": 1}, seed=7)
        b = run_experiment("hiding-norm", {"d": 2, "l": 1}, seed=7)
        assert a.to_json_text() == b.to_json_text()

    def test_wall_time_not_serialized(self):
        report = run_experiment("hiding-norm", {"d": 2, "l": 1}, seed=7)
        assert report.wall_time_s is not None
        assert "wall" not in report.to_json_text()

    def test_json_schema(self):
        report = run_experiment("hiding-norm", {"d": 2, "l": 2}, seed=3)
        payload = json.loads(report.to_json_text())
        assert payload["experiment"] == "hiding-norm"
        assert payload["seed"] == 3
        assert {"quantity", "value", "reference", "abs_err", "tol"} == set(
            payload["rows"][0]
        )

    def test_csv_schema(self):
        report = run_experiment("hiding-norm", {"d": 2, "l": 2}, seed=3)
        lines = report.to_csv_text().strip().split("\n")
        assert lines[0] == "experiment,param_json,quantity,value,reference,abs_err,seed"
        assert lines[1].startswith("hiding-norm,")

    def test_tol_override(self):
        # d=3, l=3 leaves a nonzero (1-ulp) error that a zero-tolerance
        # override must flag, and a generous override must absorb
        report = run_experiment("hiding-norm", {"d": 3, "l": 3}, seed=3,
                                tol_override=0.0)
        assert not report.passed
        report = run_experiment("hiding-norm", {"d": 3, "l": 3}, seed=3,
                                tol_override=1.0)
        assert report.passed

    def test_row_pass_logic(self):
        assert ReportRow("x", 1.0, 1.0 + 1e-9, 1e-8).passed
        assert not ReportRow("x", 1.0, 2.0, 1e-8).passed
        assert ReportRow("x", 123.0).passed  # bare data row


class TestCliEntry:
    def test_list_exit_zero(self, capsys):
        assert main(["list"]) == 0
        out = capsys.readouterr().out
        assert "lock-en-basis" in out
        assert len(out.strip().split("\n")) == 12

    def test_unknown_experiment_exit_three(self, capsys):
        assert main(["run", "--experiment", "nope"]) == 3

    def test_invalid_params_exit_four(self, capsys):
        # d = 3 has no Hadamard-power unitary
        assert main(["run", "--experiment", "lock-en-basis", "--d", "3"]) == 4

    def test_run_writes_json(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        code = main([
            "run", "--experiment", "hiding-norm", "--d", "2", "--l", "2",
            "--out", str(out),
        ])
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["experiment"] == "hiding-norm"
        assert payload["params"]["l"] == 2

    def test_run_csv_to_stdout(self, capsys):
        code = main(["run", "--experiment", "hiding-norm", "--format", "csv"])
        assert code == 0
        out = capsys.readouterr().out
        assert out.startswith("experiment,param_json,quantity")

    def test_byte_identical_reports(self, tmp_path):
        paths = [tmp_path / "a.json", tmp_path / "b.json"]
        for path in paths:
            assert main([
                "run", "--experiment", "lock-en-basis", "--d", "2",
                "--seed", "11", "--out", str(path),
            ]) == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_mismatch_exit_two(self, tmp_path, capsys):
        code = main([
            "run", "--experiment", "hiding-norm", "--d", "3", "--l", "3",
            "--tol-override", "0.0",
        ])
        assert code == 2

    def test_config_file_with_flag_precedence(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"d": 2, "l": 1}))
        out = tmp_path / "r.json"
        code = main([
            "run", "--experiment", "hiding-norm", "--config", str(cfg),
            "--l", "3", "--out", str(out),
        ])
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["params"]["l"] == 3  # flag beat the config value

    def test_bad_config_exit_four(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("[1, 2]")
        assert main([
            "run", "--experiment", "hiding-norm", "--config", str(cfg),
        ]) == 4


class TestQuickExperiments:
    """Cheap-parameter runs of every registered experiment."""

    def test_lock_en_basis(self):
        report = run_experiment("lock-en-basis", {"d": 2}, seed=5)
        assert report.passed

    def test_lock_en_flower(self):
        report = run_experiment("lock-en-flower",
                                {"d": 2, "l": 2, "n": 1, "alpha": 0.8}, seed=5)
        assert report.passed
        byname = {r.quantity: r for r in report.rows}
        # the positivity defect of the printed family is reported as data
        assert byname["min_eigenvalue"].reference is None
        assert byname["min_eigenvalue"].value < -1e-3

    def test_circuit_equivalence(self):
        report = run_experiment("circuit-equivalence", {"samples": 10}, seed=5)
        assert report.passed

    def test_mixing_gap(self):
        report = run_experiment("mixing-gap", {"samples": 30}, seed=5)
        assert report.passed

    def test_er_drop_small(self):
        report = run_experiment("er-drop", {"samples": 4}, seed=5)
        assert report.passed
        byname = {r.quantity: r for r in report.rows}
        # empirical maxima are reported as data rows, without a bound claim
        assert byname["max_drop_measurement"].reference is None
        assert byname["max_drop_twirl"].reference is None

    def test_roof_vs_wootters_small(self):
        report = run_experiment("roof-vs-wootters", {"samples": 6}, seed=5)
        assert report.passed

    def test_flag_additivity_small(self):
        report = run_experiment("flag-additivity", {"pairs": 2}, seed=5)
        assert report.passed

    def test_prop3_demo(self):
        report = run_experiment("prop3-demo", seed=5)
        assert report.passed

    def test_renyi_discontinuity_small_grid(self):
        report = run_experiment(
            "renyi-discontinuity", {"n_grid": (200, 500)}, seed=5
        )
        byname = {r.quantity: r for r in report.rows}
        assert byname["renyi_density_full_n500"].passed
        # the kept-mass floor is out of reach at this window width; the run
        # reports the mismatch rather than hiding it
        assert not byname["kept_mass_floor_excess"].passed

    def test_prop2_sweep_small(self):
        report = run_experiment("prop2-sweep", {"pairs": 30}, seed=5)
        assert report.passed

    def test_reduced_measure(self):
        report = run_experiment("reduced-measure", {"d": 2}, seed=5)
        assert report.passed
