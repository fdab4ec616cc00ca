import json

import numpy as np
import pytest

from simplexshare.cli import main as cli_main
from simplexshare.experiments import (CSV_COLUMNS, ConfigError, VERDICT_SLACK,
                                      any_failed, parse_experiment,
                                      report_rows, run_experiment,
                                      write_report_csv)


def rotating_best_arm_config(reps=5, seed=42):
    means = []
    for seg in range(4):
        row = [0.5] * 10
        row[seg] = 0.2
        means.append(row)
    return {
        "environment": {"kind": "piecewise_stationary", "d": 10, "T": 1000,
                        "seed": seed, "segment_lengths": [250] * 4,
                        "means": means},
        "comparator": {"kind": "piecewise_corner",
                       "segment_lengths": [250] * 4},
        "forecaster": {"rule": "fixed_share", "tune": {"m0": 4, "U0": 1000}},
        "regret": {"kind": "shifting"},
        "repetitions": reps,
    }


def overconfident_config():
    """Caps far below the comparator's true regularity: the tuned
    guarantee does not apply and certification must fail."""
    lengths = [2] * 20
    means = [[0.0, 1.0] if i % 2 == 0 else [1.0, 0.0] for i in range(20)]
    return {
        "environment": {"kind": "piecewise_stationary", "d": 2, "T": 40,
                        "seed": 1, "segment_lengths": lengths, "means": means},
        "comparator": {"kind": "piecewise_corner", "segment_lengths": lengths},
        "forecaster": {"rule": "fixed_share", "tune": {"m0": 1, "U0": 40}},
        "regret": {"kind": "shifting"},
        "repetitions": 2,
    }


def test_parse_reports_config_paths():
    with pytest.raises(ConfigError, match="config.environment"):
        parse_experiment({})
    cfg = rotating_best_arm_config()
    del cfg["environment"]["d"]
    with pytest.raises(ConfigError, match="environment.d"):
        parse_experiment(cfg)
    cfg = rotating_best_arm_config()
    cfg["environment"]["means"][1][3] = 1.7
    with pytest.raises(ConfigError, match=r"means\[1\]\[3\]"):
        parse_experiment(cfg)
    cfg = rotating_best_arm_config()
    cfg["regret"] = {"kind": "adaptive", "tau0": 5000}
    with pytest.raises(ConfigError, match="tau0"):
        parse_experiment(cfg)
    cfg = rotating_best_arm_config()
    cfg["forecaster"] = {"rule": "max_share", "eta": 1.0, "alpha": 0.1}
    cfg["regret"] = {"kind": "adaptive", "tau0": 8}
    del cfg["comparator"]
    with pytest.raises(ConfigError, match="adaptive"):
        run_experiment(parse_experiment(cfg))


def test_trivial_single_point_environment_passes():
    spec = parse_experiment({
        "environment": {"kind": "iid_bernoulli", "d": 1, "T": 20, "seed": 3,
                        "means": [0.4]},
        "comparator": {"kind": "piecewise_corner", "segment_lengths": [20],
                       "corners": [0]},
        "forecaster": {"rule": "fixed_share", "eta": 1.0, "alpha": 0.1},
        "regret": {"kind": "shifting"},
        "repetitions": 1,
    })
    reports = run_experiment(spec)
    assert reports[0].regret == pytest.approx(0.0, abs=1e-12)
    assert all(r.verdict == "pass" for r in reports)


def test_tuned_fixed_share_certifies_on_rotating_environment():
    reports = run_experiment(parse_experiment(rotating_best_arm_config()))
    assert not any_failed(reports)
    body = reports[:-1]
    assert len(body) == 5
    assert all(r.U_sum == pytest.approx(1000.0) for r in body)
    assert all(r.m <= 3.0 for r in body)
    assert reports[-1].run_id == "summary"
    assert reports[-1].regret == max(r.regret for r in body)


def test_fixed_seed_runs_are_byte_identical(tmp_path):
    cfg = rotating_best_arm_config(reps=3)
    cfg["output"] = {"csv": str(tmp_path / "a.csv"), "include_timing": False}
    spec = parse_experiment(cfg)
    write_report_csv(run_experiment(spec), tmp_path / "a.csv", False)
    write_report_csv(run_experiment(spec), tmp_path / "b.csv", False)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_parallel_matches_serial(monkeypatch):
    cfg = rotating_best_arm_config(reps=6)
    spec = parse_experiment(cfg)
    monkeypatch.setenv("THREADS", "1")
    serial = report_rows(run_experiment(spec), include_timing=False)
    monkeypatch.setenv("THREADS", "4")
    parallel = report_rows(run_experiment(spec), include_timing=False)
    assert serial == parallel


def test_verdicts_recomputable_from_rows(tmp_path):
    cfg = rotating_best_arm_config(reps=3)
    path = tmp_path / "report.csv"
    spec = parse_experiment(cfg)
    write_report_csv(run_experiment(spec), path)
    lines = path.read_text().strip().splitlines()
    header = lines[0].split(",")
    assert tuple(header) == CSV_COLUMNS
    for line in lines[1:]:
        row = dict(zip(header, line.split(",")))
        regret, bound = float(row["regret"]), float(row["bound"])
        expected = "pass" if regret <= bound + VERDICT_SLACK * max(
            1.0, abs(bound)) else "fail"
        assert row["verdict"] == expected


def test_overconfident_caps_fail_certification():
    reports = run_experiment(parse_experiment(overconfident_config()))
    assert any_failed(reports)


def test_adaptive_and_discounted_engine_paths():
    adaptive = parse_experiment({
        "environment": {"kind": "adversarial_flip", "d": 2, "T": 64,
                        "seed": 11},
        "forecaster": {"rule": "fixed_share", "tune": {"m0": 1, "U0": 8}},
        "regret": {"kind": "adaptive", "tau0": 8},
        "repetitions": 3,
    })
    reports = run_experiment(adaptive)
    assert not any_failed(reports)

    anytime = parse_experiment({
        "environment": {"kind": "iid_bernoulli", "d": 3, "T": 50, "seed": 11,
                        "means": [0.2, 0.5, 0.8]},
        "forecaster": {"rule": "time_varying", "schedules": "anytime"},
        "regret": {"kind": "adaptive", "tau0": 50},
        "repetitions": 2,
    })
    assert not any_failed(run_experiment(anytime))

    discounted = parse_experiment({
        "environment": {"kind": "iid_bernoulli", "d": 4, "T": 120, "seed": 7,
                        "means": [0.2, 0.4, 0.6, 0.8]},
        "forecaster": {"rule": "fixed_share"},
        "regret": {"kind": "discounted", "schedule": "linear_down"},
        "repetitions": 3,
    })
    reports = run_experiment(discounted)
    assert not any_failed(reports)
    assert all(r.U_sum == pytest.approx(121 * 120 / (2 * 120))
               for r in reports[:-1])

    # non-tuned rules certify discounted regret through the shifting
    # bound at the realized discounted-comparator statistics
    discounted_max_share = parse_experiment({
        "environment": {"kind": "iid_bernoulli", "d": 4, "T": 120, "seed": 7,
                        "means": [0.2, 0.4, 0.6, 0.8]},
        "forecaster": {"rule": "max_share", "eta": 1.0, "alpha": 0.1},
        "regret": {"kind": "discounted", "schedule": "linear_up"},
        "repetitions": 2,
    })
    assert not any_failed(run_experiment(discounted_max_share))


def test_max_share_engine_bound_path():
    lengths = [10] * 10
    means = []
    for i in range(10):
        row = [0.6] * 20
        row[i % 2] = 0.1
        means.append(row)
    cfg = {
        "environment": {"kind": "piecewise_stationary", "d": 20, "T": 100,
                        "seed": 5, "segment_lengths": lengths, "means": means},
        "comparator": {"kind": "piecewise_corner", "segment_lengths": lengths},
        "forecaster": {"rule": "max_share", "eta": 2.0, "alpha": 0.09},
        "regret": {"kind": "shifting"},
        "repetitions": 2,
    }
    assert not any_failed(run_experiment(parse_experiment(cfg)))
    cfg["forecaster"] = {"rule": "decayed_max_share", "eta": 2.0,
                         "alpha": 0.09, "gamma": 0.045}
    assert not any_failed(run_experiment(parse_experiment(cfg)))


def test_cli_run_tune_project_bound(tmp_path, capsys):
    cfg = rotating_best_arm_config(reps=2)
    cfg["output"] = {"csv": str(tmp_path / "out.csv")}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert cli_main(["run", str(path)]) == 0
    assert (tmp_path / "out.csv").exists()
    out = capsys.readouterr().out
    assert "verdict=pass" in out

    assert cli_main(["tune", "--d", "10", "--m0", "4", "--U0", "1000"]) == 0
    out = capsys.readouterr().out
    assert "eta=0.53132418243760615" in out
    assert "bound=132.83104560940154" in out

    assert cli_main(["project", "--alpha", "0.4", "--v", "0.9,0.1"]) == 0
    assert capsys.readouterr().out.strip() == (
        "0.80000000000000004,0.20000000000000001")

    assert cli_main(["bound", "adaptive", "--d", "2", "--tau0", "8"]) == 0
    out = capsys.readouterr().out
    assert "exact=3.8508744308852449" in out

    assert cli_main(["bound", "fixed-share", "--d", "2", "--eta", "1",
                     "--alpha", "0.1", "--m", "1", "--U-sum", "10",
                     "--u1-norm", "1"]) == 0
    assert capsys.readouterr().out.strip() == "5.7817635793765465"


def test_cli_certify_exit_codes(tmp_path, capsys):
    good = tmp_path / "good.json"
    good.write_text(json.dumps(rotating_best_arm_config(reps=2)))
    assert cli_main(["certify", str(good)]) == 0
    capsys.readouterr()

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(overconfident_config()))
    assert cli_main(["certify", str(bad)]) == 1
    capsys.readouterr()

    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert cli_main(["certify", str(broken)]) == 2
    err = capsys.readouterr().err
    assert "error:" in err


def test_cli_config_error_paths(tmp_path, capsys):
    cfg = rotating_best_arm_config()
    cfg["environment"]["kind"] = "mystery"
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert cli_main(["run", str(path)]) == 2
    assert "environment.kind" in capsys.readouterr().err
