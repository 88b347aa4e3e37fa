import dataclasses
import math
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from qdtl import cli
from qdtl.cli import main
from qdtl.harness import (
    RECORD_FIELDS,
    ConfigError,
    ExperimentConfig,
    contract_violated,
    load_config,
    log_log_slope,
    parse_config_text,
    read_records,
    records_csv,
    report,
    run_experiment,
    run_trial,
    substream,
    violation_limit,
)
from qdtl.io import parse_tree

DATA = Path(__file__).parent / "data"
GOLDEN_CONFIGS = (
    "setting = realizable\ntrials = 6\nseed = 11\n",
    "setting = agnostic\nnoise = 0.1\ntrials = 4\nseed = 11\n",
    "setting = rcn\nnoise = 0.2\ntrials = 3\nseed = 11\n",
)


def golden_records():
    records = []
    for text in GOLDEN_CONFIGS:
        records += run_experiment(load_config(text))
    return records


def test_config_parsing_and_defaults():
    text = "# comment\nsetting = agnostic\n\nnoise = 0.2  # flips\neta = auto\n"
    config = load_config(text, {"n": "6", "noise": "0.05"})
    assert (config.setting, config.n, config.noise, config.eta) == ("agnostic", 6, 0.2, None)
    assert config.effective_eta == 1 / config.t
    assert load_config(config.to_text()) == config
    assert parse_config_text("a=1\nb = two\n") == {"a": "1", "b": "two"}


@pytest.mark.parametrize("text", ["n = 0", "setting = quantum", "kappa = 0.7", "bogus = 1",
                                  "trials = many", "noise = 0.6\nsetting = rcn", "missing equals",
                                  "adversarial_estimates = maybe"])
def test_invalid_configs_rejected(text):
    with pytest.raises(ConfigError):
        load_config(text)


def test_substreams_are_independent_and_reproducible():
    a = substream(7, 0, "problem").random(4)
    assert np.array_equal(a, substream(7, 0, "problem").random(4))
    assert not np.array_equal(a, substream(7, 0, "algorithm").random(4))
    assert not np.array_equal(a, substream(7, 1, "problem").random(4))
    with pytest.raises(ValueError):
        substream(7, 0, "weather")


def test_realizable_run_is_deterministic():
    config = ExperimentConfig(setting="realizable", n=8, t=4, eps=0.2, trials=50, seed=3)
    first, second = run_experiment(config), run_experiment(config)
    assert len(first) == 50
    assert records_csv(first) == records_csv(second)


def test_records_are_consistent():
    for record in golden_records():
        assert record.error == pytest.approx(1 - (1 + record.cor) / 2)
        assert record.violated == (record.cor < record.bound - 1e-12)
        assert record.queries == sum(record.queries_by_tag.values())


def test_agnostic_mean_correlation_meets_tree_bound():
    config = ExperimentConfig(setting="agnostic", task="boost", n=8, t=4, eps=0.2, trials=10,
                              seed=5)
    records = run_experiment(config)
    mean_cor = np.mean([r.cor for r in records])
    mean_proxy = np.mean([r.optcor_proxy for r in records])
    assert mean_cor >= mean_proxy - config.t * config.eps


def test_query_scaling_sweep():
    slopes = {}
    for setting in ("realizable", "agnostic"):
        means = []
        for eps in (0.4, 0.2, 0.1):
            config = ExperimentConfig(setting=setting, eps=eps, kappa=eps, trials=5, seed=2)
            means.append(np.mean([r.queries for r in run_experiment(config)]))
        slopes[setting] = log_log_slope([2.5, 5, 10], means)
    assert abs(slopes["realizable"] - 2) <= 0.3
    assert abs(slopes["agnostic"] - 3) <= 0.4


def test_report_aggregates():
    table, csv_text = report([])
    assert csv_text.count("\n") == 1 and table.count("\n") == 1
    record = run_trial(ExperimentConfig(trials=1, seed=1), 0)
    _, single = report([record])
    row = read_records(single)[0]
    assert float(row["cor_mean"]) == float(row["cor_median"]) == float(row["cor_p95"])
    assert float(row["cor_mean"]) == pytest.approx(record.cor, rel=1e-5)


def test_report_matches_golden_file():
    _, csv_text = report(golden_records())
    assert csv_text == (DATA / "golden_report.csv").read_text()


def test_violation_limit_and_gate():
    assert violation_limit(0.1, 100) == pytest.approx(0.1 + 3 * math.sqrt(0.09 / 100))
    records = run_experiment(ExperimentConfig(trials=3, seed=0))
    assert not contract_violated(records, 0.1)
    assert not contract_violated([], 0.1)


def test_cli_learn_and_report(tmp_path, capsys):
    out = tmp_path / "records.csv"
    assert main(["learn", "--setting", "agnostic", "--trials", "2", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0] == ",".join(RECORD_FIELDS)
    summary = tmp_path / "summary.csv"
    assert main(["report", str(out), "--out", str(summary)]) == 0
    assert "cor_mean" in capsys.readouterr().out and summary.exists()


def test_cli_config_file_overrides_flags(tmp_path):
    config = tmp_path / "run.cfg"
    config.write_text("trials = 2\nsetting = rcn\nnoise = 0.2\n")
    out = tmp_path / "records.csv"
    assert main(["learn", "--config", str(config), "--setting", "agnostic", "--trials", "5",
                 "--out", str(out)]) == 0
    rows = read_records(out.read_text())
    assert len(rows) == 2 and {r["setting"] for r in rows} == {"rcn"}


def test_cli_invalid_config_exit_code(tmp_path, capsys):
    assert main(["learn", "--n", "0"]) == 1
    assert main(["learn", "--config", str(tmp_path / "absent.cfg")]) == 1
    assert "qdtl learn" in capsys.readouterr().err


def test_cli_violation_exit_code(tmp_path, monkeypatch):
    def all_violated(config):
        return [dataclasses.replace(r, violated=True) for r in run_experiment(config)]

    monkeypatch.setattr(cli, "run_experiment", all_violated)
    assert main(["learn", "--trials", "4", "--out", str(tmp_path / "r.csv")]) == 2


def test_cli_gen_writes_problem_files(tmp_path):
    assert main(["gen", "--out-dir", str(tmp_path), "--trials", "2", "--n", "5"]) == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert "problem_001.tree" in names and "config.txt" in names
    tree = parse_tree((tmp_path / "problem_000.tree").read_text())
    assert tree is not None


def test_cli_qgl(tmp_path, capsys):
    assert main(["qgl", "--n", "6", "--tau", "0.3", "--gap", "0.1", "--trace"]) == 0
    captured = capsys.readouterr()
    assert captured.out.startswith("l,S,queries\n")
    assert captured.err.startswith("level,live,marked,queries\n")


def test_cli_bench_is_byte_identical(tmp_path):
    outputs = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        assert main(["bench", "--setting", "agnostic", "--trials", "2", "--seed", "9",
                     "--out", str(path)]) == 0
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]


def test_pure_python_backend_selected_by_environment():
    env = dict(os.environ, QDTL_PURE_PYTHON="1")
    code = "import qdtl; print(qdtl.BACKEND)"
    result = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                            check=True)
    assert result.stdout.strip() == "python"


def test_pure_python_backend_reproduces_golden_report():
    env = dict(os.environ, QDTL_PURE_PYTHON="1")
    code = ("import sys; sys.path.insert(0, 'tests'); from test_harness import golden_records;"
            "from qdtl.harness import report; sys.stdout.write(report(golden_records())[1])")
    result = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                            check=True, cwd=Path(__file__).parent.parent)
    assert result.stdout == (DATA / "golden_report.csv").read_text()
