from __future__ import annotations

import json
import logging
import os

import pytest

from island_fss.cli import ExperimentSpec, main

SMALL = ["--pop", "6", "--local", "4", "--islands", "2", "--gens", "1", "--migs", "1"]


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "planted.csv"
    assert main(["synth", "--rows", "200", "--features", "8", "--seed", "1", "--out", str(path)]) == 0
    return path


@pytest.fixture(scope="module")
def results(dataset, tmp_path_factory):
    out = tmp_path_factory.mktemp("results")
    argv = ["run", "--data", str(dataset), *SMALL, "--runs", "2", "--sequential", "--out", str(out)]
    assert main(argv) == 0
    return out


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch, tmp_path):
    for name in ("ISLAND_FSS_RUNS", "ISLAND_FSS_K", "ISLAND_FSS_PRESET"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)


class TestRun:
    def test_writes_every_result_file(self, results):
        assert sorted(p.name for p in results.iterdir()) == [
            "config.json",
            "eaf.csv",
            "eaf.svg",
            "front_run00.csv",
            "front_run01.csv",
            "summary.json",
        ]

    def test_summary_contents(self, results):
        summary = json.loads((results / "summary.json").read_text())
        assert summary["runs"] == 2
        assert summary["algorithm"] == "nsga2"
        assert len(summary["hv_per_run"]) == 2
        assert 0.0 <= summary["mean_auc"] <= 1.0

    def test_config_records_the_resolved_values(self, results):
        config = json.loads((results / "config.json").read_text())
        assert (config["n"], config["local_n"], config["k"]) == (6, 4, 2)
        assert config["pc"] == 0.95

    def test_repeat_is_byte_identical(self, dataset, results, tmp_path):
        argv = ["run", "--data", str(dataset), *SMALL, "--runs", "2", "--sequential", "--out", str(tmp_path / "again")]
        assert main(argv) == 0
        for name in ("front_run00.csv", "front_run01.csv"):
            assert (tmp_path / "again" / name).read_bytes() == (results / name).read_bytes()

    def test_missing_dataset(self, tmp_path, caplog):
        missing = tmp_path / "absent.csv"
        with caplog.at_level(logging.ERROR):
            assert main(["run", "--data", str(missing), *SMALL, "--runs", "1"]) == 2
        assert str(missing) in caplog.text

    def test_output_path_is_a_file(self, dataset, tmp_path, caplog):
        blocker = tmp_path / "blocker"
        blocker.write_text("")
        with caplog.at_level(logging.ERROR):
            assert main(["run", "--data", str(dataset), *SMALL, "--runs", "1", "--out", str(blocker)]) == 2
        assert str(blocker) in caplog.text

    def test_data_is_required(self):
        assert main(["run", *SMALL, "--runs", "1"]) == 2

    def test_invalid_configuration(self, dataset):
        assert main(["run", "--data", str(dataset), "--pop", "20", "--local", "4", "--islands", "2"]) == 2


def test_compare_summary_with_itself(results, capsys):
    summary = results / "summary.json"
    assert main(["compare", str(summary), str(summary)]) == 0
    output = capsys.readouterr().out
    assert "dof = 2" in output
    assert output.splitlines()[1].split()[-1] == "F"


def test_compare_malformed_summary(tmp_path):
    bad = tmp_path / "summary.json"
    bad.write_text("[]")
    assert main(["compare", str(bad), str(bad)]) == 2


def test_eaf_from_front_files(results, tmp_path):
    output = tmp_path / "surfaces" / "eaf.csv"
    fronts = [str(results / "front_run00.csv"), str(results / "front_run01.csv")]
    assert main(["eaf", *fronts, "--output", str(output)]) == 0
    assert output.read_text().startswith("level,cardinality_score,auc")
    assert output.with_suffix(".svg").is_file()


def test_synth_sparse(tmp_path):
    path = tmp_path / "planted.svm"
    assert main(["synth", "--rows", "50", "--features", "4", "--format", "sparse", "--out", str(path)]) == 0
    header, first = path.read_text().splitlines()[:2]
    assert header == "# n_features=4"
    assert first.split()[0] in {"0", "1"}


@pytest.mark.slow
def test_bench_matches_modes(capsys):
    assert main(["bench", *SMALL]) == 0
    assert "speedup =" in capsys.readouterr().out


@pytest.mark.slow
@pytest.mark.skipif((os.cpu_count() or 1) < 4, reason="needs 4 CPUs")
def test_bench_speedup_on_four_islands(capsys):
    argv = ["bench", "--pop", "30", "--local", "15", "--islands", "4", "--gens", "15", "--migs", "2"]
    assert main(argv) == 0
    line = next(text for text in capsys.readouterr().out.splitlines() if text.startswith("speedup ="))
    assert float(line.split()[2]) > 1.5


class TestExperimentSpec:
    def test_preset_fills_unset_values(self):
        spec = ExperimentSpec(preset="epsilon")
        assert (spec.n, spec.local_n, spec.m_gen, spec.m_mig) == (50, 25, 50, 1)
        assert (spec.pc, spec.pm) == (0.96, 0.03)
        assert (spec.w, spec.c1, spec.c2) == (0.9, 0.7, 1.3)

    def test_moead_uses_its_own_variation_rates(self):
        spec = ExperimentSpec(preset="epsilon", algorithm="moead")
        assert (spec.pc, spec.pm) == (0.95, 0.10)

    def test_explicit_values_win(self):
        spec = ExperimentSpec(preset="epsilon", n=40, pm=0.2)
        assert spec.n == 40
        assert spec.pm == 0.2
        assert spec.local_n == 25

    def test_environment(self, monkeypatch):
        monkeypatch.setenv("ISLAND_FSS_RUNS", "3")
        assert ExperimentSpec().runs == 3

    def test_engine_config_per_seed(self):
        spec = ExperimentSpec(sequential=True)
        cfg = spec.engine_config(7)
        assert cfg.seed == 7
        assert not cfg.parallel
        assert spec.engine_config(7, parallel=True).parallel

    def test_test_fraction_range(self):
        with pytest.raises(ValueError):
            ExperimentSpec(test_fraction=1.0)
