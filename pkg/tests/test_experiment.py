import csv

import numpy as np
import pytest

from activelabel import core, experiment, figures, loop, model


@pytest.fixture(scope="module")
def dataset():
    return core.gen_synthetic(3, 2, 60, separation=2.5, seed=4)


@pytest.fixture(scope="module")
def small_grid():
    return experiment.ExperimentGrid(
        methods=("active", "random"),
        budgets=(9, 15),
        rounds=3,
        trials=2,
        base_seed=7,
        epochs_per_round=5,
        batch_size=16,
    )


@pytest.fixture(scope="module")
def rows(small_grid, dataset):
    return experiment.run_experiment(small_grid, dataset)


class TestRunExperiment:
    def test_row_count_and_keys(self, rows):
        assert len(rows) == 2 * 2 * 2
        keys = {(r.method, r.budget, r.trial) for r in rows}
        assert len(keys) == len(rows)

    def test_rows_sorted_and_valid(self, rows):
        assert [(r.method, r.budget, r.trial) for r in rows] == sorted(
            (r.method, r.budget, r.trial) for r in rows
        )
        for r in rows:
            assert 0.0 <= r.accuracy <= 1.0
            assert 0.0 <= r.divergence <= 2.0
            assert r.status == "ok"
            assert r.seed == 7 + r.trial

    def test_deterministic_apart_from_runtime(self, small_grid, dataset, rows):
        again = experiment.run_experiment(small_grid, dataset)
        strip = lambda rs: [
            (r.method, r.budget, r.trial, r.seed, r.accuracy, r.divergence, r.status) for r in rs
        ]
        assert strip(again) == strip(rows)

    def test_budget_exceeding_pool_rejected(self, dataset):
        grid = experiment.ExperimentGrid(budgets=(10_000,), trials=1)
        with pytest.raises(ValueError, match="budget exceeds pool"):
            experiment.run_experiment(grid, dataset)

    def test_unknown_method_rejected(self):
        with pytest.raises(ValueError, match="unknown method"):
            experiment.ExperimentGrid(methods=("alchemy",))

    def test_failure_writes_marker_row_and_propagates(self, dataset, tmp_path, monkeypatch):
        grid = experiment.ExperimentGrid(
            methods=("active",), budgets=(9,), rounds=3, trials=1, epochs_per_round=2
        )
        real = loop.run_session

        def explode(config, ds, oracle=None):
            raise RuntimeError("boom")

        monkeypatch.setattr(loop, "run_session", explode)
        with pytest.raises(RuntimeError, match="boom"):
            experiment.run_experiment(grid, dataset, out_dir=tmp_path)
        monkeypatch.setattr(loop, "run_session", real)
        with open(tmp_path / "report.csv") as fh:
            lines = list(csv.reader(fh))
        assert lines[0] == list(experiment.REPORT_HEADER)
        assert lines[1][0] == "active"
        assert lines[1][-1] == "failed"
        assert lines[1][4] == ""  # no accuracy recorded


class TestReportFiles:
    def test_files_and_headers(self, small_grid, dataset, rows, tmp_path):
        paths = experiment.write_report_files(rows, tmp_path)
        with open(paths["report"]) as fh:
            report = list(csv.reader(fh))
        assert report[0] == list(experiment.REPORT_HEADER)
        assert len(report) == 1 + len(rows)
        with open(paths["summary"]) as fh:
            summary = list(csv.reader(fh))
        assert summary[0] == list(experiment.SUMMARY_HEADER)
        assert len(summary) == 1 + 4  # 2 methods x 2 budgets
        with open(paths["plotdata"]) as fh:
            plotdata = list(csv.reader(fh))
        assert plotdata[0] == list(experiment.PLOTDATA_HEADER)

    def test_summary_matches_numpy(self, rows):
        summary = experiment.summarize(rows)
        for s in summary:
            got = [r.accuracy for r in rows if r.method == s["method"] and r.budget == s["budget"]]
            assert s["trials"] == len(got)
            assert s["mean_accuracy"] == pytest.approx(np.mean(got))
            assert s["var_accuracy"] == pytest.approx(np.var(got, ddof=1))


class TestFigures:
    def test_report_figures_render(self, rows, tmp_path):
        a = figures.plot_accuracy_vs_budget(rows, tmp_path / "acc.png")
        d = figures.plot_divergence_vs_budget(rows, tmp_path / "div.png")
        assert a.stat().st_size > 1000
        assert d.stat().st_size > 1000

    def test_session_history_figure(self, dataset, tmp_path):
        config = loop.SessionConfig(
            dataset=dataset.name,
            budget=9,
            rounds=3,
            schedule=model.TrainSchedule(epochs=3, batch_size=16),
            seed=0,
        )
        _, state, history = loop.run_session(config, dataset)
        p = figures.plot_session_history(history, tmp_path / "hist.png", initial=state.initial_metrics)
        assert p.stat().st_size > 1000
