from __future__ import annotations

import json

import pandas as pd
import pytest

from island_fss.errors import ReportError
from island_fss.metrics import FrontSet, eaf
from island_fss.mocore import ObjectivePair as P
from island_fss.reports import (
    EAF_COLUMNS,
    FRONT_COLUMNS,
    front_filename,
    read_eaf,
    read_front,
    read_front_table,
    read_hv_per_run,
    read_summary,
    render_eaf_svg,
    write_eaf,
    write_front,
    write_summary,
)


@pytest.fixture
def final_population(make_scored):
    return [
        make_scored(0, 0.1, 0.6, test_auc=0.55),
        make_scored(1, 0.3, 0.9, test_auc=0.85),
        make_scored(2, 0.4, 0.7, test_auc=0.9),
    ]


def test_front_filename():
    assert front_filename(3) == "front_run03.csv"


class TestFrontFiles:
    def test_columns_and_masks(self, final_population, tmp_path):
        path = tmp_path / front_filename(0)
        write_front(final_population, path)
        frame = read_front_table(path)
        assert list(frame.columns) == FRONT_COLUMNS
        assert list(frame["mask"]) == ["1000000000", "1110000000", "1111000000"]
        assert list(frame["cardinality_count"]) == [1, 3, 4]

    def test_read_front_keeps_the_nondominated_points(self, final_population, tmp_path):
        path = tmp_path / "front.csv"
        write_front(final_population, path)
        assert read_front(path, auc_source="train").points == (P(0.1, 0.6), P(0.3, 0.9))
        assert read_front(path, run_id=4, auc_source="test").run_id == 4
        assert read_front(path, auc_source="test").points == (P(0.1, 0.55), P(0.3, 0.85), P(0.4, 0.9))

    def test_six_significant_digits(self, make_scored, tmp_path):
        path = tmp_path / "front.csv"
        write_front([make_scored(0, 1 / 3, 2 / 3, test_auc=0.5)], path)
        assert "0.333333" in path.read_text()
        assert "0.666667" in path.read_text()

    def test_missing_file(self, tmp_path):
        with pytest.raises(ReportError, match="not found"):
            read_front_table(tmp_path / "absent.csv")

    def test_missing_columns(self, tmp_path):
        path = tmp_path / "front.csv"
        pd.DataFrame({"key": [0], "mask": ["1"]}).to_csv(path, index=False)
        with pytest.raises(ReportError, match="missing columns"):
            read_front_table(path)

    def test_missing_test_auc(self, make_scored, tmp_path):
        path = tmp_path / "front.csv"
        write_front([make_scored(0, 0.1, 0.6)], path)
        with pytest.raises(ReportError, match="test_auc"):
            read_front(path, auc_source="test")


class TestSummaryFiles:
    def test_roundtrip(self, tmp_path):
        path = tmp_path / "summary.json"
        write_summary({"algorithm": "moead", "hv_per_run": [0.5, 0.6]}, path)
        assert read_summary(path)["algorithm"] == "moead"
        assert read_hv_per_run(path) == [0.5, 0.6]

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "summary.json"
        path.write_text("{not json")
        with pytest.raises(ReportError, match="malformed"):
            read_summary(path)

    def test_hv_per_run_must_be_numbers(self, tmp_path):
        path = tmp_path / "summary.json"
        path.write_text(json.dumps({"hv_per_run": ["a", "b"]}))
        with pytest.raises(ReportError):
            read_hv_per_run(path)

    def test_hv_per_run_needs_two_runs(self, tmp_path):
        path = tmp_path / "summary.json"
        path.write_text(json.dumps({"hv_per_run": [0.5]}))
        with pytest.raises(ReportError, match="at least 2"):
            read_hv_per_run(path)


class TestEafFiles:
    @pytest.fixture
    def surfaces(self):
        return eaf([FrontSet((P(0.1, 0.9),)), FrontSet((P(0.3, 0.95),))])

    def test_csv(self, surfaces, tmp_path):
        path = tmp_path / "eaf.csv"
        write_eaf(surfaces, path)
        assert list(pd.read_csv(path).columns) == EAF_COLUMNS
        assert read_eaf(path) == surfaces.levels()

    def test_wrong_columns(self, tmp_path):
        path = tmp_path / "eaf.csv"
        pd.DataFrame({"x": [1]}).to_csv(path, index=False)
        with pytest.raises(ReportError):
            read_eaf(path)

    def test_svg(self, surfaces, tmp_path):
        path = tmp_path / "eaf.svg"
        render_eaf_svg(surfaces, path, title="2 runs")
        assert "<svg" in path.read_text()
