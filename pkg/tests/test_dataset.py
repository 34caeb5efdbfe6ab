from __future__ import annotations

import numpy as np
import pytest

from island_fss.dataset import (
    Dataset,
    Shard,
    fit_min_max,
    load_dense,
    load_sparse,
    project,
    random_oversample,
    shard_rows,
    stratified_split,
    write_dense,
    write_sparse,
)
from island_fss.errors import DatasetError


def _indexed_dataset(negatives: int, positives: int) -> Dataset:
    """Column 0 holds the row id so splits can be traced back."""
    n = negatives + positives
    features = np.column_stack([np.arange(n, dtype=float), np.linspace(0, 1, n)])
    labels = np.array([0] * negatives + [1] * positives)
    return Dataset(features, labels)


class TestDatasetValidation:
    def test_rejects_single_class(self):
        with pytest.raises(DatasetError, match="single-class"):
            Dataset(np.zeros((3, 2)), np.array([1, 1, 1]))

    def test_rejects_labels_outside_zero_one(self):
        with pytest.raises(DatasetError):
            Dataset(np.zeros((3, 2)), np.array([0, 1, 2]))

    def test_rejects_shape_mismatch(self):
        with pytest.raises(DatasetError):
            Dataset(np.zeros((4, 2)), np.array([0, 1, 0]))

    def test_class_counts(self):
        assert _indexed_dataset(3, 5).class_counts() == (3, 5)


class TestDenseFormat:
    def test_load_dense(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("a,b,label\n0.5,1,1\n2,-3.25,0\n", encoding="utf-8")
        ds = load_dense(path)
        assert ds.feature_names == ("a", "b")
        np.testing.assert_array_equal(ds.raw_dense(), [[0.5, 1.0], [2.0, -3.25]])
        np.testing.assert_array_equal(ds.labels, [1, 0])

    def test_write_then_load_is_exact(self, tmp_path, planted_small):
        path = tmp_path / "planted.csv"
        write_dense(planted_small, path)
        again = load_dense(path)
        np.testing.assert_array_equal(again.raw_dense(), planted_small.raw_dense())
        np.testing.assert_array_equal(again.labels, planted_small.labels)

    def test_missing_file_names_the_path(self, tmp_path):
        missing = tmp_path / "nope.csv"
        with pytest.raises(DatasetError, match="nope.csv"):
            load_dense(missing)

    def test_last_column_must_be_label(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("a,target\n1,0\n2,1\n", encoding="utf-8")
        with pytest.raises(DatasetError, match="label"):
            load_dense(path)

    def test_non_numeric_cell(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("a,label\n1,0\nx,1\n", encoding="utf-8")
        with pytest.raises(DatasetError, match="non-numeric"):
            load_dense(path)

    def test_boolean_cells_are_not_numeric(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("a,b,label\nTrue,2,0\nFalse,3,1\n", encoding="utf-8")
        with pytest.raises(DatasetError, match="non-numeric"):
            load_dense(path)

    def test_single_class_file(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("a,label\n1,1\n2,1\n", encoding="utf-8")
        with pytest.raises(DatasetError, match="single-class"):
            load_dense(path)


class TestSparseFormat:
    def test_load_sparse(self, tmp_path):
        path = tmp_path / "data.svm"
        path.write_text("+1 1:0.5 3:2\n-1 2:1\n", encoding="utf-8")
        ds = load_sparse(path)
        assert ds.is_sparse
        assert ds.n_features == 3
        np.testing.assert_array_equal(ds.labels, [1, 0])
        np.testing.assert_array_equal(ds.raw_dense(), [[0.5, 0.0, 2.0], [0.0, 1.0, 0.0]])

    def test_write_then_load_is_exact(self, tmp_path):
        path = tmp_path / "data.svm"
        path.write_text("1 1:0.125 4:3.5\n0 2:1e-07\n1 3:-2\n", encoding="utf-8")
        ds = load_sparse(path)
        out = tmp_path / "again.svm"
        write_sparse(ds, out)
        again = load_sparse(out)
        np.testing.assert_array_equal(again.raw_dense(), ds.raw_dense())
        np.testing.assert_array_equal(again.labels, ds.labels)

    def test_trailing_zero_columns_survive_a_round_trip(self, tmp_path):
        ds = Dataset(np.array([[0.5, 0.0, 0.0], [1.0, 0.0, 0.0]]), np.array([0, 1]))
        path = tmp_path / "narrow.svm"
        write_sparse(ds, path)
        again = load_sparse(path)
        assert again.n_features == 3
        np.testing.assert_array_equal(again.raw_dense(), ds.raw_dense())

    def test_declared_width_must_cover_the_indices(self, tmp_path):
        path = tmp_path / "data.svm"
        path.write_text("# n_features=2\n1 3:1\n0 1:1\n", encoding="utf-8")
        with pytest.raises(DatasetError, match="n_features=2"):
            load_sparse(path)

    def test_indices_must_increase(self, tmp_path):
        path = tmp_path / "data.svm"
        path.write_text("1 3:1 2:1\n0 1:1\n", encoding="utf-8")
        with pytest.raises(DatasetError, match="not increasing"):
            load_sparse(path)

    def test_indices_are_one_based(self, tmp_path):
        path = tmp_path / "data.svm"
        path.write_text("1 0:1\n0 1:1\n", encoding="utf-8")
        with pytest.raises(DatasetError, match="1-based"):
            load_sparse(path)

    def test_malformed_token(self, tmp_path):
        path = tmp_path / "data.svm"
        path.write_text("1 1:abc\n0 1:1\n", encoding="utf-8")
        with pytest.raises(DatasetError, match="malformed"):
            load_sparse(path)

    def test_projection_of_sparse_rows(self, tmp_path):
        path = tmp_path / "data.svm"
        path.write_text("1 1:0.5 3:2\n-1 2:1\n", encoding="utf-8")
        ds = load_sparse(path)
        X, y = project(Shard.whole(ds), [True, False, True])
        np.testing.assert_array_equal(X, [[0.5, 2.0], [0.0, 0.0]])
        np.testing.assert_array_equal(y, [1, 0])


class TestSplitting:
    def test_stratified_split_counts_and_disjointness(self):
        ds = _indexed_dataset(50, 50)
        train, test = stratified_split(ds, 0.2, seed=3)
        assert train.class_counts() == (40, 40)
        assert test.class_counts() == (10, 10)
        ids = np.concatenate([train.raw_dense()[:, 0], test.raw_dense()[:, 0]])
        assert sorted(ids.tolist()) == list(range(100))

    def test_split_rounds_half_up(self):
        # 5 * 0.3 = 1.5 test rows per class rounds to 2
        train, test = stratified_split(_indexed_dataset(5, 5), 0.3, seed=0)
        assert test.class_counts() == (2, 2)
        assert train.class_counts() == (3, 3)

    def test_split_too_small_class(self):
        with pytest.raises(DatasetError):
            stratified_split(_indexed_dataset(1, 10), 0.2, seed=0)

    def test_split_is_seeded(self):
        ds = _indexed_dataset(30, 20)
        a, _ = stratified_split(ds, 0.2, seed=11)
        b, _ = stratified_split(ds, 0.2, seed=11)
        np.testing.assert_array_equal(a.raw_dense(), b.raw_dense())

    def test_random_oversample_balances_classes(self):
        ds = _indexed_dataset(30, 10)
        balanced = random_oversample(ds, seed=5)
        assert balanced.class_counts() == (30, 30)
        # original rows come first and are untouched
        np.testing.assert_array_equal(balanced.raw_dense()[:40], ds.raw_dense())
        extra = balanced.labels[40:]
        assert (extra == 1).all()

    def test_random_oversample_keeps_balanced_data(self):
        ds = _indexed_dataset(10, 10)
        assert random_oversample(ds, seed=0) is ds


class TestSharding:
    def test_shards_partition_rows_per_class(self, planted_small):
        shards = shard_rows(planted_small, 4, seed=1)
        all_rows = np.concatenate([s.row_ids for s in shards])
        assert sorted(all_rows.tolist()) == list(range(planted_small.n_rows))

        negatives, positives = planted_small.class_counts()
        for s in shards:
            counts = np.bincount(s.labels, minlength=2)
            assert abs(counts[0] - negatives / 4) <= 1
            assert abs(counts[1] - positives / 4) <= 1

    def test_single_shard_is_everything(self, planted_small):
        (shard,) = shard_rows(planted_small, 1, seed=0)
        assert shard.n_rows == planted_small.n_rows

    def test_too_many_islands(self):
        with pytest.raises(DatasetError, match="fewer than"):
            shard_rows(_indexed_dataset(3, 10), 4, seed=0)


class TestProjection:
    def test_selects_columns_in_order(self):
        features = np.arange(12, dtype=float).reshape(4, 3)
        ds = Dataset(features, np.array([0, 1, 0, 1]))
        X, y = project(Shard(ds, np.array([0, 3])), [True, False, True])
        np.testing.assert_array_equal(X, [[0.0, 2.0], [9.0, 11.0]])
        np.testing.assert_array_equal(y, [0, 1])

    def test_empty_mask(self, planted_shard):
        with pytest.raises(DatasetError, match="empty feature mask"):
            project(planted_shard, np.zeros(planted_shard.n_features, dtype=bool))

    def test_mask_length_mismatch(self, planted_shard):
        with pytest.raises(DatasetError):
            project(planted_shard, [True, False])

    def test_shard_needs_both_classes(self):
        ds = Dataset(np.zeros((4, 1)), np.array([0, 0, 1, 1]))
        with pytest.raises(DatasetError, match="single class"):
            Shard(ds, np.array([0, 1]))


class TestScaling:
    def test_min_max_fitted_on_train_and_clipped(self):
        train = Dataset(np.array([[0.0, 5.0], [10.0, 5.0], [5.0, 5.0]]), np.array([0, 1, 0]))
        test = Dataset(np.array([[20.0, 7.0], [-5.0, 5.0]]), np.array([1, 0]))
        scaling = fit_min_max(train)

        X, _ = project(Shard.whole(train.with_scaling(scaling)), [True, True])
        np.testing.assert_allclose(X, [[0.0, 0.0], [1.0, 0.0], [0.5, 0.0]])

        X, _ = project(Shard.whole(test.with_scaling(scaling)), [True, True])
        np.testing.assert_allclose(X, [[1.0, 0.0], [0.0, 0.0]])

    def test_stored_values_stay_raw(self):
        ds = Dataset(np.array([[0.0], [4.0]]), np.array([0, 1]))
        scaled = ds.with_scaling(fit_min_max(ds))
        np.testing.assert_array_equal(scaled.raw_dense(), [[0.0], [4.0]])
