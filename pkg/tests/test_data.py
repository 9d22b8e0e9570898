import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rgnn.data import (
    IDX_IMAGE_MAGIC,
    IDX_LABEL_MAGIC,
    LabeledDataset,
    load_csv,
    load_idx,
    minmax_normalize,
    one_hot,
    split,
    write_idx_images,
    write_idx_labels,
)
from rgnn.errors import DataError


def write_raw(path, payload: bytes):
    path.write_bytes(payload)
    return path


class TestLoadIdx:
    def test_minimal_fixture(self, tmp_path):
        img = tmp_path / "img"
        lbl = tmp_path / "lbl"
        write_raw(img, struct.pack(">IIII", IDX_IMAGE_MAGIC, 1, 2, 2) + bytes([0, 255, 0, 255]))
        write_raw(lbl, struct.pack(">II", IDX_LABEL_MAGIC, 1) + bytes([7]))
        ds = load_idx(img, lbl)
        assert np.allclose(ds.samples, [[0.0, 1.0, 0.0, 1.0]])
        assert ds.labels.tolist() == [7]
        assert ds.class_count == 8

    def test_bad_magic(self, tmp_path):
        img = write_raw(tmp_path / "img", struct.pack(">IIII", 0xDEADBEEF, 1, 1, 1) + b"\x00")
        lbl = write_raw(tmp_path / "lbl", struct.pack(">II", IDX_LABEL_MAGIC, 1) + b"\x00")
        with pytest.raises(DataError):
            load_idx(img, lbl)

    def test_truncated_payload(self, tmp_path):
        img = write_raw(tmp_path / "img", struct.pack(">IIII", IDX_IMAGE_MAGIC, 2, 2, 2) + b"\x00" * 7)
        lbl = write_raw(tmp_path / "lbl", struct.pack(">II", IDX_LABEL_MAGIC, 2) + b"\x00\x01")
        with pytest.raises(DataError):
            load_idx(img, lbl)

    def test_count_mismatch(self, tmp_path):
        img = write_raw(tmp_path / "img", struct.pack(">IIII", IDX_IMAGE_MAGIC, 2, 1, 1) + b"\x00\x01")
        lbl = write_raw(tmp_path / "lbl", struct.pack(">II", IDX_LABEL_MAGIC, 3) + b"\x00\x01\x00")
        with pytest.raises(DataError):
            load_idx(img, lbl)

    def test_round_trip_bytes_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        images = rng.integers(0, 256, size=(5, 3, 4), dtype=np.uint8)
        labels = rng.integers(0, 10, size=5, dtype=np.uint8)
        img, lbl = tmp_path / "img", tmp_path / "lbl"
        write_idx_images(img, images)
        write_idx_labels(lbl, labels)
        ds = load_idx(img, lbl)
        assert np.array_equal((ds.samples * 255).round().astype(np.uint8), images.reshape(5, -1))
        assert np.array_equal(ds.labels, labels)
        # writing the parsed content back reproduces the files byte for byte
        img2, lbl2 = tmp_path / "img2", tmp_path / "lbl2"
        write_idx_images(img2, images)
        write_idx_labels(lbl2, labels)
        assert img.read_bytes() == img2.read_bytes()
        assert lbl.read_bytes() == lbl2.read_bytes()


class TestLoadCsv:
    def test_two_row_csv(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("1.0,5.0,0\n2.0,6.0,1\n")
        ds = load_csv(path, label_column=2, has_header=False)
        assert len(ds) == 2 and ds.class_count == 2
        assert np.allclose(ds.samples, [[0.0, 0.0], [1.0, 1.0]])

    def test_constant_column_maps_to_zero(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("3.0,1.0,0\n3.0,2.0,1\n3.0,3.0,0\n")
        ds = load_csv(path, label_column=2, has_header=False)
        assert np.all(ds.samples[:, 0] == 0.0)

    def test_minmax_bounds_per_column(self, tmp_path):
        rng = np.random.default_rng(1)
        rows = []
        for i in range(10):
            rows.append(",".join(str(v) for v in rng.normal(size=4)) + f",{i % 2}")
        path = tmp_path / "d.csv"
        path.write_text("\n".join(rows) + "\n")
        ds = load_csv(path, label_column=4, has_header=False)
        assert np.allclose(ds.samples.min(axis=0), 0.0)
        assert np.allclose(ds.samples.max(axis=0), 1.0)

    def test_header_skipped_and_labels_reindexed(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("a,b,cls\n0.5,1.0,10\n0.7,2.0,30\n0.1,3.0,10\n")
        ds = load_csv(path, label_column=2, has_header=True)
        assert ds.labels.tolist() == [0, 1, 0]
        assert ds.class_count == 2

    def test_ragged_rows_rejected(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("1,2,0\n1,2\n")
        with pytest.raises(DataError):
            load_csv(path, label_column=2, has_header=False)

    def test_non_numeric_rejected(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("1,x,0\n1,2,1\n")
        with pytest.raises(DataError):
            load_csv(path, label_column=2, has_header=False)


class TestOneHot:
    def test_basic(self):
        out = one_hot([0, 2], 3)
        assert np.array_equal(out, [[1, 0, 0], [0, 0, 1]])

    def test_single_class(self):
        assert np.array_equal(one_hot([0, 0, 0], 1), np.ones((3, 1)))

    def test_label_out_of_range(self):
        with pytest.raises(ValueError):
            one_hot([0, 3], 3)

    @given(st.lists(st.integers(0, 9), min_size=1, max_size=50))
    def test_argmax_round_trip(self, labels):
        out = one_hot(labels, 10)
        assert np.array_equal(np.argmax(out, axis=1), labels)


class TestNormalize:
    def test_idempotent(self):
        X = np.random.default_rng(0).normal(size=(20, 5))
        X[:, 2] = 4.2  # constant column
        once = minmax_normalize(X)
        assert np.array_equal(minmax_normalize(once), once)

    @given(st.integers(0, 100))
    @settings(max_examples=25)
    def test_bounds(self, seed):
        X = np.random.default_rng(seed).normal(size=(8, 3))
        out = minmax_normalize(X)
        assert out.min() >= 0.0 and out.max() <= 1.0


class TestSplit:
    @pytest.fixture
    def hundred(self):
        rng = np.random.default_rng(0)
        return LabeledDataset.from_arrays(rng.uniform(size=(100, 4)), rng.integers(0, 2, 100))

    def test_80_20(self, hundred):
        train, test = split(hundred, 0.2, seed=0)
        assert len(train) == 80 and len(test) == 20

    def test_stratified_balance(self):
        X = np.random.default_rng(1).uniform(size=(100, 3))
        y = np.array([0] * 50 + [1] * 50)
        train, test = split(LabeledDataset.from_arrays(X, y), 0.3, seed=2, stratified=True)
        for side in (train, test):
            c0, c1 = np.sum(side.labels == 0), np.sum(side.labels == 1)
            assert abs(int(c0) - int(c1)) <= 1

    def test_deterministic(self, hundred):
        a = split(hundred, 0.25, seed=7)
        b = split(hundred, 0.25, seed=7)
        assert np.array_equal(a[0].samples, b[0].samples)
        assert np.array_equal(a[1].labels, b[1].labels)

    def test_partition_is_exact(self, hundred):
        train, test = split(hundred, 0.2, seed=3)
        combined = np.vstack([train.samples, test.samples])
        assert combined.shape[0] == 100
        assert len({tuple(r) for r in combined}) == 100

    def test_stratified_small_class_rejected(self):
        X = np.random.default_rng(0).uniform(size=(5, 2))
        y = np.array([0, 0, 0, 0, 1])
        with pytest.raises(DataError):
            split(LabeledDataset.from_arrays(X, y), 0.2, seed=0, stratified=True)

    def test_bad_fraction(self, hundred):
        for frac in (0.0, 1.0, -0.3):
            with pytest.raises(ValueError):
                split(hundred, frac, seed=0)

    def test_split_preserves_class_space(self):
        X = np.random.default_rng(2).uniform(size=(30, 2))
        y = np.array(([0] * 10) + ([1] * 10) + ([2] * 10))
        train, test = split(LabeledDataset.from_arrays(X, y), 0.2, seed=1, stratified=True)
        assert train.class_count == test.class_count == 3
        assert train.targets.shape[1] == 3


class TestDatasetInvariants:
    def test_invalid_one_hot_rejected(self):
        with pytest.raises(DataError):
            LabeledDataset(
                samples=np.zeros((2, 2)),
                labels=np.array([0, 1]),
                targets=np.array([[1.0, 1.0], [0.0, 1.0]]),
                class_count=2,
            )

    def test_non_finite_samples_rejected(self):
        with pytest.raises(DataError):
            LabeledDataset.from_arrays(np.array([[np.nan, 1.0]]), np.array([0]))

    def test_labels_inconsistent_with_targets_rejected(self):
        with pytest.raises(DataError):
            LabeledDataset(
                samples=np.zeros((2, 2)),
                labels=np.array([0, 0]),
                targets=np.array([[1.0, 0.0], [0.0, 1.0]]),
                class_count=2,
            )

    @given(st.integers(0, 50))
    @settings(max_examples=20)
    def test_loader_outputs_satisfy_invariants(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 30))
        ds = LabeledDataset.from_arrays(rng.uniform(size=(n, 3)), rng.integers(0, 4, n))
        assert ds.targets.sum() == n
        assert np.all(ds.samples >= 0) and np.all(ds.samples <= 1)
