import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pccdr.data import (
    DataMatrix,
    RunSeed,
    load_embedding,
    load_labels,
    load_matrix,
    save_embedding,
    save_matrix_raw,
    standardize,
)
from pccdr.errors import InvalidInput, ParseError


class TestRunSeed:
    def test_same_seed_same_stream(self):
        a = RunSeed(7).rng("x").standard_normal(5)
        b = RunSeed(7).rng("x").standard_normal(5)
        np.testing.assert_array_equal(a, b)

    def test_labels_separate_streams(self):
        a = RunSeed(7).rng("x").standard_normal(5)
        b = RunSeed(7).rng("y").standard_normal(5)
        assert not np.array_equal(a, b)

    def test_multi_label_streams(self):
        a = RunSeed(0).rng("kmeans", 4, "restart", 0).integers(0, 100, 8)
        b = RunSeed(0).rng("kmeans", 4, "restart", 1).integers(0, 100, 8)
        assert not np.array_equal(a, b)


class TestDataMatrix:
    def test_basic_shape(self):
        m = DataMatrix(np.ones((3, 2)))
        assert m.rows == 3 and m.cols == 2 and m.labels is None

    def test_rejects_nan(self):
        with pytest.raises(InvalidInput):
            DataMatrix(np.array([[1.0, np.nan]]))

    def test_rejects_wrong_label_length(self):
        with pytest.raises(InvalidInput):
            DataMatrix(np.ones((3, 2)), labels=[0, 1])

    def test_rejects_empty(self):
        with pytest.raises(InvalidInput):
            DataMatrix(np.ones((0, 2)))


class TestCsv:
    def test_direct_parse(self, tmp_path):
        p = tmp_path / "m.csv"
        p.write_text("1,2\n3,4\n")
        m = load_matrix(str(p))
        np.testing.assert_array_equal(m.values, [[1.0, 2.0], [3.0, 4.0]])

    def test_ragged_row_reports_index(self, tmp_path):
        p = tmp_path / "m.csv"
        p.write_text("1,2\n3\n")
        with pytest.raises(ParseError, match="row 2"):
            load_matrix(str(p))

    def test_non_numeric_cell(self, tmp_path):
        p = tmp_path / "m.csv"
        p.write_text("1,2\n3,apple\n")
        with pytest.raises(ParseError, match="row 2"):
            load_matrix(str(p))

    def test_nan_cell_is_value_error(self, tmp_path):
        p = tmp_path / "m.csv"
        p.write_text("1,2\n3,nan\n")
        with pytest.raises(ValueError):
            load_matrix(str(p))

    def test_header_skipped(self, tmp_path):
        p = tmp_path / "m.csv"
        p.write_text("a,b\n1,2\n")
        m = load_matrix(str(p), has_header=True)
        assert m.rows == 1

    def test_label_column_extracted(self, tmp_path):
        p = tmp_path / "m.csv"
        p.write_text("1,2,0\n3,4,1\n")
        m = load_matrix(str(p), label_column=2)
        assert m.cols == 2
        np.testing.assert_array_equal(m.labels, [0, 1])

    def test_non_integer_label_rejected(self, tmp_path):
        p = tmp_path / "m.csv"
        p.write_text("1,2,0.5\n")
        with pytest.raises(ParseError):
            load_matrix(str(p), label_column=2)

    def test_missing_file_is_os_error(self, tmp_path):
        with pytest.raises(OSError):
            load_matrix(str(tmp_path / "nope.csv"))


class TestRawF32:
    def test_round_trip_bit_exact(self, tmp_path):
        p = tmp_path / "m.bin"
        values = np.array([[1.5, -2.25], [0.125, 7.0], [3.0, 4.0]], dtype=np.float32)
        save_matrix_raw(values.astype(np.float64), str(p))
        m = load_matrix(str(p), format="raw-f32")
        np.testing.assert_array_equal(m.values, values.astype(np.float64))

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "m.bin"
        p.write_bytes(b"XXXX" + b"\0" * 12)
        with pytest.raises(ParseError, match="magic"):
            load_matrix(str(p), format="raw-f32")

    def test_size_mismatch(self, tmp_path):
        import struct

        p = tmp_path / "m.bin"
        p.write_bytes(struct.pack("<4sIII", b"PCCM", 3, 2, 0) + b"\0" * 4 * 5)
        with pytest.raises(ParseError, match="holds"):
            load_matrix(str(p), format="raw-f32")

    def test_unknown_format(self, tmp_path):
        with pytest.raises(InvalidInput):
            load_matrix(str(tmp_path / "m"), format="parquet")


class TestEmbeddingIO:
    def test_round_trip_exact(self, tmp_path, rng):
        p = tmp_path / "e.csv"
        emb = rng.standard_normal((5, 3))
        save_embedding(emb, str(p))
        back = load_embedding(str(p))
        np.testing.assert_array_equal(back, emb)

    def test_shape_of_file(self, tmp_path):
        p = tmp_path / "e.csv"
        save_embedding(np.ones((2, 3)), str(p))
        lines = p.read_text().strip().split("\n")
        assert len(lines) == 2
        assert all(len(line.split(",")) == 3 for line in lines)

    def test_empty_rejected(self, tmp_path):
        with pytest.raises(InvalidInput):
            save_embedding(np.empty((0, 2)), str(tmp_path / "e.csv"))

    def test_non_finite_rejected(self, tmp_path):
        with pytest.raises(InvalidInput):
            save_embedding(np.array([[np.inf, 0.0]]), str(tmp_path / "e.csv"))

    @given(
        arrays(
            np.float64,
            st.tuples(st.integers(1, 6), st.integers(1, 4)),
            elements=st.floats(-1e12, 1e12, allow_nan=False, width=64),
        )
    )
    def test_round_trip_property(self, emb):
        import tempfile, os

        fd, path = tempfile.mkstemp(suffix=".csv")
        os.close(fd)
        try:
            save_embedding(emb, path)
            np.testing.assert_array_equal(load_embedding(path), emb)
        finally:
            os.unlink(path)


class TestLabelsFile:
    def test_reads_ints(self, tmp_path):
        p = tmp_path / "l.csv"
        p.write_text("0\n2\n1\n")
        np.testing.assert_array_equal(load_labels(str(p)), [0, 2, 1])

    def test_rejects_fractional(self, tmp_path):
        p = tmp_path / "l.csv"
        p.write_text("0\n1.5\n")
        with pytest.raises(ParseError, match="row 2"):
            load_labels(str(p))


class TestStandardize:
    def test_two_point_column(self):
        out = standardize(DataMatrix(np.array([[1.0], [3.0]])))
        np.testing.assert_allclose(out.values, [[-1.0], [1.0]])

    def test_constant_column_zeroed(self):
        out = standardize(DataMatrix(np.array([[5.0], [5.0], [5.0]])))
        np.testing.assert_array_equal(out.values, np.zeros((3, 1)))

    def test_idempotent(self, rng):
        x = DataMatrix(rng.standard_normal((40, 3)) * 7 + 2)
        once = standardize(x)
        twice = standardize(once)
        np.testing.assert_allclose(twice.values, once.values, atol=1e-12)

    def test_needs_two_rows(self):
        with pytest.raises(InvalidInput):
            standardize(DataMatrix(np.ones((1, 2))))

    def test_labels_preserved(self):
        out = standardize(DataMatrix(np.array([[1.0], [3.0]]), labels=[4, 9]))
        np.testing.assert_array_equal(out.labels, [4, 9])
