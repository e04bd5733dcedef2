import numpy as np
import pytest

from lexcat.errors import InputError
from lexcat.featfile import (read_feature_matrix, read_features, write_feature_matrix,
                             write_features)


class TestTextFeatures:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "feats.csv"
        write_features(path, ("a", "b"), [[0.5, 1.0], [2.0, -0.25]],
                       ids=["s0", "s1"], meta={"seed": 3, "method": "bow"})
        meta, cats, ids, matrix = read_features(path)
        assert meta == {"seed": "3", "method": "bow"}
        assert cats == ("a", "b")
        assert ids == ["s0", "s1"]
        np.testing.assert_allclose(matrix, [[0.5, 1.0], [2.0, -0.25]])

    def test_layout(self, tmp_path):
        path = tmp_path / "feats.csv"
        write_features(path, ("a",), [[1], [0.123456789]], meta={"k": "v"})
        lines = path.read_text().splitlines()
        assert lines[0] == "# k=v"
        assert lines[1] == "id,a"
        assert lines[2] == "0,1"
        assert lines[3] == "1,0.123457"  # 6 significant digits

    def test_meta_sorted(self, tmp_path):
        path = tmp_path / "feats.csv"
        write_features(path, ("a",), [[1.0]], meta={"z": 1, "a": 2})
        lines = path.read_text().splitlines()
        assert lines[0] == "# a=2" and lines[1] == "# z=1"

    def test_ragged_row_rejected(self, tmp_path):
        with pytest.raises(InputError):
            write_features(tmp_path / "x.csv", ("a", "b"), [[1.0]])

    def test_id_count_mismatch(self, tmp_path):
        with pytest.raises(InputError):
            write_features(tmp_path / "x.csv", ("a",), [[1.0]], ids=["s0", "s1"])

    def test_read_rejects_missing_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("# only=meta\n")
        with pytest.raises(InputError, match="header"):
            read_features(path)

    def test_read_rejects_non_numeric(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("id,a\ns0,xyz\n")
        with pytest.raises(InputError):
            read_features(path)


class TestBinaryFeatures:
    def test_lossless_round_trip(self, tmp_path):
        path = tmp_path / "feats.embs"
        rows = np.array([[0.1234567, -9.87], [1e-5, 3.25]], dtype=np.float32)
        write_feature_matrix(path, ("a", "b"), rows, ids=["x", "y"],
                             meta={"method": "centroid"})
        meta, cats, ids, matrix = read_feature_matrix(path)
        assert meta == {"method": "centroid"}
        assert cats == ("a", "b")
        assert ids == ["x", "y"]
        np.testing.assert_array_equal(matrix.astype(np.float32), rows)

    def test_missing_columns_meta(self, tmp_path):
        from lexcat.embedding import EmbeddingStore, write_embedding_store
        path = tmp_path / "plain.embs"
        write_embedding_store(EmbeddingStore(2, {"k": [1.0, 2.0]}), path)
        with pytest.raises(InputError, match="columns"):
            read_feature_matrix(path)

    def test_rewrite_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.embs", tmp_path / "b.embs"
        rows = [[1.5, 2.5], [3.5, 4.5]]
        write_feature_matrix(a, ("u", "v"), rows, meta={"m": "1"})
        meta, cats, ids, matrix = read_feature_matrix(a)
        write_feature_matrix(b, cats, matrix, ids=ids, meta=meta)
        assert a.read_bytes() == b.read_bytes()
