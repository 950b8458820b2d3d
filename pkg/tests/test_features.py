import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from interestboard.errors import FeatureLoadError, NumericalError
from interestboard.features import (
    FeatureStore,
    KernelConfig,
    cosine_distance,
    cosine_distance_matrix,
    kernel_matrix,
    kernel_value,
    load_features,
    write_features_binary,
    write_features_jsonl,
)
from conftest import write_jsonl


class TestLoadFeatures:
    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        store = load_features(path)
        assert len(store) == 0
        assert store.dim is None

    def test_paper_scale_dimension(self, tmp_path):
        path = tmp_path / "f.jsonl"
        rng = np.random.default_rng(0)
        write_jsonl(
            path,
            [
                {"id": f"i{k}", "path": f"i{k}.jpg", "features": rng.normal(size=2048).tolist()}
                for k in range(3)
            ],
        )
        store = load_features(path)
        assert len(store) == 3
        assert store.dim == 2048

    def test_dimension_mismatch_names_record(self, tmp_path):
        path = tmp_path / "f.jsonl"
        write_jsonl(
            path,
            [
                {"id": "a", "path": "a.jpg", "features": [1.0] * 2048},
                {"id": "b", "path": "b.jpg", "features": [1.0] * 512},
            ],
        )
        with pytest.raises(FeatureLoadError, match="record 2"):
            load_features(path)

    def test_duplicate_id_rejected(self, tmp_path):
        path = tmp_path / "f.jsonl"
        write_jsonl(
            path,
            [
                {"id": "a", "path": "a.jpg", "features": [1.0, 2.0]},
                {"id": "a", "path": "b.jpg", "features": [2.0, 1.0]},
            ],
        )
        with pytest.raises(FeatureLoadError, match="record 2.*duplicate"):
            load_features(path)

    def test_zero_norm_rejected(self, tmp_path):
        path = tmp_path / "f.jsonl"
        write_jsonl(
            path,
            [
                {"id": "a", "path": "a.jpg", "features": [1.0, 2.0]},
                {"id": "b", "path": "b.jpg", "features": [0.0, 0.0]},
            ],
        )
        with pytest.raises(FeatureLoadError, match="record 2.*zero-norm"):
            load_features(path)

    def test_invalid_json_names_record(self, tmp_path):
        path = tmp_path / "f.jsonl"
        path.write_text('{"id": "a", "path": "a", "features": [1, 2]}\nnot json\n')
        with pytest.raises(FeatureLoadError, match="record 2"):
            load_features(path)

    def test_insertion_order_and_lookup(self, feature_file):
        store = load_features(feature_file)
        assert store.ids == [f"img{i}" for i in range(5)]
        assert "img3" in store
        assert store.index_of("img3") == 3
        assert store.path("img3") == "img3.png"
        with pytest.raises(KeyError):
            store.vector("nope")

    def test_jsonl_round_trip(self, feature_file, tmp_path):
        store = load_features(feature_file)
        out = tmp_path / "copy.jsonl"
        write_features_jsonl(store, out)
        again = load_features(out)
        assert again.ids == store.ids
        np.testing.assert_array_equal(again.matrix, store.matrix)

    def test_binary_sidecar_round_trip(self, feature_file, tmp_path):
        store = load_features(feature_file)
        header = tmp_path / "features.header.json"
        write_features_binary(store, header)
        again = load_features(header)
        assert again.ids == store.ids
        assert again.dim == store.dim
        # float32 sidecar: values agree to float32 resolution
        np.testing.assert_allclose(again.matrix, store.matrix, atol=1e-6)

    def test_binary_sidecar_size_mismatch(self, feature_file, tmp_path):
        store = load_features(feature_file)
        header = tmp_path / "features.header.json"
        write_features_binary(store, header)
        obj = json.loads(header.read_text())
        obj["ids"].append("extra")
        obj["paths"].append("extra.png")
        header.write_text(json.dumps(obj))
        with pytest.raises(FeatureLoadError, match="float32"):
            load_features(header)


class TestCosineDistance:
    def test_identical_is_zero(self):
        a = np.array([0.3, -1.2, 4.0])
        assert cosine_distance(a, a) == 0.0

    def test_orthogonal_is_one(self):
        assert cosine_distance(np.array([1.0, 0.0]), np.array([0.0, 2.0])) == 1.0

    def test_antipodal_is_two(self):
        a = np.array([1.0, -2.0, 0.5])
        assert cosine_distance(a, -a) == pytest.approx(2.0, abs=1e-12)

    def test_zero_norm_raises(self):
        with pytest.raises(NumericalError):
            cosine_distance(np.zeros(3), np.ones(3))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            cosine_distance(np.ones(3), np.ones(4))

    @given(
        st.lists(st.floats(-10, 10), min_size=3, max_size=3),
        st.lists(st.floats(-10, 10), min_size=3, max_size=3),
        st.floats(1e-3, 1e3),
        st.floats(1e-3, 1e3),
    )
    def test_scale_invariance(self, a, b, alpha, beta):
        a, b = np.array(a), np.array(b)
        if np.linalg.norm(a) < 1e-6 or np.linalg.norm(b) < 1e-6:
            return
        d1 = cosine_distance(a, b)
        d2 = cosine_distance(alpha * a, beta * b)
        assert d2 == pytest.approx(d1, abs=1e-12)
        assert 0.0 <= d1 <= 2.0


class TestKernel:
    CFG = KernelConfig(length_scale=1.0, jitter=0.0)

    def test_self_similarity_is_one(self):
        a = np.array([0.1, 0.7, -0.3])
        assert kernel_value(a, a, self.CFG) == 1.0

    def test_antipodal_value(self):
        a = np.array([1.0, 0.0])
        assert kernel_value(a, -a, self.CFG) == pytest.approx(math.exp(-1.0), rel=1e-12)

    def test_long_length_scale_saturates(self):
        a, b = np.array([1.0, 0.0]), np.array([-1.0, 0.0])
        assert kernel_value(a, b, KernelConfig(length_scale=1e8)) == pytest.approx(
            1.0, abs=1e-12
        )

    def test_floor_and_ceiling(self, rng):
        cfg = KernelConfig(length_scale=0.7)
        floor = math.exp(-1.0 / cfg.length_scale**2)
        for _ in range(100):
            a, b = rng.normal(size=(2, 5))
            k = kernel_value(a, b, cfg)
            assert floor - 1e-12 <= k <= 1.0
            assert k <= kernel_value(a, a, cfg)

    def test_matrix_agrees_with_scalar(self, rng):
        a = rng.normal(size=(4, 6))
        b = rng.normal(size=(3, 6))
        cfg = KernelConfig()
        km = kernel_matrix(a, b, cfg)
        for i in range(4):
            for j in range(3):
                assert km[i, j] == pytest.approx(
                    kernel_value(a[i], b[j], cfg), abs=1e-12
                )

    def test_invalid_config(self):
        with pytest.raises(ValueError):
            KernelConfig(length_scale=0.0)
        with pytest.raises(ValueError):
            KernelConfig(jitter=-1e-9)

    def test_distance_matrix_zero_norm(self):
        with pytest.raises(NumericalError):
            cosine_distance_matrix(np.zeros((2, 3)), np.ones((2, 3)))


class TestFeatureStore:
    def test_equal_length_enforced(self):
        with pytest.raises(ValueError):
            FeatureStore(["a"], np.ones((2, 2)), ["a.png", "b.png"])

    def test_duplicate_ids_rejected(self):
        with pytest.raises(ValueError):
            FeatureStore.from_arrays(["a", "a"], np.ones((2, 2)))

    def test_matrix_for_selects_rows(self, rng):
        store = FeatureStore.from_arrays(["a", "b", "c"], rng.normal(size=(3, 4)))
        sub = store.matrix_for(["c", "a"])
        np.testing.assert_array_equal(sub[0], store.vector("c"))
        np.testing.assert_array_equal(sub[1], store.vector("a"))

    def test_matrix_is_read_only(self, rng):
        store = FeatureStore.from_arrays(["a"], rng.normal(size=(1, 4)))
        with pytest.raises(ValueError):
            store.matrix[0, 0] = 5.0
