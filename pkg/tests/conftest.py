from __future__ import annotations

import json

import numpy as np
import pytest
from PIL import Image

from interestboard.features import FeatureStore


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240811)


def random_store(rng: np.random.Generator, n: int, dim: int) -> FeatureStore:
    matrix = rng.standard_normal((n, dim))
    matrix /= np.linalg.norm(matrix, axis=1, keepdims=True)
    return FeatureStore.from_arrays([f"img{i:03d}" for i in range(n)], matrix)


@pytest.fixture
def store_factory():
    return random_store


def write_jsonl(path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


@pytest.fixture
def feature_file(tmp_path):
    """A small valid canonical feature file on disk."""
    path = tmp_path / "features.jsonl"
    rng = np.random.default_rng(7)
    write_jsonl(
        path,
        [
            {
                "id": f"img{i}",
                "path": f"img{i}.png",
                "features": rng.standard_normal(8).tolist(),
            }
            for i in range(5)
        ],
    )
    return path


def synthetic_image(seed: int, size: int = 224) -> Image.Image:
    """A deterministic structured test image (gradient plus rectangles)."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size]
    base = (xx + yy) / (2 * size) * 120.0 + 40.0
    canvas = np.stack([base, base * 0.8, base * 1.1], axis=-1)
    for _ in range(4):
        x0, y0 = rng.integers(0, size - 40, size=2)
        w, h = rng.integers(20, 40, size=2)
        color = rng.integers(0, 255, size=3)
        canvas[y0 : y0 + h, x0 : x0 + w] = color
    return Image.fromarray(np.clip(canvas, 0, 255).astype(np.uint8), "RGB")


@pytest.fixture
def image_factory():
    return synthetic_image
