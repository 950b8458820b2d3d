"""Per-image feature vectors: loading, validation, cosine distance, kernel.

The canonical feature file is line-delimited JSON, one record per line:

    {"id": "frame_000123", "path": "frames/000123.jpg", "features": [..D floats..]}

All records in one file must share the dimension D and have non-zero norm.
Paths are interpreted relative to the feature file's directory.

For large stores a flat binary sidecar is also accepted: a JSON header object
(single-object file) with keys ``{"ids", "paths", "dim", "data_file"}`` next
to a little-endian float32 row-major matrix file. The JSON-lines form remains
the canonical interchange format.

Similarity between vectors is cosine distance (1 - cosine similarity, range
[0, 2]) pushed through an RBF kernel ``exp(-d / (2 * length_scale**2))``, so
the kernel value lives in [exp(-1/length_scale**2), 1]. Note this kernel is
not guaranteed positive semi-definite on arbitrary vector sets; the smoother
compensates with jitter.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import FeatureLoadError, NumericalError

__all__ = [
    "FeatureVector",
    "KernelConfig",
    "FeatureStore",
    "load_features",
    "write_features_jsonl",
    "write_features_binary",
    "cosine_distance",
    "kernel_value",
    "cosine_distance_matrix",
    "kernel_matrix",
]


@dataclass(frozen=True)
class FeatureVector:
    image_id: str
    image_path: str
    features: np.ndarray


@dataclass(frozen=True)
class KernelConfig:
    """RBF-on-cosine-distance kernel parameters.

    ``length_scale`` controls how quickly shared interest decays with feature
    dissimilarity; ``jitter`` is the starting diagonal regularizer used by the
    smoother's factorization.
    """

    length_scale: float = 1.0
    jitter: float = 1e-8

    def __post_init__(self) -> None:
        if not (self.length_scale > 0.0 and math.isfinite(self.length_scale)):
            raise ValueError(f"length_scale must be > 0, got {self.length_scale}")
        if self.jitter < 0.0:
            raise ValueError(f"jitter must be >= 0, got {self.jitter}")


class FeatureStore:
    """Immutable, insertion-ordered collection of per-image feature vectors.

    Insertion order is meaningful: it is the capture order used by the
    storyboard spacing rule. Lookup by id is O(1).
    """

    def __init__(self, ids: Sequence[str], matrix: np.ndarray, paths: Sequence[str]):
        if len(ids) != len(paths) or len(ids) != matrix.shape[0]:
            raise ValueError("ids, paths and matrix rows must have equal length")
        self._ids = list(ids)
        self._paths = list(paths)
        self._matrix = np.ascontiguousarray(matrix, dtype=np.float64)
        self._matrix.setflags(write=False)
        self._index = {image_id: i for i, image_id in enumerate(self._ids)}
        if len(self._index) != len(self._ids):
            raise ValueError("duplicate image ids")

    @classmethod
    def empty(cls) -> "FeatureStore":
        return cls([], np.zeros((0, 0)), [])

    @classmethod
    def from_arrays(
        cls,
        ids: Sequence[str],
        matrix: np.ndarray,
        paths: Sequence[str] | None = None,
    ) -> "FeatureStore":
        if paths is None:
            paths = [f"{image_id}.png" for image_id in ids]
        return cls(ids, matrix, paths)

    def __len__(self) -> int:
        return len(self._ids)

    def __contains__(self, image_id: str) -> bool:
        return image_id in self._index

    @property
    def ids(self) -> list[str]:
        return list(self._ids)

    @property
    def dim(self) -> int | None:
        """Feature dimension D, or None for an empty store."""
        if not self._ids:
            return None
        return self._matrix.shape[1]

    @property
    def matrix(self) -> np.ndarray:
        """(n, D) read-only feature matrix in insertion order."""
        return self._matrix

    def index_of(self, image_id: str) -> int:
        try:
            return self._index[image_id]
        except KeyError:
            raise KeyError(f"unknown image id: {image_id!r}") from None

    def vector(self, image_id: str) -> np.ndarray:
        return self._matrix[self.index_of(image_id)]

    def path(self, image_id: str) -> str:
        return self._paths[self.index_of(image_id)]

    def matrix_for(self, ids: Sequence[str]) -> np.ndarray:
        rows = [self.index_of(image_id) for image_id in ids]
        return self._matrix[rows]

    def records(self) -> Iterable[FeatureVector]:
        for i, image_id in enumerate(self._ids):
            yield FeatureVector(image_id, self._paths[i], self._matrix[i])


def _validate_record(
    record_no: int, image_id: str, vec: np.ndarray, dim: int | None, seen: set[str]
) -> None:
    if image_id in seen:
        raise FeatureLoadError(f"record {record_no}: duplicate id {image_id!r}")
    if dim is not None and vec.shape[0] != dim:
        raise FeatureLoadError(
            f"record {record_no}: dimension mismatch (got {vec.shape[0]}, expected {dim})"
        )
    if not np.all(np.isfinite(vec)):
        raise FeatureLoadError(f"record {record_no}: non-finite feature value")
    if float(np.linalg.norm(vec)) == 0.0:
        raise FeatureLoadError(f"record {record_no}: zero-norm feature vector")


def load_features(path: str | os.PathLike) -> FeatureStore:
    """Load a feature store from the canonical JSON-lines file or a binary
    sidecar header. Raises FeatureLoadError naming the offending record on
    any validation failure."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if not stripped:
        return FeatureStore.empty()
    # A single JSON object with a data_file key is a binary sidecar header.
    if stripped.startswith("{"):
        try:
            header = json.loads(text)
        except json.JSONDecodeError:
            header = None
        if isinstance(header, dict) and "data_file" in header:
            return _load_binary(path, header)
    return _load_jsonl(path, text)


def _load_jsonl(path: str | os.PathLike, text: str) -> FeatureStore:
    ids: list[str] = []
    paths: list[str] = []
    rows: list[np.ndarray] = []
    dim: int | None = None
    seen: set[str] = set()
    for record_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FeatureLoadError(f"record {record_no}: invalid JSON ({exc})") from exc
        try:
            image_id = str(obj["id"])
            rel_path = str(obj.get("path", ""))
            vec = np.asarray(obj["features"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as exc:
            raise FeatureLoadError(f"record {record_no}: malformed record ({exc})") from exc
        if vec.ndim != 1:
            raise FeatureLoadError(f"record {record_no}: features must be a flat list")
        _validate_record(record_no, image_id, vec, dim, seen)
        dim = vec.shape[0] if dim is None else dim
        seen.add(image_id)
        ids.append(image_id)
        paths.append(rel_path)
        rows.append(vec)
    if not ids:
        return FeatureStore.empty()
    return FeatureStore(ids, np.vstack(rows), paths)


def _load_binary(path: str | os.PathLike, header: dict) -> FeatureStore:
    try:
        ids = [str(x) for x in header["ids"]]
        dim = int(header["dim"])
        data_file = str(header["data_file"])
        paths = [str(x) for x in header.get("paths", [f"{i}.png" for i in ids])]
    except (KeyError, TypeError, ValueError) as exc:
        raise FeatureLoadError(f"binary header: malformed ({exc})") from exc
    data_path = os.path.join(os.path.dirname(os.fspath(path)), data_file)
    raw = np.fromfile(data_path, dtype="<f4")
    if raw.size != len(ids) * dim:
        raise FeatureLoadError(
            f"binary data: expected {len(ids) * dim} float32 values, found {raw.size}"
        )
    matrix = raw.reshape(len(ids), dim).astype(np.float64)
    seen: set[str] = set()
    for i, image_id in enumerate(ids):
        _validate_record(i + 1, image_id, matrix[i], dim, seen)
        seen.add(image_id)
    return FeatureStore(ids, matrix, paths)


def write_features_jsonl(store: FeatureStore, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in store.records():
            fh.write(
                json.dumps(
                    {
                        "id": rec.image_id,
                        "path": rec.image_path,
                        "features": [float(x) for x in rec.features],
                    }
                )
                + "\n"
            )


def write_features_binary(store: FeatureStore, header_path: str | os.PathLike) -> None:
    """Write the binary sidecar form: header JSON plus <header>.bin matrix."""
    if store.dim is None:
        raise ValueError("cannot write an empty store in binary form")
    base = os.fspath(header_path)
    data_file = os.path.basename(base) + ".bin"
    store.matrix.astype("<f4").tofile(os.path.join(os.path.dirname(base) or ".", data_file))
    header = {
        "format": "interestboard-features-v1",
        "dim": store.dim,
        "ids": store.ids,
        "paths": [store.path(i) for i in store.ids],
        "data_file": data_file,
    }
    with open(base, "w", encoding="utf-8") as fh:
        json.dump(header, fh)


def _unit_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=-1, keepdims=True)
    if np.any(norms == 0.0):
        raise NumericalError("zero-norm vector has no cosine distance")
    return matrix / norms


def cosine_distance(a: np.ndarray, b: np.ndarray) -> float:
    """1 - cosine similarity, in [0, 2]. Raises NumericalError on zero norm."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise NumericalError("zero-norm vector has no cosine distance")
    if np.array_equal(a, b):
        return 0.0
    sim = float(np.dot(a / na, b / nb))
    return min(max(1.0 - sim, 0.0), 2.0)


def kernel_value(a: np.ndarray, b: np.ndarray, cfg: KernelConfig) -> float:
    """RBF kernel on cosine distance: exp(-d(a, b) / (2 * length_scale**2))."""
    d = cosine_distance(a, b)
    return math.exp(-d / (2.0 * cfg.length_scale**2))


def cosine_distance_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(n, m) pairwise cosine distances between row sets, clipped to [0, 2]."""
    sims = _unit_rows(np.asarray(a, dtype=np.float64)) @ _unit_rows(
        np.asarray(b, dtype=np.float64)
    ).T
    return np.clip(1.0 - sims, 0.0, 2.0)


def kernel_matrix(a: np.ndarray, b: np.ndarray, cfg: KernelConfig) -> np.ndarray:
    """(n, m) kernel matrix over row sets."""
    return np.exp(-cosine_distance_matrix(a, b) / (2.0 * cfg.length_scale**2))
