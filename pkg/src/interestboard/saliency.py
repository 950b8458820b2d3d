"""Occlusion-sweep saliency: which image regions drive predicted interest.

A blank square slides over the image on a regular grid; each occluded variant
is re-featurized and re-scored, and the grid records the interest change
against the unoccluded baseline. A negative delta means the blanked region
was contributing interest (important, rendered red); positive means blanking
it raised interest (rendered blue). Variants are generated in memory and
handed straight to the extractor, never written to disk.
"""

from __future__ import annotations

import base64
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
import requests
from PIL import Image
from scipy.ndimage import map_coordinates

from . import gp
from .errors import ExtractorError

__all__ = [
    "OcclusionConfig",
    "SaliencyMap",
    "Extractor",
    "HttpExtractorClient",
    "occlusion_map",
    "render_overlay",
]

# An extractor maps an RGB image to a fixed-dimension feature vector.
Extractor = Callable[[Image.Image], np.ndarray]


@dataclass(frozen=True)
class OcclusionConfig:
    window_px: int = 16
    stride_px: int = 16
    image_size_px: int = 224
    blank_value: int = 128  # mid-gray: least out-of-distribution for CNN features

    def __post_init__(self) -> None:
        if self.window_px < 1 or self.window_px > self.image_size_px:
            raise ValueError(
                f"window_px must be in [1, image_size_px], got {self.window_px}"
            )
        if self.stride_px < 1:
            raise ValueError(f"stride_px must be >= 1, got {self.stride_px}")
        if not (0 <= self.blank_value <= 255):
            raise ValueError(f"blank_value must be an 8-bit intensity, got {self.blank_value}")

    @property
    def grid_cells(self) -> int:
        """Cells per axis: floor((image_size - window) / stride) + 1."""
        return (self.image_size_px - self.window_px) // self.stride_px + 1


@dataclass(frozen=True)
class SaliencyMap:
    """Grid of interest deltas: occluded-at-cell minus baseline."""

    grid: np.ndarray
    config: OcclusionConfig
    base_interest: float

    @property
    def rows(self) -> int:
        return self.grid.shape[0]

    @property
    def cols(self) -> int:
        return self.grid.shape[1]

    def to_json_dict(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "base_interest": self.base_interest,
            "deltas": [[float(x) for x in row] for row in self.grid],
            "config": {
                "window_px": self.config.window_px,
                "stride_px": self.config.stride_px,
                "image_size_px": self.config.image_size_px,
                "blank_value": self.config.blank_value,
            },
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "SaliencyMap":
        cfg = OcclusionConfig(**obj["config"])
        return cls(np.asarray(obj["deltas"], dtype=np.float64), cfg,
                   float(obj["base_interest"]))


class HttpExtractorClient:
    """Feature extraction over HTTP: POST {id, image_b64} -> {id, features}.

    Transient failures are retried a couple of times before an
    ExtractorError escapes to the caller.
    """

    def __init__(self, endpoint: str, timeout: float = 30.0, retries: int = 2):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self.retries = retries
        self._session = requests.Session()

    def __call__(self, image: Image.Image, request_id: str = "query") -> np.ndarray:
        buf = io.BytesIO()
        image.save(buf, format="PNG")
        payload = {
            "id": request_id,
            "image_b64": base64.b64encode(buf.getvalue()).decode("ascii"),
        }
        last_error: Exception | None = None
        for _ in range(self.retries + 1):
            try:
                resp = self._session.post(
                    self.endpoint + "/extract", json=payload, timeout=self.timeout
                )
                resp.raise_for_status()
                return np.asarray(resp.json()["features"], dtype=np.float64)
            except (requests.RequestException, KeyError, ValueError) as exc:
                last_error = exc
        raise ExtractorError(f"extraction failed at {self.endpoint}: {last_error}")


def _load_canvas(image: "Image.Image | str", size: int) -> Image.Image:
    if isinstance(image, Image.Image):
        img = image
    else:
        try:
            img = Image.open(image)
            img.load()
        except (OSError, ValueError) as exc:
            raise ValueError(f"cannot decode image {image!r}: {exc}") from exc
    img = img.convert("RGB")
    if img.size != (size, size):
        img = img.resize((size, size), Image.BILINEAR)
    return img


def occlusion_map(
    image: "Image.Image | str",
    extractor: Extractor,
    model: gp.GPModel,
    cfg: OcclusionConfig = OcclusionConfig(),
    max_workers: int = 1,
) -> SaliencyMap:
    """Sweep the blank window over the image and record interest deltas.

    Makes exactly rows*cols extractor calls plus one baseline call. Cells are
    independent, so the sweep can fan out over ``max_workers`` threads; the
    grid is assembled by index and therefore deterministic regardless of
    completion order. Extraction failures surface as ExtractorError naming
    the failed cell.
    """
    canvas = _load_canvas(image, cfg.image_size_px)
    base_vec = extractor(canvas)
    base_interest, _ = gp.predict(model, base_vec)

    cells = cfg.grid_cells
    blank = Image.new(
        "RGB", (cfg.window_px, cfg.window_px),
        (cfg.blank_value, cfg.blank_value, cfg.blank_value),
    )

    def score_cell(cell: tuple[int, int]) -> float:
        r, c = cell
        variant = canvas.copy()
        variant.paste(blank, (c * cfg.stride_px, r * cfg.stride_px))
        try:
            vec = extractor(variant)
        except ExtractorError as exc:
            raise ExtractorError(f"cell ({r}, {c}): {exc}") from exc
        mean, _ = gp.predict(model, vec)
        return mean - base_interest

    coords = [(r, c) for r in range(cells) for c in range(cells)]
    grid = np.zeros((cells, cells))
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            deltas = list(pool.map(score_cell, coords))
    else:
        deltas = [score_cell(cell) for cell in coords]
    for (r, c), delta in zip(coords, deltas):
        grid[r, c] = delta
    return SaliencyMap(grid, cfg, base_interest)


def _upsample_grid(grid: np.ndarray, cfg: OcclusionConfig) -> np.ndarray:
    """Bilinear upsampling of cell values to pixel resolution, with each cell
    anchored at its window's center and flat extension beyond the outermost
    centers."""
    size = cfg.image_size_px
    offset = (cfg.window_px - 1) / 2.0
    px = (np.arange(size) - offset) / cfg.stride_px
    rr, cc = np.meshgrid(px, px, indexing="ij")
    coords = np.stack([rr.ravel(), cc.ravel()])
    up = map_coordinates(grid, coords, order=1, mode="nearest")
    return up.reshape(size, size)


def render_overlay(smap: SaliencyMap, image: "Image.Image | str") -> Image.Image:
    """Tint the image by normalized interest deltas: red where blanking lost
    interest (important regions), blue where it gained, opacity proportional
    to |delta| / max|delta|. An all-zero map returns the image unchanged.

    The image must already be at the map's geometry (image_size_px square);
    a mismatch raises ValueError rather than silently resampling."""
    if isinstance(image, Image.Image):
        canvas = image.convert("RGB")
    else:
        canvas = Image.open(image).convert("RGB")
    size = smap.config.image_size_px
    if canvas.size != (size, size):
        raise ValueError(
            f"image geometry {canvas.size} does not match the saliency map "
            f"({size}, {size})"
        )
    expected = smap.config.grid_cells
    if smap.grid.shape != (expected, expected):
        raise ValueError(
            f"grid shape {smap.grid.shape} does not match config geometry "
            f"({expected}, {expected})"
        )

    max_abs = float(np.max(np.abs(smap.grid)))
    base = np.asarray(canvas, dtype=np.float64)
    if max_abs == 0.0 or math.isnan(max_abs):
        return Image.fromarray(base.astype(np.uint8))

    # Normalizing before upsampling makes the overlay a function of the
    # delta ratios only: scaling every delta by a positive constant cannot
    # change the rendering.
    up = _upsample_grid(smap.grid / max_abs, smap.config)
    alpha = np.abs(up)[..., None]
    color = np.zeros(base.shape)
    color[..., 0] = np.where(up < 0.0, 255.0, 0.0)
    color[..., 2] = np.where(up > 0.0, 255.0, 0.0)
    blended = np.rint(base * (1.0 - alpha) + color * alpha)
    return Image.fromarray(np.clip(blended, 0.0, 255.0).astype(np.uint8))
