"""Batch extraction: image directory -> canonical feature file."""

from __future__ import annotations

import json
import logging
from pathlib import Path

from PIL import Image, UnidentifiedImageError

from .backbone import Backbone

logger = logging.getLogger(__name__)

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".gif", ".tiff", ".webp"}


def extract_batch(
    image_dir: str | Path,
    out_path: str | Path,
    backbone: Backbone,
    batch_size: int = 16,
) -> int:
    """Write one JSON-lines feature record per decodable image, in sorted
    filename order (capture order for sequentially named frames). Undecodable
    files are skipped with a warning. Returns the number of records written.
    """
    image_dir = Path(image_dir)
    files = sorted(
        p for p in image_dir.iterdir()
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    )
    if not files:
        raise ValueError(f"no image files found in {image_dir}")

    written = 0
    with open(out_path, "w", encoding="utf-8") as out:
        pending: list[tuple[str, str, Image.Image]] = []

        def flush() -> None:
            nonlocal written
            if not pending:
                return
            features = backbone.extract([img for _, _, img in pending])
            for (image_id, rel_path, img), vec in zip(pending, features):
                out.write(
                    json.dumps(
                        {
                            "id": image_id,
                            "path": rel_path,
                            "features": [float(x) for x in vec],
                        }
                    )
                    + "\n"
                )
                img.close()
                written += 1
            pending.clear()

        for path in files:
            try:
                img = Image.open(path)
                img.load()
            except (UnidentifiedImageError, OSError) as exc:
                logger.warning("skipping undecodable image %s: %s", path.name, exc)
                continue
            pending.append((path.stem, path.name, img))
            if len(pending) >= batch_size:
                flush()
        flush()
    if written == 0:
        raise ValueError(f"no decodable images in {image_dir}")
    return written
