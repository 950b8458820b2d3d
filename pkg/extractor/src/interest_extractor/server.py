"""HTTP extraction service: POST /extract -> feature vectors.

Requests carry exactly one of ``image_b64`` or ``image_path`` plus an ``id``
that is echoed back. A JSON list of requests is answered with a JSON list
(request batching); a single object gets a single object. Malformed requests
are 400s, model failures 500s, both with machine-readable detail.
"""

from __future__ import annotations

import base64
import binascii
import logging
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from PIL import Image, UnidentifiedImageError

from .backbone import Backbone

logger = logging.getLogger(__name__)


def create_app(backbone: Backbone, image_root: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="interest-extractor")
    app.state.backbone = backbone
    root = Path(image_root) if image_root else None

    def feature_payload(req: dict) -> dict:
        if not isinstance(req, dict):
            raise HTTPException(status_code=400, detail="request must be an object")
        has_bytes = "image_b64" in req
        has_path = "image_path" in req
        if has_bytes == has_path:
            raise HTTPException(
                status_code=400,
                detail="provide exactly one of image_b64 or image_path",
            )
        try:
            if has_bytes:
                raw = base64.b64decode(req["image_b64"], validate=True)
                vec = backbone.extract_bytes(raw)
            else:
                path = Path(req["image_path"])
                if root is not None and not path.is_absolute():
                    path = root / path
                vec = backbone.extract_path(path)
        except (binascii.Error, UnidentifiedImageError, OSError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=f"bad image: {exc}")
        except Exception as exc:  # model failure
            logger.exception("extraction failed")
            raise HTTPException(status_code=500, detail=f"extraction failed: {exc}")
        return {"id": str(req.get("id", "")), "features": [float(x) for x in vec]}

    @app.post("/extract")
    async def extract(request: Request):
        try:
            body = await request.json()
        except Exception:
            raise HTTPException(status_code=400, detail="body must be JSON")
        if isinstance(body, list):
            return [feature_payload(req) for req in body]
        return feature_payload(body)

    @app.get("/healthz")
    def healthz() -> dict:
        return {"ok": True, "backbone": backbone.name, "dim": backbone.dim}

    return app
