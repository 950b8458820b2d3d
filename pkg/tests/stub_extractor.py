"""A deterministic stand-in for the CNN feature extractor.

``pixel_features`` downsamples an image to a small grayscale grid and
flattens it: a tiny, fully deterministic "backbone" whose features respond
to pixel content (so occluding a region genuinely changes them).
``StubExtractorServer`` serves the same function over the /extract HTTP
protocol so service-level tests exercise the real transport path.
"""

from __future__ import annotations

import base64
import io
import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
from PIL import Image


def pixel_features(image: Image.Image, dim: int = 64) -> np.ndarray:
    """Grayscale thumbnail flattened to a `dim`-vector in [0.05, 1.05]."""
    side = int(round(dim**0.5))
    if side * side != dim:
        raise ValueError(f"dim must be a perfect square, got {dim}")
    small = image.convert("L").resize((side, side), Image.BILINEAR)
    vec = np.asarray(small, dtype=np.float64).ravel() / 255.0
    return vec + 0.05  # keep the norm safely non-zero


def extract_file(path: str, dim: int = 64) -> np.ndarray:
    with Image.open(path) as img:
        return pixel_features(img, dim)


class StubExtractorServer:
    """Threaded HTTP server answering POST /extract with pixel features.

    Accepts a single request object {id, image_b64} or a list of them, and
    mirrors the shape in the response. Counts requests for call-budget
    assertions.
    """

    def __init__(self, dim: int = 64):
        self.dim = dim
        self.calls = 0
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self) -> None:  # noqa: N802  (http.server API)
                if self.path.rstrip("/") != "/extract":
                    self.send_error(404)
                    return
                length = int(self.headers.get("Content-Length", 0))
                try:
                    body = json.loads(self.rfile.read(length))
                    batched = isinstance(body, list)
                    requests = body if batched else [body]
                    out = []
                    for req in requests:
                        raw = base64.b64decode(req["image_b64"])
                        with Image.open(io.BytesIO(raw)) as img:
                            vec = pixel_features(img, stub.dim)
                        out.append(
                            {"id": req.get("id", ""), "features": vec.tolist()}
                        )
                        stub.calls += 1
                except (KeyError, ValueError, OSError) as exc:
                    payload = json.dumps({"error": str(exc)}).encode()
                    self.send_response(400)
                    self.send_header("Content-Type", "application/json")
                    self.send_header("Content-Length", str(len(payload)))
                    self.end_headers()
                    self.wfile.write(payload)
                    return
                payload = json.dumps(out if batched else out[0]).encode()
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

            def log_message(self, *args) -> None:
                pass

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    def __enter__(self) -> "StubExtractorServer":
        self._thread.start()
        return self

    def __exit__(self, *exc_info) -> None:
        self._server.shutdown()
        self._server.server_close()
