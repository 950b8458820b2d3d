"""HTTP surface for the live labeling loop.

    GET  /api/pair                      next random pair to judge
    POST /api/comparison                record a judgment {winner, loser, session, ref?}
    POST /api/skip                      audit-log a skipped pair {a, b, session}
    POST /api/recompute                 rerun ranker + smoother over the full log
    GET  /api/scores                    [{id, mean, variance}], smoothed
    GET  /api/storyboard?n=&d=&method=  storyboard manifest
    GET  /api/saliency/{id}?window=&stride=   occlusion map JSON
    GET  /api/status                    log length, covered prefix, recompute state
    /images/...                         static image files

Image paths in score and storyboard payloads are URLs under /images/.
"""

from __future__ import annotations

import logging
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import saliency as saliency_mod
from . import storyboard as storyboard_mod
from .errors import ExtractorError, NumericalError
from .service import Session

logger = logging.getLogger(__name__)


class ComparisonIn(BaseModel):
    winner: str
    loser: str
    session: str = ""
    ref: str | None = None


class SkipIn(BaseModel):
    a: str
    b: str
    session: str = ""


def create_app(
    session: Session,
    images_root: str | Path | None = None,
    extractor_url: str | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="interestboard")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.session = session
    extractor = (
        saliency_mod.HttpExtractorClient(extractor_url) if extractor_url else None
    )

    def image_url(image_id: str) -> str:
        return f"/images/{session.store.path(image_id)}"

    @app.get("/api/pair")
    def get_pair() -> dict:
        try:
            a, b = session.sample_pair()
        except ValueError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {
            "a": {"id": a, "path": image_url(a)},
            "b": {"id": b, "path": image_url(b)},
        }

    @app.post("/api/comparison")
    def post_comparison(body: ComparisonIn) -> dict:
        try:
            length = session.record_comparison(
                body.winner, body.loser, body.session, ref=body.ref
            )
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"ok": True, "log_length": length}

    @app.post("/api/skip")
    def post_skip(body: SkipIn) -> dict:
        session.record_skip(body.a, body.b, body.session)
        return {"ok": True}

    @app.post("/api/recompute")
    def post_recompute() -> dict:
        try:
            result = session.recompute()
        except ValueError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except NumericalError as exc:
            raise HTTPException(status_code=500, detail=str(exc))
        if result is None:
            return {"ok": True, "coalesced": True, "status": session.status()}
        return {"ok": True, "coalesced": False, "status": session.status()}

    @app.get("/api/scores")
    def get_scores() -> list[dict]:
        scores = session.scores
        if scores is None:
            raise HTTPException(
                status_code=409, detail="no scores computed yet; record judgments and recompute"
            )
        return [
            {"id": image_id, "mean": float(m), "variance": float(v)}
            for image_id, m, v in zip(scores.ids, scores.means, scores.variances)
        ]

    @app.get("/api/storyboard")
    def get_storyboard(n: int = 24, d: int = 0, method: str = "interest") -> dict:
        capture_order = session.store.ids
        if method == "cluster":
            try:
                chosen = storyboard_mod.cluster_baseline(session.store, n)
            except ValueError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            score_map = {image_id: 0.0 for image_id in capture_order}
            if session.scores is not None:
                score_map = session.scores.score_map()
            complete = True
        elif method == "interest":
            scores = session.scores
            if scores is None:
                raise HTTPException(
                    status_code=409, detail="no scores computed yet; recompute first"
                )
            score_map = scores.score_map()
            try:
                result = storyboard_mod.select_top_spaced(
                    score_map,
                    capture_order,
                    storyboard_mod.StoryboardSpec(n, d),
                )
            except ValueError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            chosen, complete = result.ids, result.complete
        else:
            raise HTTPException(status_code=400, detail=f"unknown method {method!r}")
        index = {image_id: i for i, image_id in enumerate(capture_order)}
        return {
            "method": method,
            "complete": complete,
            "images": [
                {
                    "id": image_id,
                    "path": image_url(image_id),
                    "score": float(score_map[image_id]),
                    "capture_index": index[image_id],
                }
                for image_id in chosen
            ],
        }

    @app.get("/api/saliency/{image_id}")
    def get_saliency(image_id: str, window: int = 16, stride: int = 16) -> dict:
        if extractor is None:
            raise HTTPException(
                status_code=503, detail="no feature-extraction endpoint configured"
            )
        model = session.model
        if model is None:
            raise HTTPException(
                status_code=409, detail="no fitted model yet; recompute first"
            )
        if image_id not in session.store:
            raise HTTPException(status_code=404, detail=f"unknown image id {image_id!r}")
        if images_root is None:
            raise HTTPException(status_code=503, detail="no images root configured")
        image_path = Path(images_root) / session.store.path(image_id)
        try:
            cfg = saliency_mod.OcclusionConfig(window_px=window, stride_px=stride)
            smap = saliency_mod.occlusion_map(str(image_path), extractor, model, cfg)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except ExtractorError as exc:
            raise HTTPException(status_code=502, detail=str(exc))
        return smap.to_json_dict()

    @app.get("/api/status")
    def get_status() -> dict:
        return session.status()

    if images_root is not None:
        app.mount("/images", StaticFiles(directory=str(images_root)), name="images")
    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    return app
