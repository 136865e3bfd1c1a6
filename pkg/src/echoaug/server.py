"""HTTP service for the blinded survey.

Serves image pairs and records forced choices. Pair payloads carry only
opaque image references; nothing delivered to a participant reveals
which side is synthetic. The summary endpoint is meant for the admin
view after data collection.
"""

import re
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .survey import (
    DuplicateResponseError,
    SurveyResponse,
    summarize,
    summary_to_dict,
)

_IMAGE_ID = re.compile(r"^[A-Za-z0-9_\-]+$")


class ResponseBody(BaseModel):
    participant_id: str
    group: str
    pair_index: int
    selection: str
    tag: str
    explanation: str = ""


def create_app(plan, store, ui_dir=None):
    app = FastAPI(title="echoaug survey")

    @app.get("/api/pair/{index}")
    def get_pair(index: int):
        if not 0 <= index < len(plan.pairs):
            raise HTTPException(status_code=404, detail=f"no pair {index}")
        pair = plan.pairs[index]
        # opaque references only: the blinding invariant
        return {
            "index": index,
            "total": len(plan.pairs),
            "left": f"/api/image/{pair.left_id}",
            "right": f"/api/image/{pair.right_id}",
        }

    @app.get("/api/image/{image_id}")
    def get_image(image_id: str):
        if not _IMAGE_ID.match(image_id) or image_id not in plan.images:
            raise HTTPException(status_code=404, detail="unknown image")
        path = Path(plan.images[image_id])
        if not path.is_file():
            raise HTTPException(status_code=404, detail="image file missing")
        return FileResponse(path, media_type="image/png")

    @app.post("/api/response")
    def post_response(body: ResponseBody):
        response = SurveyResponse(
            participant_id=body.participant_id,
            group=body.group,
            pair_index=body.pair_index,
            selection=body.selection,
            tag=body.tag,
            explanation=body.explanation,
        )
        try:
            progress = store.record(response)
        except DuplicateResponseError as exc:
            return JSONResponse(status_code=409, content={"detail": str(exc)})
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return {"status": "stored", **progress}

    @app.get("/api/progress/{participant_id}")
    def get_progress(participant_id: str):
        return store.progress(participant_id)

    @app.get("/api/summary")
    def get_summary():
        return summary_to_dict(summarize(store, plan))

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
