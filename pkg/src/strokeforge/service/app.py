"""FastAPI application: image upload, job submission, progress streaming."""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path
from typing import Optional, Union

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.responses import StreamingResponse
from fastapi.staticfiles import StaticFiles

from ..errors import InputError
from ..image_io import histogram_stretch, load_gray, mask_png_bytes
from ..pipeline import (
    SamplePoint,
    SamplePointSet,
    restore,
    trace_csv_text,
)
from ..spline import curve_to_dict
from .models import (
    EnergyView,
    ImageCreated,
    JobCreated,
    JobParams,
    JobSubmission,
    JobView,
    PointIn,
    SnapshotView,
)
from .store import DONE, FAILED, RUNNING, TERMINAL, ImageStore, JobStore

MAX_UPLOAD_BYTES = 32 * 1024 * 1024


def _points_from_models(points) -> SamplePointSet:
    return SamplePointSet(
        [SamplePoint(x=p.x, y=p.y, r=p.r, kind=p.kind) for p in points]
    )


def create_app(data_dir: Optional[Union[str, Path]] = None) -> FastAPI:
    if data_dir is None:
        data_dir = os.environ.get("STROKEFORGE_DATA_DIR") or None
    root = Path(data_dir) if data_dir else None
    images = ImageStore(root)
    jobs = JobStore(root)
    app = FastAPI(title="strokeforge", version="0.1.0")

    def run_job(job_id: str) -> None:
        job = jobs.get(job_id)
        stored = images.get(job.image_id)
        try:
            jobs.set_status(job_id, RUNNING)
            params = JobParams(**job.params)
            img = stored.image
            if params.invert:
                from ..image_io import GrayImage

                img = GrayImage(1.0 - img.pixels)
            if params.stretch:
                img = histogram_stretch(img, params.stretch_lo, params.stretch_hi)
            points = _points_from_models([PointIn(**p) for p in job.points])

            def on_iteration(iteration, curve, breakdown):
                jobs.append_snapshot(
                    job_id,
                    {
                        "iteration": iteration,
                        "energy": breakdown.as_dict(),
                        "spline": curve_to_dict(curve),
                    },
                )

            result = restore(
                img,
                points,
                params.energy_params(),
                params.descent_config(),
                params.samples_per_interval,
                on_iteration,
            )
            jobs.attach_outputs(
                job_id,
                mask_png=mask_png_bytes(result.mask),
                spline_json=json.dumps(curve_to_dict(result.curve)),
                trace_csv=trace_csv_text(result.trace),
            )
            jobs.set_status(job_id, DONE)
        except Exception as exc:  # surfaced to the client via the job record
            jobs.set_status(job_id, FAILED, error=str(exc))

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/images", response_model=ImageCreated)
    async def upload_image(request: Request):
        raw = await request.body()
        if len(raw) > MAX_UPLOAD_BYTES:
            raise HTTPException(status_code=413, detail="image exceeds 32 MiB")
        if not raw:
            raise HTTPException(status_code=400, detail="empty upload")
        try:
            image = load_gray(raw)
        except InputError as exc:
            raise HTTPException(status_code=415, detail=str(exc))
        image_id = images.put(raw, image)
        return ImageCreated(id=image_id, width=image.width, height=image.height)

    @app.post("/jobs", response_model=JobCreated)
    def submit_job(submission: JobSubmission):
        stored = images.get(submission.image_id)
        if stored is None:
            raise HTTPException(status_code=404, detail="unknown image")
        points = _points_from_models(submission.points)
        try:
            points.validate((stored.image.width, stored.image.height))
        except InputError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        job = jobs.create(
            submission.image_id,
            [p.model_dump() for p in submission.points],
            submission.params.model_dump(),
        )
        threading.Thread(target=run_job, args=(job.job_id,), daemon=True).start()
        return JobCreated(job_id=job.job_id)

    def _get_job_or_404(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail="unknown job")
        return job

    @app.get("/jobs/{job_id}", response_model=JobView)
    def job_view(job_id: str):
        job = _get_job_or_404(job_id)
        return JobView(
            job_id=job.job_id,
            image_id=job.image_id,
            status=job.status,
            points=[PointIn(**p) for p in job.points],
            params=JobParams(**job.params),
            snapshots=[
                SnapshotView(
                    iteration=s["iteration"],
                    energy=EnergyView(**s["energy"]),
                    spline=s["spline"],
                )
                for s in job.snapshots
            ],
            error=job.error,
        )

    @app.get("/jobs/{job_id}/events")
    def job_events(job_id: str):
        _get_job_or_404(job_id)

        def stream():
            sent = 0
            while True:
                status, count, error = jobs.snapshot_view(job_id)
                while sent < count:
                    job = jobs.get(job_id)
                    payload = json.dumps(job.snapshots[sent])
                    yield f"event: iteration\ndata: {payload}\n\n"
                    sent += 1
                if status in TERMINAL and sent == count:
                    payload = json.dumps({"status": status, "error": error})
                    yield f"event: {status}\ndata: {payload}\n\n"
                    return
                jobs.wait_for_change(job_id, sent)

        return StreamingResponse(stream(), media_type="text/event-stream")

    def _finished_artifact(job_id: str, attr: str):
        job = _get_job_or_404(job_id)
        if job.status == FAILED:
            raise HTTPException(status_code=409, detail=f"job failed: {job.error}")
        value = getattr(job, attr)
        if job.status != DONE or value is None:
            raise HTTPException(status_code=409, detail="job not finished")
        return value

    @app.get("/jobs/{job_id}/mask.png")
    def job_mask(job_id: str):
        return Response(content=_finished_artifact(job_id, "mask_png"), media_type="image/png")

    @app.get("/jobs/{job_id}/spline.json")
    def job_spline(job_id: str):
        return Response(
            content=_finished_artifact(job_id, "spline_json"), media_type="application/json"
        )

    @app.get("/jobs/{job_id}/trace.csv")
    def job_trace(job_id: str):
        return Response(content=_finished_artifact(job_id, "trace_csv"), media_type="text/csv")

    ui_dir = os.environ.get("STROKEFORGE_UI_DIR")
    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
