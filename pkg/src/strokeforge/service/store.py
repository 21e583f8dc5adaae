"""In-memory stores for uploaded images and restoration jobs.

Images are content-addressed by SHA-256, so re-uploading identical bytes is
idempotent. Jobs append per-iteration snapshots under a condition variable
that event streams wait on; once a job reaches a terminal status its record
never changes again. An optional data directory persists uploads and
finished job records as plain files.
"""

from __future__ import annotations

import hashlib
import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from ..image_io import GrayImage

QUEUED = "queued"
RUNNING = "running"
DONE = "done"
FAILED = "failed"
TERMINAL = (DONE, FAILED)


@dataclass
class StoredImage:
    image_id: str
    raw: bytes
    image: GrayImage


class ImageStore:
    def __init__(self, data_dir: Optional[Path] = None):
        self._images: Dict[str, StoredImage] = {}
        self._lock = threading.Lock()
        self._dir = data_dir

    def put(self, raw: bytes, image: GrayImage) -> str:
        image_id = hashlib.sha256(raw).hexdigest()
        with self._lock:
            if image_id not in self._images:
                self._images[image_id] = StoredImage(image_id, raw, image)
                if self._dir is not None:
                    images_dir = self._dir / "images"
                    images_dir.mkdir(parents=True, exist_ok=True)
                    (images_dir / f"{image_id}.png").write_bytes(raw)
        return image_id

    def get(self, image_id: str) -> Optional[StoredImage]:
        with self._lock:
            return self._images.get(image_id)


@dataclass
class JobRecord:
    job_id: str
    image_id: str
    points: list
    params: dict
    status: str = QUEUED
    snapshots: List[dict] = field(default_factory=list)
    error: Optional[str] = None
    mask_png: Optional[bytes] = None
    spline_json: Optional[str] = None
    trace_csv: Optional[str] = None


class JobStore:
    """Single-writer/multi-reader job records with change notification."""

    def __init__(self, data_dir: Optional[Path] = None):
        self._jobs: Dict[str, JobRecord] = {}
        self._cond = threading.Condition()
        self._dir = data_dir

    def create(self, image_id: str, points: list, params: dict) -> JobRecord:
        job = JobRecord(job_id=uuid.uuid4().hex, image_id=image_id, points=points, params=params)
        with self._cond:
            self._jobs[job.job_id] = job
        return job

    def get(self, job_id: str) -> Optional[JobRecord]:
        with self._cond:
            return self._jobs.get(job_id)

    def set_status(self, job_id: str, status: str, error: Optional[str] = None) -> None:
        with self._cond:
            job = self._jobs[job_id]
            if job.status in TERMINAL:
                return
            job.status = status
            job.error = error
            self._cond.notify_all()
        if status in TERMINAL:
            self._persist(job_id)

    def append_snapshot(self, job_id: str, snapshot: dict) -> None:
        with self._cond:
            self._jobs[job_id].snapshots.append(snapshot)
            self._cond.notify_all()

    def attach_outputs(self, job_id: str, mask_png: bytes, spline_json: str, trace_csv: str) -> None:
        with self._cond:
            job = self._jobs[job_id]
            job.mask_png = mask_png
            job.spline_json = spline_json
            job.trace_csv = trace_csv

    def snapshot_view(self, job_id: str):
        """Consistent copy of (status, snapshot count, error) for streaming."""
        with self._cond:
            job = self._jobs[job_id]
            return job.status, len(job.snapshots), job.error

    def wait_for_change(self, job_id: str, seen_count: int, timeout: float = 0.5) -> None:
        with self._cond:
            job = self._jobs[job_id]
            if len(job.snapshots) > seen_count or job.status in TERMINAL:
                return
            self._cond.wait(timeout)

    def _persist(self, job_id: str) -> None:
        if self._dir is None:
            return
        job = self.get(job_id)
        if job is None:
            return
        jdir = self._dir / "jobs" / job.job_id
        jdir.mkdir(parents=True, exist_ok=True)
        record = {
            "job_id": job.job_id,
            "image_id": job.image_id,
            "points": job.points,
            "params": job.params,
            "status": job.status,
            "error": job.error,
            "snapshots": job.snapshots,
        }
        (jdir / "record.json").write_text(json.dumps(record))
        if job.mask_png is not None:
            (jdir / "mask.png").write_bytes(job.mask_png)
        if job.spline_json is not None:
            (jdir / "spline.json").write_text(job.spline_json)
        if job.trace_csv is not None:
            (jdir / "trace.csv").write_text(job.trace_csv)
