"""Pydantic request/response models for the restoration service."""

from __future__ import annotations

from typing import List, Optional

from pydantic import BaseModel, Field

from ..descent import DescentConfig
from ..energy import EnergyParams


class PointIn(BaseModel):
    x: float
    y: float
    r: Optional[float] = None
    kind: Optional[str] = None


class JobParams(BaseModel):
    """Restoration parameters; defaults mirror the reference protocol."""

    c1: float = 2.0
    c2: float = 2000.0
    c3: float = 50.0
    alpha: float = 0.5
    eps: float = 0.125
    r_min: float = Field(default=3.0, ge=0)
    r_max: float = 50.0
    quad_samples: int = 32
    iterations: int = 14
    step: float = 0.05
    decay: float = 0.5
    fd_h: float = 0.5
    early_stop_rel: float = 0.0
    invert: bool = False
    stretch: bool = True
    stretch_lo: float = 1.0
    stretch_hi: float = 99.0
    samples_per_interval: int = 16

    def energy_params(self) -> EnergyParams:
        return EnergyParams(
            c1=self.c1,
            c2=self.c2,
            c3=self.c3,
            alpha=self.alpha,
            epsilon=self.eps,
            r_min=self.r_min,
            r_max=self.r_max,
            quad_samples=self.quad_samples,
        )

    def descent_config(self) -> DescentConfig:
        return DescentConfig(
            initial_step=self.step,
            decay=self.decay,
            fd_step=self.fd_h,
            max_iterations=self.iterations,
            r_min=self.r_min,
            r_max=self.r_max,
            early_stop_rel=self.early_stop_rel,
        )


class JobSubmission(BaseModel):
    image_id: str
    points: List[PointIn]
    params: JobParams = JobParams()


class ImageCreated(BaseModel):
    id: str
    width: int
    height: int


class JobCreated(BaseModel):
    job_id: str


class EnergyView(BaseModel):
    f_total: float
    f_fid_s: float
    f_fid_r: float
    f_curv: float


class SnapshotView(BaseModel):
    iteration: int
    energy: EnergyView
    spline: dict


class JobView(BaseModel):
    job_id: str
    image_id: str
    status: str
    points: List[PointIn]
    params: JobParams
    snapshots: List[SnapshotView]
    error: Optional[str] = None
