"""Request/response models for the solver service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class RunRequest(BaseModel):
    config_text: str
    threads: int = Field(default=1, ge=1, le=64)


class RunSummary(BaseModel):
    steps: int
    final_time: float
    e1_w: float | None = None
    e1_v: float | None = None
    mass_w_drift: float
    mass_v_drift: float
    stability_warning: bool


class RunResponse(BaseModel):
    summary: RunSummary
    files: dict[str, str]


class SweepRequest(BaseModel):
    config_text: str
    threads: int = Field(default=1, ge=1, le=64)


class SweepResponse(BaseModel):
    argmin_lambda: float
    argmin_mu: float
    min_e1_w: float
    e1_ref: float
    n_points: int
    files: dict[str, str]


class EstimateRequest(BaseModel):
    config_text: str
    threads: int = Field(default=1, ge=1, le=64)


class EstimateResponse(BaseModel):
    lambda_r: float
    mu_r: float
    indicator_w: float
    indicator_v: float
    files: dict[str, str]


class BenchRequest(BaseModel):
    test_id: str
    threads: int = Field(default=1, ge=1, le=64)


class BenchRow(BaseModel):
    quantity: str
    paper_value: float | None
    computed_value: float
    rel_diff: float | None
    passed: bool | None


class BenchReport(BaseModel):
    test_id: str
    rows: list[BenchRow]
    passed: bool


class BenchResponse(BaseModel):
    reports: list[BenchReport]
    all_passed: bool
    lines: list[str]
    files: dict[str, str]


class ErrorDetail(BaseModel):
    error: str                 # "config" | "diverged" | "invalid"
    message: str
    line: int | None = None
    step: int | None = None
