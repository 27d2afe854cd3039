"""FastAPI front end for the solver: run, sweep, estimate and bench endpoints."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from ..blend import DivergedError
from ..config import ConfigError
from . import ops
from .schemas import (
    BenchRequest,
    BenchResponse,
    EstimateRequest,
    EstimateResponse,
    RunRequest,
    RunResponse,
    SweepRequest,
    SweepResponse,
)

app = FastAPI(
    title="blendsolve",
    description="Blended explicit solvers for 1-D advection and conservation laws",
    version="0.1.0",
)


def _guard(fn, req):
    try:
        return fn(req)
    except ConfigError as err:
        raise HTTPException(status_code=400, detail={
            "error": "config", "message": err.message, "line": err.line}) from err
    except DivergedError as err:
        raise HTTPException(status_code=400, detail={
            "error": "diverged", "message": str(err), "step": err.step}) from err
    except ValueError as err:
        raise HTTPException(status_code=400, detail={
            "error": "invalid", "message": str(err)}) from err


@app.get("/health")
def health():
    return {"status": "ok"}


@app.post("/run", response_model=RunResponse)
def run(req: RunRequest):
    return _guard(ops.execute_run, req)


@app.post("/sweep", response_model=SweepResponse)
def sweep(req: SweepRequest):
    return _guard(ops.execute_sweep, req)


@app.post("/estimate", response_model=EstimateResponse)
def estimate(req: EstimateRequest):
    return _guard(ops.execute_estimate, req)


@app.post("/bench", response_model=BenchResponse)
def bench(req: BenchRequest):
    return _guard(ops.execute_bench, req)
