"""FastAPI application wrapping the scheduling pipeline.

Endpoints take and return JSON bodies declared in ``schemas``; domain
errors (invalid instances, impossible generator parameters) map to 400,
schema violations to FastAPI's usual 422.  Oracle budget overruns are not
errors: the run record comes back with status ``BUDGET_EXCEEDED`` so sweep
clients can fall back to relaxation mode.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import runner
from ..exact import EnumerationBudgetError
from ..model import generate_instance
from ..rounding import histogram_csv
from . import schemas


def generate_endpoint(req: schemas.GenerateRequest) -> schemas.GenerateResponse:
    try:
        instance = generate_instance(
            m=req.m, n=req.n, T=req.T, d=req.d,
            capacity_range=req.capacity_range,
            route_length_range=req.route_length_range,
            seed=req.seed,
        )
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return schemas.GenerateResponse(
        instance=schemas.InstancePayload.from_instance(instance)
    )


def solve_endpoint(req: schemas.SolveRequest) -> schemas.SolveResponse:
    try:
        instance = req.instance.to_instance()
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    st = req.settings
    try:
        result = runner.run_solve(
            instance, req.mode,
            gap_tol=st.gap_tol, max_iters=st.max_iters,
            samples=st.samples, round_seed=st.seed,
            perturb=st.perturb, perturb_seed=st.perturb_seed,
            budget=st.budget,
        )
    except EnumerationBudgetError:
        record = runner.RunRecord(
            m=instance.m, n=instance.n, T=instance.T, d=instance.d,
            seed=None, mode=req.mode, wall_s=0.0, sdp_bound=None,
            oracle=None, best_rounded=None,
            status=runner.STATUS_BUDGET_EXCEEDED,
        )
        return schemas.SolveResponse(
            record=schemas.RunRecordPayload.from_record(record)
        )
    rank_one_gap = None
    if result.x is not None and result.X is not None and result.X.size:
        rank_one_gap = float(
            np.abs(result.X - np.outer(result.x, result.x)).max()
        )
    return schemas.SolveResponse(
        record=schemas.RunRecordPayload.from_record(result.record),
        schedule=None if result.schedule is None else list(result.schedule),
        x=None if result.x is None else [float(v) for v in result.x],
        schur_residual=result.schur_residual,
        rank_one_gap=rank_one_gap,
        rounding=(
            None if result.rounding is None
            else schemas.RoundingPayload.from_report(result.rounding)
        ),
        certified=result.certified,
    )


def round_endpoint(req: schemas.RoundRequest) -> schemas.RoundResponse:
    try:
        instance = req.instance.to_instance()
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    st = req.settings
    result = runner.run_solve(
        instance, "sdp+round",
        gap_tol=st.gap_tol, max_iters=st.max_iters,
        samples=st.samples, round_seed=st.seed,
        perturb=st.perturb, perturb_seed=st.perturb_seed,
        budget=st.budget,
    )
    return schemas.RoundResponse(
        record=schemas.RunRecordPayload.from_record(result.record),
        rounding=(
            None if result.rounding is None
            else schemas.RoundingPayload.from_report(result.rounding)
        ),
        certified=result.certified,
        histogram_csv=(
            "delay,count\n" if result.rounding is None
            else histogram_csv(result.rounding)
        ),
    )


def bench_endpoint(req: schemas.BenchRequest) -> schemas.BenchResponse:
    st = req.settings
    try:
        records = runner.run_bench(
            n_values=req.n_values, seeds=req.seeds, modes=list(req.modes),
            m=req.m, T=req.T, d=req.d,
            capacity_range=req.capacity_range,
            route_length_range=req.route_length_range,
            gap_tol=st.gap_tol, max_iters=st.max_iters,
            samples=st.samples, budget=st.budget,
        )
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return schemas.BenchResponse(
        records=[schemas.RunRecordPayload.from_record(r) for r in records],
        csv=runner.records_to_csv(records),
    )


def health_endpoint() -> dict:
    return {"status": "ok"}


# request model and handler per path; the CLI's in-process transport
# dispatches through this table so HTTP and local calls share one code path
POST_ROUTES = {
    "/instances/generate": (schemas.GenerateRequest, generate_endpoint),
    "/solve": (schemas.SolveRequest, solve_endpoint),
    "/round": (schemas.RoundRequest, round_endpoint),
    "/bench": (schemas.BenchRequest, bench_endpoint),
}


def create_app() -> FastAPI:
    app = FastAPI(
        title="airsched",
        description="Ground-delay scheduling via semidefinite relaxation",
        version="0.1.0",
    )
    app.get("/health")(health_endpoint)
    app.post("/instances/generate", response_model=schemas.GenerateResponse)(
        generate_endpoint
    )
    app.post("/solve", response_model=schemas.SolveResponse)(solve_endpoint)
    app.post("/round", response_model=schemas.RoundResponse)(round_endpoint)
    app.post("/bench", response_model=schemas.BenchResponse)(bench_endpoint)
    return app


app = create_app()
