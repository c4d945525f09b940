# app/routers/api_runs.py
from __future__ import annotations
from pathlib import Path
from typing import Any, Dict, List, Optional

from fastapi import APIRouter, Body, HTTPException, Query, status as http_status
from fastapi.responses import PlainTextResponse
from pydantic import ValidationError

from app.core.config import RESULTS_DIR
from app.core.constants import STRATEGIES, SWEEP_DIMENSIONS
from app.core.errors import CorrectnessError, PreconditionError, SwconnError
from app.services.bench import RunSpec, render_summary, run_isolated
from app.services.results import export_csv, list_rows, store_rows

router = APIRouter(prefix="/api", tags=["api"])

STRATEGY_NOTES = {
    "omst-s": "OMST S-Tree: parent links, weights and sizes only",
    "omst-d": "OMST D-Tree: S-Tree layout plus re-rooting and distance shortcuts",
    "omst-lc": "OMST LC-Tree: link-cut forest with path-minimum aggregates",
    "mst-d": "MST D-Tree: maximum spanning forest, non-tree edges kept",
    "vanilla-d": "D-Tree with replacement search on tree-edge deletion",
    "rwc": "components recomputed once per window",
    "dfs": "graph traversal per query",
}


def _inside_results_dir(raw: str) -> str:
    # inputs are resolved against SWCONN_RESULTS_DIR and may not leave it
    base = RESULTS_DIR.resolve()
    path = (base / raw).resolve()
    if base != path and base not in path.parents:
        raise HTTPException(status_code=400, detail="input must live under the results directory")
    return str(path)


@router.get("/strategies")
def api_strategies() -> List[Dict[str, str]]:
    return [{"name": s, "description": STRATEGY_NOTES[s]} for s in STRATEGIES]


@router.post("/runs", status_code=http_status.HTTP_201_CREATED)
def api_run_create(body: Dict[str, Any] = Body(...)):
    try:
        spec = RunSpec.model_validate({**body, "out": None})
    except ValidationError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from None
    if spec.input is not None:
        spec = spec.model_copy(update={"input": _inside_results_dir(spec.input)})
    try:
        row = run_isolated(spec)
    except CorrectnessError as exc:
        raise HTTPException(status_code=409, detail=str(exc)) from None
    except PreconditionError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from None
    except SwconnError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from None
    source = body.get("input") or f"synthetic:{spec.synthetic}"
    (row_id,) = store_rows([row], source=source)
    return {"id": row_id, **row}


@router.get("/runs")
def api_run_list(strategy: Optional[str] = None, limit: int = Query(100, ge=1, le=10000)):
    if strategy is not None and strategy not in STRATEGIES:
        raise HTTPException(status_code=404, detail=f"unknown strategy {strategy!r}")
    return list_rows(strategy=strategy, limit=limit)


@router.get("/runs/export.csv", response_class=PlainTextResponse)
def api_run_export(strategy: Optional[str] = None, limit: int = Query(1000, ge=1, le=100000)):
    rows = list_rows(strategy=strategy, limit=limit)
    return PlainTextResponse(export_csv(rows), media_type="text/csv")


@router.get("/runs/summary.gp", response_class=PlainTextResponse)
def api_run_summary(vary: str = Query("workload"), limit: int = Query(1000, ge=1, le=100000)):
    if vary not in SWEEP_DIMENSIONS:
        raise HTTPException(status_code=400, detail=f"vary must be one of {', '.join(SWEEP_DIMENSIONS)}")
    rows = [r for r in list_rows(limit=limit) if not r.get("error")]
    return PlainTextResponse(render_summary(rows, vary), media_type="text/plain")
