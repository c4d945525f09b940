from __future__ import annotations

import sqlalchemy as sa
from fastapi import APIRouter

from app.core.constants import CSV_SCHEMA_VERSION
from app.core.db import bench_run, engine

router = APIRouter()

@router.get("/healthz")
def healthz():
    # doubles as a DB ping
    with engine.connect() as c:
        runs = c.execute(sa.select(sa.func.count()).select_from(bench_run)).scalar_one()
    return {"ok": True, "schema_version": CSV_SCHEMA_VERSION, "runs": runs}
