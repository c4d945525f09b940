# app/main.py
from __future__ import annotations
from contextlib import asynccontextmanager

from fastapi import FastAPI
from starlette.responses import RedirectResponse

from app.core.db import bootstrap_schema
from app.core.logs import configure_logging

# Routers
from app.routers.public import router as public_router
from app.routers.api_runs import router as api_runs_router

@asynccontextmanager
async def lifespan(app: FastAPI):
    configure_logging()
    bootstrap_schema()
    yield

app = FastAPI(title="Sliding-window connectivity results", lifespan=lifespan)

# Routers
app.include_router(public_router)
app.include_router(api_runs_router)

# Root
@app.get("/")
def root():
    return RedirectResponse("/api/runs")
