from __future__ import annotations
import os
from pathlib import Path
from typing import Optional
from dotenv import load_dotenv

# This file lives at app/core/config.py, so root is 2 levels up.
ROOT_DIR = Path(__file__).resolve().parents[2]
TEMPLATES_DIR = ROOT_DIR / "app" / "templates"

load_dotenv(dotenv_path=ROOT_DIR / ".env", override=False)  # OK if missing

def env(name: str, default: Optional[str] = None) -> Optional[str]:
    v = os.getenv(name)
    return v if (v is not None and v != "") else default

def env_int(name: str, default: int) -> int:
    raw = env(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise RuntimeError(f"{name} must be an integer, got {raw!r}") from None

def normalize_db_url(url: str) -> str:
    # Render sometimes provides postgres://
    if url.startswith("postgres://"):
        url = "postgresql://" + url[len("postgres://"):]
    # Force psycopg v3 driver instead of psycopg2
    if url.startswith("postgresql+psycopg2://"):
        url = "postgresql+psycopg://" + url[len("postgresql+psycopg2://"):]
    elif url.startswith("postgresql://"):
        url = "postgresql+psycopg://" + url[len("postgresql://"):]
    return url

DATABASE_URL = normalize_db_url(env("DATABASE_URL", "sqlite:///./swconn.db"))

# Sweep parallelism cap: worker processes, one run each.
SWCONN_THREADS = max(1, env_int("SWCONN_THREADS", os.cpu_count() or 1))

LOG_LEVEL   = (env("SWCONN_LOG_LEVEL", "INFO") or "INFO").upper()
RESULTS_DIR = Path(env("SWCONN_RESULTS_DIR", str(ROOT_DIR / "results")))
