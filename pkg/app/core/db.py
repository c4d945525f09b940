# app/core/db.py
from __future__ import annotations
import sqlalchemy as sa
from sqlalchemy import create_engine

from app.core.config import DATABASE_URL

# sqlite connections are handed between FastAPI worker threads
_connect_args = {"check_same_thread": False} if DATABASE_URL.startswith("sqlite") else {}

engine = create_engine(
    DATABASE_URL,
    pool_pre_ping=True,
    future=True,
    connect_args=_connect_args,
)

metadata = sa.MetaData()

# One row per executed RunSpec; columns mirror CSV_FIELDS plus bookkeeping.
bench_run = sa.Table(
    "bench_run", metadata,
    sa.Column("id", sa.Integer, primary_key=True, autoincrement=True),
    sa.Column("created_at", sa.DateTime(timezone=True), nullable=False, server_default=sa.func.now()),
    sa.Column("schema_version", sa.Integer, nullable=False),
    sa.Column("input", sa.Text),
    sa.Column("strategy", sa.String(16), nullable=False),
    sa.Column("alpha", sa.BigInteger),
    sa.Column("beta", sa.BigInteger),
    sa.Column("workload", sa.Integer),
    sa.Column("edges", sa.BigInteger),
    sa.Column("windows", sa.Integer),
    sa.Column("seconds", sa.Float),
    sa.Column("throughput", sa.Float),
    sa.Column("ns_per_edge", sa.Float),
    sa.Column("q_p95", sa.Float),
    sa.Column("q_p99", sa.Float),
    sa.Column("wm_p95", sa.Float),
    sa.Column("wm_p99", sa.Float),
    sa.Column("mem_vertices", sa.BigInteger),
    sa.Column("mem_tree_edges", sa.BigInteger),
    sa.Column("mem_nontree_edges", sa.BigInteger),
    sa.Column("mem_words", sa.BigInteger),
    sa.Column("peak_mem", sa.BigInteger),
    sa.Column("replacement_searches", sa.BigInteger),
    sa.Column("accesses", sa.BigInteger),
    sa.Column("answer_checksum", sa.String(64)),
    sa.Column("error", sa.Text),
)
sa.Index("ix_bench_run_strategy", bench_run.c.strategy, bench_run.c.created_at)

def bootstrap_schema(bind: sa.engine.Engine | None = None) -> None:
    """Create the results table. Safe to run repeatedly."""
    metadata.create_all(bind or engine, checkfirst=True)

__all__ = ["engine", "bootstrap_schema", "bench_run", "metadata"]
