from __future__ import annotations
from typing import Dict, Iterable, List, Optional

import sqlalchemy as sa

from app.core.constants import CSV_FIELDS, CSV_SCHEMA_VERSION
from app.core.db import bench_run, engine as default_engine
from app.services.bench import rows_to_csv

def _clean(row: Dict[str, object], source: Optional[str]) -> Dict[str, object]:
    """CSV row -> table values; blanks (failed runs) become NULL."""
    out: Dict[str, object] = {"schema_version": CSV_SCHEMA_VERSION, "input": source,
                              "error": row.get("error") or None}
    for k in CSV_FIELDS:
        v = row.get(k)
        out[k] = None if v is None or v == "" else v
    return out


def store_rows(rows: Iterable[Dict[str, object]], *, source: Optional[str] = None,
               engine: Optional[sa.engine.Engine] = None) -> List[int]:
    """Insert rows into bench_run; returns the new ids in order."""
    ids: List[int] = []
    with (engine or default_engine).begin() as c:
        for row in rows:
            res = c.execute(sa.insert(bench_run).values(**_clean(row, source)))
            ids.append(int(res.inserted_primary_key[0]))
    return ids


def list_rows(*, strategy: Optional[str] = None, limit: int = 100,
              engine: Optional[sa.engine.Engine] = None) -> List[Dict]:
    q = sa.select(bench_run).order_by(bench_run.c.id.desc()).limit(limit)
    if strategy:
        q = q.where(bench_run.c.strategy == strategy)
    with (engine or default_engine).connect() as c:
        return [dict(r) for r in c.execute(q).mappings().all()]


def export_csv(rows: Iterable[Dict[str, object]]) -> str:
    # stored rows carry NULLs where the CSV has blanks
    return rows_to_csv({k: ("" if v is None else v) for k, v in r.items()} for r in rows)
