"""Canonical grid JSON interchange format.

::

    {"n_rows": M, "n_cols": N,
     "cells": [{"row_start": r0, "row_end": r1, "col_start": c0, "col_end": c1,
                "text": "...", "is_column_header": false,
                "is_projected_row_header": false}, ...]}

Cells are written in reading order of their top-left position, so
``save_grid_json(load_grid_json(b)) == b`` for any canonical ``b``.
"""
from __future__ import annotations

import json
from typing import Any, Union

from ..errors import SchemaViolation
from ..grid import CellSpan, GridCell, TableGrid, build_grid

_SPAN_KEYS = ("row_start", "row_end", "col_start", "col_end")
_FLAG_KEYS = ("is_column_header", "is_projected_row_header")


def _as_int(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaViolation(f"{where} must be an integer, got {value!r}")
    return value


def grid_from_obj(obj: Any) -> TableGrid:
    if not isinstance(obj, dict):
        raise SchemaViolation("grid must be a JSON object")
    for key in ("n_rows", "n_cols", "cells"):
        if key not in obj:
            raise SchemaViolation(f"grid is missing {key!r}")
    n_rows = _as_int(obj["n_rows"], "n_rows")
    n_cols = _as_int(obj["n_cols"], "n_cols")
    if not isinstance(obj["cells"], list):
        raise SchemaViolation("'cells' must be a list")
    cells = []
    for k, rec in enumerate(obj["cells"]):
        if not isinstance(rec, dict):
            raise SchemaViolation(f"cell {k} must be an object")
        missing = [key for key in _SPAN_KEYS if key not in rec]
        if missing:
            raise SchemaViolation(f"cell {k} is missing {missing}")
        span = CellSpan(*(_as_int(rec[key], f"cell {k} {key}") for key in _SPAN_KEYS))
        text = rec.get("text", "")
        if not isinstance(text, str):
            raise SchemaViolation(f"cell {k} text must be a string")
        flags = []
        for key in _FLAG_KEYS:
            value = rec.get(key, False)
            if not isinstance(value, bool):
                raise SchemaViolation(f"cell {k} {key} must be a boolean")
            flags.append(value)
        cells.append(GridCell(span, text, *flags))
    return build_grid(n_rows, n_cols, cells)


def grid_to_obj(grid: TableGrid) -> dict:
    cells = []
    for cell in grid.logical_cells():
        s = cell.span
        cells.append({
            "row_start": s.row_start, "row_end": s.row_end,
            "col_start": s.col_start, "col_end": s.col_end,
            "text": cell.text,
            "is_column_header": cell.is_column_header,
            "is_projected_row_header": cell.is_projected_row_header,
        })
    return {"n_rows": grid.n_rows, "n_cols": grid.n_cols, "cells": cells}


def _loads(data: Union[str, bytes]) -> Any:
    if isinstance(data, (bytes, bytearray)):
        try:
            data = bytes(data).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SchemaViolation(f"grid JSON is not UTF-8: {exc}") from None
    try:
        return json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"invalid JSON: {exc}") from None


def dumps_canonical(obj: Any) -> bytes:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":")).encode("utf-8")


def load_grid_json(data: Union[str, bytes]) -> TableGrid:
    return grid_from_obj(_loads(data))


def save_grid_json(grid: TableGrid) -> bytes:
    return dumps_canonical(grid_to_obj(grid))


def load_grid_list_json(data: Union[str, bytes]) -> list[TableGrid]:
    """Load a set of tables: a JSON array of grids (a single grid object is accepted too)."""
    obj = _loads(data)
    if isinstance(obj, dict) and "tables" in obj:
        obj = obj["tables"]
    if isinstance(obj, dict):
        return [grid_from_obj(obj)]
    if not isinstance(obj, list):
        raise SchemaViolation("expected a JSON array of grids")
    return [grid_from_obj(o) for o in obj]


def save_grid_list_json(grids: list[TableGrid]) -> bytes:
    return dumps_canonical([grid_to_obj(g) for g in grids])
