"""Readers and writers for model output formats and the grid JSON format."""
from __future__ import annotations

from pathlib import Path
from typing import Callable, Optional, Union

from ..errors import HardParseFailure, SchemaViolation, TableEvalError
from .base import REPAIR_CODES, ParseReport, ParseWarning, SlotLayout
from .gridjson import (grid_from_obj, grid_to_obj, load_grid_json, load_grid_list_json,
                       save_grid_json, save_grid_list_json)
from .html import parse_html_tables, render_html
from .markdown import parse_span_markdown, render_span_markdown

FORMATS = ("html", "span-markdown", "grid-json")
_EXTENSIONS = {".html": "html", ".htm": "html", ".md": "span-markdown",
               ".markdown": "span-markdown", ".json": "grid-json"}


def format_for_path(path: Union[str, Path]) -> str:
    fmt = _EXTENSIONS.get(Path(path).suffix.lower())
    if fmt is None:
        raise ValueError(f"cannot infer table format from {path}")
    return fmt


def parse_grid_json(data: Union[str, bytes]) -> ParseReport:
    """Grid JSON wrapped in a :class:`ParseReport`; schema errors become warnings."""
    report = ParseReport()
    try:
        report.grids.extend(load_grid_list_json(data))
    except TableEvalError as exc:
        report.warn("SchemaViolation", str(exc))
    if not report.grids:
        report.warn("NoTableFound", "no grid in JSON input")
    return report


def parse_tables(data: Union[str, bytes], fmt: str,
                 preconvert: Optional[Callable[[str], str]] = None) -> ParseReport:
    """Dispatch on ``fmt`` (one of :data:`FORMATS`).

    ``preconvert`` maps raw text to HTML before parsing; it is the hook for
    formats converted by an external tool (e.g. DocTags).
    """
    if preconvert is not None:
        if isinstance(data, (bytes, bytearray)):
            try:
                data = bytes(data).decode("utf-8")
            except UnicodeDecodeError as exc:
                raise HardParseFailure(f"input is not valid UTF-8: {exc}") from None
        return parse_html_tables(preconvert(data))
    if fmt == "html":
        return parse_html_tables(data)
    if fmt in ("span-markdown", "markdown", "md"):
        return parse_span_markdown(data)
    if fmt in ("grid-json", "json"):
        return parse_grid_json(data)
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")


__all__ = [
    "FORMATS", "REPAIR_CODES", "HardParseFailure", "ParseReport", "ParseWarning",
    "SchemaViolation", "SlotLayout", "format_for_path", "grid_from_obj", "grid_to_obj",
    "load_grid_json", "load_grid_list_json", "parse_grid_json", "parse_html_tables",
    "parse_span_markdown", "parse_tables", "render_html", "render_span_markdown",
    "save_grid_json", "save_grid_list_json",
]
