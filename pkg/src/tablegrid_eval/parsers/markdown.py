"""Pipe-table markdown with ``<ROWSPAN=k>`` / ``<COLSPAN=k>`` cell tags.

This is the span dialect some vision-language models emit, e.g.::

    <md> | <ROWSPAN=2> Cell | <COLSPAN=2> Cell |
         | Cell | Cell | Cell |
         | --- | --- | --- |
         | Data | Data | Data | </md>

Rows above the ``| --- |`` separator are column headers.  The separator's
cell count fixes the table width; without a separator the first row does.
"""
from __future__ import annotations

import re
from typing import Union

from ..grid import TableGrid
from .base import ParseReport, SlotLayout
from .html import MAX_COLSPAN, MAX_ROWSPAN, _decode

_WRAPPER = re.compile(r"(?<!\\)</?md>", re.IGNORECASE)
_ESCAPABLE = "|\\<-:"
_ESCAPE_SEQ = re.compile(r"\\([|\\<\-:])")
_SEP_CELL = re.compile(r"^\s*:?-+:?\s*$")
_SPAN_TAG = re.compile(r"^\s*<\s*(ROWSPAN|COLSPAN)\s*=\s*([^>]*)>", re.IGNORECASE)


def _split_row(line: str) -> list[str]:
    """Split on unescaped pipes, dropping the outer delimiters.

    Cells are returned still escaped so that separator and span-tag
    detection can tell ``\\-`` or ``\\<`` from the real thing.
    """
    cells, buf, i = [], [], 0
    while i < len(line):
        ch = line[i]
        if ch == "\\" and i + 1 < len(line) and line[i + 1] in _ESCAPABLE:
            buf.append(line[i:i + 2])
            i += 2
            continue
        if ch == "|":
            cells.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
        i += 1
    if buf:
        cells.append("".join(buf))
    # a table line starts with a pipe, so cells[0] is outside the table;
    # a bare "|" is therefore a row with no cells of its own
    return cells[1:]


def _unescape(raw: str) -> str:
    return _ESCAPE_SEQ.sub(lambda m: m.group(1), raw)


def _is_separator(cells: list[str]) -> bool:
    return bool(cells) and all(_SEP_CELL.match(c) for c in cells)


def _read_span_tags(raw: str, report: ParseReport, where: str) -> tuple[str, int, int]:
    rowspan = colspan = 1
    rest = raw
    while True:
        m = _SPAN_TAG.match(rest)
        if not m:
            break
        value = m.group(2).strip()
        if not value.isdigit() or int(value) < 1:
            report.warn("MalformedSpanTag", f"tag {m.group(0).strip()!r} kept as text", where)
            break
        if m.group(1).upper() == "ROWSPAN":
            rowspan = min(int(value), MAX_ROWSPAN)
        else:
            colspan = min(int(value), MAX_COLSPAN)
        rest = rest[m.end():]
    return rest, rowspan, colspan


def _table_blocks(text: str) -> list[list[str]]:
    blocks, current = [], []
    for line in _WRAPPER.sub("\n", text).splitlines():
        s = line.strip()
        if s.startswith("|"):
            current.append(s)
        elif current:
            blocks.append(current)
            current = []
    if current:
        blocks.append(current)
    return blocks


def _parse_block(lines: list[str], report: ParseReport, index: int) -> TableGrid | None:
    label = f"table {index}"
    rows = [_split_row(line) for line in lines]
    sep_at = next((i for i, cells in enumerate(rows) if _is_separator(cells)), None)
    width = None
    if sep_at is not None:
        width = len(rows[sep_at])
    body = []
    for i, cells in enumerate(rows):
        if _is_separator(cells) and i == sep_at:
            continue
        parsed = []
        for j, raw in enumerate(cells):
            text, rs, cs = _read_span_tags(raw, report, f"{label} line {i} cell {j}")
            parsed.append((_unescape(text), rs, cs))
        body.append((parsed, sep_at is not None and i < sep_at))
    if not body:
        return None
    if width is None:
        width = sum(cs for _, _, cs in body[0][0]) or None
    layout = SlotLayout(report, label, max_cols=width)
    for parsed, header in body:
        layout.new_row()
        for text, rs, cs in parsed:
            layout.place(text, rs, cs, header)
    return layout.finish()


def parse_span_markdown(text: Union[str, bytes]) -> ParseReport:
    """Parse every pipe table in ``text`` (optionally inside ``<md>`` wrappers)."""
    text = _decode(text)
    report = ParseReport()
    for k, block in enumerate(_table_blocks(text)):
        grid = _parse_block(block, report, k)
        if grid is not None:
            report.grids.append(grid)
    if not report.grids:
        report.warn("NoTableFound", "no pipe table found")
    return report


def _escape(text: str) -> str:
    out = text.replace("\\", "\\\\").replace("|", "\\|").replace("<", "\\<")
    if _SEP_CELL.match(out):
        out = "\\" + out  # would otherwise read as a separator cell
    return out


def _header_rows(grid: TableGrid) -> int:
    """Largest number of leading rows that form a clean column-header block.

    A multi-row header span can make a short block invalid while a longer
    one is fine, so every candidate is checked.
    """
    best = 0
    cells = grid.logical_cells()
    for k in range(1, grid.n_rows + 1):
        if all(c.span.row_start >= k or (c.span.row_end < k and c.is_column_header)
               for c in cells):
            best = k
    return best


def render_span_markdown(grid: TableGrid) -> str:
    """Serialize a grid in the span-tag markdown dialect."""
    rows = [[] for _ in range(grid.n_rows)]
    for cell in grid.logical_cells():
        tags = ""
        if cell.span.n_rows > 1:
            tags += f"<ROWSPAN={cell.span.n_rows}> "
        if cell.span.n_cols > 1:
            tags += f"<COLSPAN={cell.span.n_cols}> "
        rows[cell.span.row_start].append(f" {tags}{_escape(cell.text)} ")
    # a row fully covered by spans from above is written as a bare "|"
    lines = ["|" + "|".join(r) + "|" if r else "|" for r in rows]
    n_header = _header_rows(grid)
    if n_header:
        lines.insert(n_header, "|" + "|".join([" --- "] * grid.n_cols) + "|")
    return "\n".join(lines)
