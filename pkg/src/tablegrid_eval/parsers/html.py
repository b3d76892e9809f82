"""Lenient HTML table parser and a matching emitter."""
from __future__ import annotations

import html as _html
from html.parser import HTMLParser
from typing import Optional, Union

from ..errors import HardParseFailure
from ..grid import TableGrid
from .base import ParseReport, SlotLayout

# upper bounds used by browsers
MAX_COLSPAN = 1000
MAX_ROWSPAN = 65534


def _decode(text: Union[str, bytes]) -> str:
    if isinstance(text, (bytes, bytearray)):
        try:
            return bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise HardParseFailure(f"input is not valid UTF-8: {exc}") from None
    return text


class _TableState:
    def __init__(self, report: ParseReport, index: int):
        self.layout = SlotLayout(report, f"table {index}")
        self.row_open = False
        self.in_thead = False
        self.cell: Optional[dict] = None


class _TableBuilder(HTMLParser):

    def __init__(self, report: ParseReport):
        super().__init__(convert_charrefs=True)
        self.report = report
        self.table: Optional[_TableState] = None
        self.nested = 0
        self.n_tables = 0

    # -- helpers ---------------------------------------------------------
    def _span_attr(self, attrs: dict, name: str, limit: int) -> int:
        raw = attrs.get(name)
        if raw is None:
            return 1
        digits = ""
        for ch in raw.strip():
            if not ch.isdigit():
                break
            digits += ch
        if not digits:
            self.report.warn("BadSpanAttribute", f"{name}={raw!r} treated as 1",
                             self.table.layout.label)
            return 1
        value = int(digits)
        if value == 0:
            # rowspan=0 means "to the end of the table"; finish() clips it
            return limit if name == "rowspan" else 1
        return min(value, limit)

    def _close_cell(self) -> None:
        t = self.table
        if t is None or t.cell is None:
            return
        cell, t.cell = t.cell, None
        if not t.row_open:
            self._open_row(implicit=True)
        t.layout.place("".join(cell["text"]), cell["rowspan"], cell["colspan"], cell["header"])

    def _open_row(self, implicit: bool = False) -> None:
        t = self.table
        if implicit:
            self.report.warn("ImplicitRow", "cell outside <tr>; row opened", t.layout.label)
        t.layout.new_row()
        t.row_open = True

    def _close_row(self) -> None:
        self._close_cell()
        self.table.row_open = False

    def _finish_table(self) -> None:
        self._close_row()
        grid = self.table.layout.finish()
        if grid is not None:
            self.report.grids.append(grid)
        self.table = None

    # -- HTMLParser hooks ------------------------------------------------
    def handle_starttag(self, tag, attrs):
        t = self.table
        if tag == "table":
            if t is None:
                self.table = _TableState(self.report, self.n_tables)
                self.n_tables += 1
            else:
                self.nested += 1
                self.report.warn("NestedTable", "inner table flattened to text",
                                 t.layout.label)
                self._append(" ")
            return
        if t is None:
            return
        if self.nested:
            if tag in ("td", "th", "tr", "br"):
                self._append(" ")
            return
        if tag == "tr":
            self._close_row()
            self._open_row()
        elif tag in ("td", "th"):
            self._close_cell()
            attrs = {k.lower(): (v or "") for k, v in attrs}
            t.cell = {
                "text": [],
                "rowspan": self._span_attr(attrs, "rowspan", MAX_ROWSPAN),
                "colspan": self._span_attr(attrs, "colspan", MAX_COLSPAN),
                "header": tag == "th" or t.in_thead,
            }
        elif tag == "thead":
            self._close_row()
            t.in_thead = True
        elif tag in ("tbody", "tfoot"):
            self._close_row()
            t.in_thead = False
        elif tag == "br":
            self._append(" ")

    def handle_startendtag(self, tag, attrs):
        self.handle_starttag(tag, attrs)
        if tag not in ("br", "td", "th", "tr", "table"):
            self.handle_endtag(tag)

    def handle_endtag(self, tag):
        t = self.table
        if t is None:
            return
        if tag == "table":
            if self.nested:
                self.nested -= 1
            else:
                self._finish_table()
            return
        if self.nested:
            return
        if tag in ("td", "th"):
            self._close_cell()
        elif tag == "tr":
            self._close_row()
        elif tag == "thead":
            self._close_row()
            t.in_thead = False

    def handle_data(self, data):
        self._append(data)

    def _append(self, data: str) -> None:
        t = self.table
        if t is not None and t.cell is not None:
            t.cell["text"].append(data)

    def finish(self) -> None:
        self.close()
        if self.table is not None:
            self.report.warn("TruncatedInput", "input ended inside a table; open elements closed",
                             self.table.layout.label)
            self.nested = 0
            self._finish_table()


def parse_html_tables(text: Union[str, bytes]) -> ParseReport:
    """Parse every ``<table>`` element of ``text`` into a :class:`TableGrid`.

    Row and column spans are laid out with the first-free-slot algorithm.
    Ragged rows are padded with empty cells, spans are clipped at the table
    edges and truncated input is closed at end of file; each repair is
    recorded as a warning on the returned report.
    """
    text = _decode(text)
    report = ParseReport()
    builder = _TableBuilder(report)
    try:
        builder.feed(text)
        builder.finish()
    except AssertionError as exc:  # html.parser bails on some garbage declarations
        report.warn("TruncatedInput", f"HTML tokenizer stopped: {exc}")
        if builder.table is not None:
            builder._finish_table()
    if not report.grids:
        report.warn("NoTableFound", "no <table> element with cells found")
    return report


def render_html(grid: TableGrid) -> str:
    """Serialize a grid as an HTML table using rowspan/colspan attributes."""
    rows = [[] for _ in range(grid.n_rows)]
    for cell in grid.logical_cells():
        tag = "th" if cell.is_column_header else "td"
        attrs = ""
        if cell.span.n_rows > 1:
            attrs += f' rowspan="{cell.span.n_rows}"'
        if cell.span.n_cols > 1:
            attrs += f' colspan="{cell.span.n_cols}"'
        rows[cell.span.row_start].append(f"<{tag}{attrs}>{_html.escape(cell.text)}</{tag}>")
    body = "".join(f"<tr>{''.join(r)}</tr>" for r in rows)
    return f"<table>{body}</table>"
