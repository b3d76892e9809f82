"""Parse reports and the first-free-slot layout shared by the table parsers."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from ..grid import CellSpan, GridCell, TableGrid, build_grid, normalize_text

# warnings that mean the parser changed what the input literally said
REPAIR_CODES = frozenset({
    "RaggedRow", "SpanClipped", "SpanConflict", "RowOverflow", "TruncatedInput",
    "NestedTable", "MalformedSpanTag", "BadSpanAttribute", "ImplicitRow",
})


@dataclass(frozen=True)
class ParseWarning:
    code: str
    message: str
    location: Optional[str] = None

    def to_json(self) -> str:
        return json.dumps({"code": self.code, "message": self.message,
                           "location": self.location}, ensure_ascii=False)


@dataclass
class ParseReport:
    grids: list[TableGrid] = field(default_factory=list)
    warnings: list[ParseWarning] = field(default_factory=list)

    @property
    def repaired(self) -> bool:
        return any(w.code in REPAIR_CODES for w in self.warnings)

    def warn(self, code: str, message: str, location: Optional[str] = None) -> None:
        self.warnings.append(ParseWarning(code, message, location))


class SlotLayout:
    """Incremental first-free-slot placement of spanning cells.

    Rows are opened one at a time; each placed cell goes to the leftmost
    position of the current row not already claimed by a row span from
    above.  ``max_cols`` fixes the table width (markdown); without it the
    width grows to fit (HTML).
    """

    def __init__(self, report: ParseReport, label: str, max_cols: Optional[int] = None):
        self.report = report
        self.label = label
        self.max_cols = max_cols
        self.cells: list[list] = []  # [r0, r1, c0, c1, text, header]
        self.row = -1
        self.col = 0
        self.taken: set[int] = set()  # columns of the current row already claimed

    def new_row(self) -> None:
        self.row += 1
        self.col = 0
        r = self.row
        self.taken = {c for r0, r1, c0, c1, *_ in self.cells if r0 < r <= r1
                      for c in range(c0, c1 + 1)}

    def place(self, text: str, rowspan: int = 1, colspan: int = 1,
              header: bool = False) -> bool:
        if self.row < 0:
            self.new_row()
        r, c = self.row, self.col
        while c in self.taken:
            c += 1
        if self.max_cols is not None and c >= self.max_cols:
            self.report.warn("RowOverflow",
                             f"cell {text!r} beyond table width {self.max_cols} dropped",
                             f"{self.label} row {r}")
            return False
        width = 1
        # spans from earlier rows cover contiguous rows, so checking this row suffices
        while (width < colspan and c + width not in self.taken
               and (self.max_cols is None or c + width < self.max_cols)):
            width += 1
        if width < colspan:
            self.report.warn("SpanConflict",
                             f"colspan {colspan} reduced to {width} to avoid overlap",
                             f"{self.label} row {r} col {c}")
        self.cells.append([r, r + rowspan - 1, c, c + width - 1, text, header])
        self.taken.update(range(c, c + width))
        self.col = c + width
        return True

    def finish(self) -> Optional[TableGrid]:
        n_rows = self.row + 1
        if n_rows <= 0 or not self.cells:
            if n_rows > 0:
                self.report.warn("EmptyTable", "table has rows but no cells", self.label)
            return None
        logical = []
        n_cols = 0
        for r0, r1, c0, c1, text, header in self.cells:
            if r1 >= n_rows:
                self.report.warn("SpanClipped",
                                 f"rowspan of cell at ({r0}, {c0}) clipped at table end",
                                 self.label)
                r1 = n_rows - 1
            n_cols = max(n_cols, c1 + 1)
            logical.append([r0, r1, c0, c1, text, header])
        if self.max_cols is not None:
            n_cols = max(n_cols, self.max_cols)
        covered = set()
        for r0, r1, c0, c1, *_ in logical:
            for rr in range(r0, r1 + 1):
                for cc in range(c0, c1 + 1):
                    covered.add((rr, cc))
        for r in range(n_rows):
            missing = [c for c in range(n_cols) if (r, c) not in covered]
            if missing:
                self.report.warn("RaggedRow",
                                 f"row {r} padded with {len(missing)} empty cell(s)",
                                 self.label)
                for c in missing:
                    logical.append([r, r, c, c, "", False])
        cells = [GridCell(CellSpan(r0, r1, c0, c1), normalize_text(text), bool(header))
                 for r0, r1, c0, c1, text, header in logical]
        return build_grid(n_rows, n_cols, cells)
