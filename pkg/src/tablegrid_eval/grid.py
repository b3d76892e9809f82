"""In-memory table grids with validated spanning-cell structure.

A table is an ``n_rows x n_cols`` matrix of grid positions.  Every position
belongs to exactly one *logical* cell, and a logical cell occupies a
rectangular block of positions (its span).  All positions of a logical cell
share the same :class:`GridCell` object, so text and header flags are
identical across the block by construction.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Sequence, Union

from .errors import OverlappingSpans, SpanOutOfBounds, UncoveredPosition

LONG_TABLE_MIN_ROWS = 30
WIDE_TABLE_MIN_COLS = 12

_WS = re.compile(r"\s+")


def normalize_text(text: str) -> str:
    """Trim and collapse whitespace runs to a single space; case is kept."""
    return _WS.sub(" ", text).strip()


class Criterion(str, Enum):
    TOP = "top"
    CON = "con"

    @classmethod
    def parse(cls, value: Union[str, "Criterion"]) -> "Criterion":
        if isinstance(value, Criterion):
            return value
        try:
            return cls(value.strip().lower())
        except ValueError:
            raise ValueError(f"unknown criterion {value!r} (expected 'top' or 'con')") from None


@dataclass(frozen=True, order=True)
class CellSpan:
    """Zero-based, inclusive footprint of a logical cell."""

    row_start: int
    row_end: int
    col_start: int
    col_end: int

    def __post_init__(self):
        if self.row_start < 0 or self.col_start < 0:
            raise SpanOutOfBounds(f"negative span index in {self}")
        if self.row_start > self.row_end or self.col_start > self.col_end:
            raise SpanOutOfBounds(f"span with start after end: {self}")

    @property
    def n_rows(self) -> int:
        return self.row_end - self.row_start + 1

    @property
    def n_cols(self) -> int:
        return self.col_end - self.col_start + 1

    @property
    def area(self) -> int:
        return self.n_rows * self.n_cols

    def contains(self, row: int, col: int) -> bool:
        return self.row_start <= row <= self.row_end and self.col_start <= col <= self.col_end

    def positions(self) -> Iterator[tuple[int, int]]:
        for r in range(self.row_start, self.row_end + 1):
            for c in range(self.col_start, self.col_end + 1):
                yield r, c

    def relative_to(self, row: int, col: int) -> tuple[int, int, int, int]:
        """Half-open ``(r0, r1, c0, c1)`` box of this span, offset from ``(row, col)``."""
        return (self.row_start - row, self.row_end + 1 - row,
                self.col_start - col, self.col_end + 1 - col)


@dataclass(frozen=True)
class GridCell:
    """A logical cell: its footprint, text and header flags."""

    span: CellSpan
    text: str = ""
    is_column_header: bool = False
    is_projected_row_header: bool = False

    # alias matching the interchange vocabulary
    @property
    def parent_span(self) -> CellSpan:
        return self.span


CellLike = Union[GridCell, Sequence]


def _coerce_cell(cell: CellLike) -> GridCell:
    if isinstance(cell, GridCell):
        return cell
    span, text, *flags = cell
    if not isinstance(span, CellSpan):
        span = CellSpan(*span)
    if len(flags) == 1 and isinstance(flags[0], dict):
        return GridCell(span, text, **flags[0])
    if len(flags) == 1 and flags[0] is None:
        flags = []
    return GridCell(span, text, *flags)


@dataclass(frozen=True, eq=False)
class TableGrid:
    """Immutable table matrix.  Construct with :func:`build_grid`."""

    n_rows: int
    n_cols: int
    cells: tuple  # n_rows tuples of n_cols GridCell

    def __eq__(self, other):
        if not isinstance(other, TableGrid):
            return NotImplemented
        return (self.n_rows == other.n_rows and self.n_cols == other.n_cols
                and self.logical_cells() == other.logical_cells())

    def __hash__(self):
        return hash((self.n_rows, self.n_cols, self.logical_cells()))

    def __repr__(self):
        return f"TableGrid({self.n_rows}x{self.n_cols}, {len(self.logical_cells())} cells)"

    def __getitem__(self, pos: tuple[int, int]) -> GridCell:
        r, c = pos
        return self.cells[r][c]

    @property
    def shape(self) -> tuple[int, int]:
        return self.n_rows, self.n_cols

    def size(self) -> int:
        return self.n_rows * self.n_cols

    def is_long(self) -> bool:
        return self.n_rows >= LONG_TABLE_MIN_ROWS

    def is_wide(self) -> bool:
        return self.n_cols >= WIDE_TABLE_MIN_COLS

    def logical_cells(self) -> tuple[GridCell, ...]:
        """Logical cells in reading order of their top-left position."""
        out = []
        for r, row in enumerate(self.cells):
            for c, cell in enumerate(row):
                if cell.span.row_start == r and cell.span.col_start == c:
                    out.append(cell)
        return tuple(out)

    def texts(self) -> list[list[str]]:
        return [[cell.text for cell in row] for row in self.cells]

    def column(self, j: int) -> tuple[GridCell, ...]:
        return tuple(row[j] for row in self.cells)


def build_grid(n_rows: int, n_cols: int, logical_cells: Iterable[CellLike]) -> TableGrid:
    """Lay logical cells onto an ``n_rows x n_cols`` matrix.

    Cells may be :class:`GridCell` objects or tuples of
    ``(span, text[, is_column_header[, is_projected_row_header]])`` where
    ``span`` is a :class:`CellSpan` or a ``(r0, r1, c0, c1)`` tuple.

    Raises :class:`SpanOutOfBounds`, :class:`OverlappingSpans` or
    :class:`UncoveredPosition` if the cells do not tile the grid exactly.
    """
    if n_rows < 1 or n_cols < 1:
        raise SpanOutOfBounds(f"grid dimensions must be positive, got {n_rows}x{n_cols}")
    layout: list[list[GridCell | None]] = [[None] * n_cols for _ in range(n_rows)]
    for raw in logical_cells:
        cell = _coerce_cell(raw)
        span = cell.span
        if span.row_end >= n_rows or span.col_end >= n_cols:
            raise SpanOutOfBounds(f"{span} exceeds grid {n_rows}x{n_cols}")
        for r, c in span.positions():
            if layout[r][c] is not None:
                raise OverlappingSpans(
                    f"position ({r}, {c}) claimed by {layout[r][c].span} and {span}")
            layout[r][c] = cell
    for r, row in enumerate(layout):
        for c, cell in enumerate(row):
            if cell is None:
                raise UncoveredPosition(f"position ({r}, {c}) is not covered by any cell")
    return TableGrid(n_rows, n_cols, tuple(tuple(row) for row in layout))


def grid_from_texts(rows: Sequence[Sequence[str]]) -> TableGrid:
    """Convenience constructor for span-free tables given as a list of rows."""
    n_rows = len(rows)
    n_cols = max((len(r) for r in rows), default=0)
    cells = []
    for i, row in enumerate(rows):
        for j in range(n_cols):
            text = row[j] if j < len(row) else ""
            cells.append((CellSpan(i, i, j, j), text))
    return build_grid(n_rows, n_cols, cells)


def grid_exact_match(a: TableGrid | None, b: TableGrid | None,
                     criterion: Criterion | str = Criterion.TOP) -> bool:
    """Exact match under ``top`` (spans only) or ``con`` (spans and normalized text)."""
    criterion = Criterion.parse(criterion)
    if a is None or b is None:
        return a is None and b is None
    if a.shape != b.shape:
        return False
    for row_a, row_b in zip(a.cells, b.cells):
        for ca, cb in zip(row_a, row_b):
            if ca.span != cb.span:
                return False
            if criterion is Criterion.CON and normalize_text(ca.text) != normalize_text(cb.text):
                return False
    return True
