import random

import pytest

from gridgen import random_grid
from tablegrid_eval.errors import OverlappingSpans, SpanOutOfBounds, UncoveredPosition
from tablegrid_eval.grid import (CellSpan, Criterion, GridCell, build_grid, grid_exact_match,
                                 grid_from_texts, normalize_text)


def test_single_cell():
    g = build_grid(1, 1, [((0, 0, 0, 0), "x")])
    assert g.shape == (1, 1)
    assert g[0, 0].text == "x"
    assert g.size() == 1


def test_rowspan_shares_parent():
    g = build_grid(2, 2, [((0, 1, 0, 0), "a"), ((0, 0, 1, 1), "b"), ((1, 1, 1, 1), "c")])
    assert g[0, 0] is g[1, 0]
    assert g[1, 0].text == "a"
    assert g[1, 0].parent_span == CellSpan(0, 1, 0, 0)
    assert [c.text for c in g.logical_cells()] == ["a", "b", "c"]


def test_overlap_rejected():
    with pytest.raises(OverlappingSpans):
        build_grid(2, 2, [((0, 0, 0, 0), "a"), ((0, 0, 0, 0), "d"),
                          ((0, 0, 1, 1), "b"), ((1, 1, 0, 1), "c")])


def test_uncovered_rejected():
    with pytest.raises(UncoveredPosition):
        build_grid(2, 2, [((0, 0, 0, 1), "a"), ((1, 1, 0, 0), "b")])


def test_out_of_bounds_rejected():
    with pytest.raises(SpanOutOfBounds):
        build_grid(1, 1, [((0, 0, 0, 1), "a")])
    with pytest.raises(SpanOutOfBounds):
        CellSpan(1, 0, 0, 0)


def test_long_and_wide_thresholds():
    assert grid_from_texts([[""]] * 30).is_long()
    assert not grid_from_texts([[""]] * 29).is_long()
    assert grid_from_texts([[""] * 12]).is_wide()
    assert not grid_from_texts([[""] * 11]).is_wide()


def test_normalize_text():
    assert normalize_text("  a \t b\n\nC. ") == "a b C."
    assert normalize_text("") == ""


def test_exact_match_examples():
    g = grid_from_texts([["a", "b"], ["c", "d"]])
    assert grid_exact_match(g, g, Criterion.CON)
    assert not grid_exact_match(g, grid_from_texts([["a", "b", ""], ["c", "d", ""]]), "top")
    g2 = grid_from_texts([["a", "b"], ["c", "X"]])
    assert grid_exact_match(g, g2, "top")
    assert not grid_exact_match(g, g2, "con")
    assert grid_exact_match(g, grid_from_texts([[" a", "b "], ["c", "d"]]), "con")


def test_exact_match_none():
    g = grid_from_texts([["a"]])
    assert not grid_exact_match(g, None)
    assert grid_exact_match(None, None)


def test_properties_over_random_grids():
    rng = random.Random(7)
    for _ in range(300):
        g = random_grid(rng, 6, 6, header_rows=True)
        cells = g.logical_cells()
        assert sum(c.span.area for c in cells) == g.size()
        rebuilt = build_grid(g.n_rows, g.n_cols, list(reversed(cells)))
        assert rebuilt == g
        for r in range(g.n_rows):
            for c in range(g.n_cols):
                assert g[r, c].span.contains(r, c)
        assert grid_exact_match(g, g, "top") and grid_exact_match(g, g, "con")


def test_exact_match_is_equivalence():
    rng = random.Random(3)
    grids = [random_grid(rng, 2, 2, alphabet="ab") for _ in range(40)]
    for crit in Criterion:
        for a in grids:
            for b in grids:
                ab = grid_exact_match(a, b, crit)
                assert ab == grid_exact_match(b, a, crit)
                if ab:
                    for c in grids:
                        if grid_exact_match(b, c, crit):
                            assert grid_exact_match(a, c, crit)
        for a in grids:
            for b in grids:
                if grid_exact_match(a, b, "con"):
                    assert grid_exact_match(a, b, "top")


def test_cell_flags_kept():
    g = build_grid(1, 2, [GridCell(CellSpan(0, 0, 0, 0), "h", True), ((0, 0, 1, 1), "x")])
    assert g[0, 0].is_column_header and not g[0, 1].is_column_header
