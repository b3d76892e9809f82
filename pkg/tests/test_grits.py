import itertools
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridgen import delete_lines, random_grid
from tablegrid_eval.errors import OracleLimitExceeded
from tablegrid_eval.grid import CellSpan, Criterion, GridCell, build_grid, grid_exact_match, grid_from_texts
from tablegrid_eval.grits import (align_1d, align_2d_exact, align_2d_factored, alignment_tp,
                                  _box_iou, cell_sim_con, cell_sim_top, grits, grits_exact, lcs_length,
                                  monotone_maps, similarity_tensor)


def lcs_brute(a, b):
    """Longest common subsequence by enumerating the subsequences of ``a``."""
    best = 0
    for k in range(len(a), 0, -1):
        for idx in itertools.combinations(range(len(a)), k):
            sub = [a[i] for i in idx]
            it = iter(b)
            if all(any(x == y for y in it) for x in sub):
                return k
    return best


def subsequence_maps(n, m):
    """All strictly increasing index pairings, built from index combinations."""
    out = []
    for k in range(min(n, m) + 1):
        for xs in itertools.combinations(range(n), k):
            for ys in itertools.combinations(range(m), k):
                out.append(list(zip(xs, ys)))
    return out


def naive_best_tp(gt, pred, criterion):
    """Exhaustive alignment evaluated cell by cell with the raw similarity functions."""
    def f(i, j, k, l):
        if criterion is Criterion.CON:
            return cell_sim_con(" ".join(gt[i, j].text.split()), " ".join(pred[k, l].text.split()))
        return cell_sim_top(gt[i, j], (i, j), pred[k, l], (k, l))
    rows = subsequence_maps(gt.n_rows, pred.n_rows)
    cols = subsequence_maps(gt.n_cols, pred.n_cols)
    return max(math.fsum(f(i, j, k, l) for i, k in rm for j, l in cm)
               for rm in rows for cm in cols)


# --- cell similarity ----------------------------------------------------------

def test_con_examples():
    assert cell_sim_con("abc", "abc") == 1.0
    assert cell_sim_con("", "x") == 0.0
    assert cell_sim_con("", "") == 1.0
    assert cell_sim_con("abc", "abd") == pytest.approx(2 * lcs_brute("abc", "abd") / 6, abs=1e-12)
    assert cell_sim_con("abc", "abd") == pytest.approx(0.6667, abs=1e-4)


def test_lcs_matches_brute_force():
    rng = random.Random(2)
    for _ in range(400):
        a = "".join(rng.choice("abc") for _ in range(rng.randint(0, 7)))
        b = "".join(rng.choice("abc") for _ in range(rng.randint(0, 7)))
        assert lcs_length(a, b) == lcs_brute(a, b)


@given(st.text(max_size=12), st.text(max_size=12))
@settings(max_examples=200, deadline=None)
def test_con_properties(a, b):
    s = cell_sim_con(a, b)
    assert 0.0 <= s <= 1.0
    assert s == cell_sim_con(b, a)
    assert (s == 1.0) == (a == b)


def test_top_examples():
    wide = GridCell(CellSpan(0, 0, 0, 1), "")
    single = GridCell(CellSpan(0, 0, 0, 0), "")
    assert cell_sim_top(single, (0, 0), single, (0, 0)) == 1.0
    assert cell_sim_top(wide, (0, 0), single, (0, 0)) == 0.5
    # the second position of a wide cell sees the span offset to the left
    assert cell_sim_top(wide, (0, 1), single, (0, 0)) == 0.5
    tall3 = GridCell(CellSpan(0, 2, 0, 0), "")
    assert cell_sim_top(tall3, (2, 0), single, (0, 0)) == pytest.approx(1 / 3)
    # relative footprints always share the own unit square; disjoint boxes only arise directly
    assert _box_iou((0, 1, 0, 1), (1, 2, 1, 2)) == 0.0
    assert cell_sim_top(wide, (0, 1), GridCell(CellSpan(3, 3, 4, 5), ""), (3, 5)) == 1.0


# --- 1-d alignment --------------------------------------------------------------

def test_align_1d_against_enumeration():
    rng = np.random.default_rng(4)
    for _ in range(300):
        n, m = rng.integers(0, 6, size=2)
        W = rng.integers(0, 3, size=(n, m)).astype(float)
        value, pairs = align_1d(W)
        best = max((sum(W[p, q] for p, q in mp) for mp in subsequence_maps(n, m)), default=0.0)
        assert value == pytest.approx(best)
        assert sum(W[p, q] for p, q in pairs) == pytest.approx(best)
        assert all(p1 < p2 and q1 < q2 for (p1, q1), (p2, q2) in zip(pairs, pairs[1:]))


def test_monotone_maps_count():
    # sum_k C(n,k) C(m,k) = C(n+m, n)
    for n in range(5):
        for m in range(5):
            maps = monotone_maps(n, m)
            assert len(maps) == math.comb(n + m, n)
            assert len(set(maps)) == len(maps)


# --- worked examples ------------------------------------------------------------

def test_appended_column():
    g = grid_from_texts([["a", "b"], ["c", "d"]])
    h = grid_from_texts([["a", "b", "x"], ["c", "d", "y"]])
    exact = align_2d_exact(g, h, Criterion.CON)
    heur = align_2d_factored(g, h, Criterion.CON)
    assert exact.tp_score == 4 and heur.tp_score == 4
    assert heur.col_map == ((0, 0), (1, 1))
    assert naive_best_tp(g, h, Criterion.CON) == 4
    assert abs(grits(g, h, "con").score - 0.8) <= 1e-9
    assert abs(grits_exact(g, h, "con").score - 0.8) <= 1e-9


def test_identity_and_empty():
    g = grid_from_texts([["a", "b"], ["c", "d"]])
    a = align_2d_exact(g, g, Criterion.TOP)
    assert a.tp_score == 4
    assert a.row_map == ((0, 0), (1, 1)) and a.col_map == ((0, 0), (1, 1))
    assert grits(g, g, "top").score == 1.0
    r = grits(g, None, "con")
    assert (r.tp, r.size_pred, r.score) == (0.0, 0, 0.0)


def test_single_empty_cell_bound():
    rng = random.Random(9)
    tiny = grid_from_texts([[""]])
    for _ in range(50):
        g = random_grid(rng, 5, 5)
        r = grits(g, tiny, "con")
        assert r.tp <= 1.0
        assert r.score <= 2 / (g.size() + 1) + 1e-15


def test_oracle_limit():
    g = grid_from_texts([["a"] * 5] * 5)
    with pytest.raises(OracleLimitExceeded):
        align_2d_exact(g, g, Criterion.TOP, limit=4)
    assert align_2d_exact(g, g, Criterion.CON, limit=5).tp_score == 25


# --- oracle agreement and metric properties ------------------------------------

def test_exact_oracle_matches_naive_enumeration():
    rng = random.Random(21)
    for _ in range(150):
        g = random_grid(rng, 3, 3, alphabet="ab ")
        h = random_grid(rng, 3, 3, alphabet="ab ")
        for crit in Criterion:
            assert align_2d_exact(g, h, crit).tp_score == pytest.approx(
                naive_best_tp(g, h, crit), abs=1e-12)


def test_alignment_tp_matches_reported_score():
    rng = random.Random(8)
    for _ in range(200):
        g, h = random_grid(rng), random_grid(rng)
        for crit in Criterion:
            F = similarity_tensor(g, h, crit)
            for a in (align_2d_factored(g, h, crit), align_2d_exact(g, h, crit)):
                assert a.tp_score == alignment_tp(F, a.row_map, a.col_map)


def test_feasibility_and_subgrid_equality():
    rng = random.Random(17)
    n_equal = 0
    for k in range(600):
        g = random_grid(rng, 4, 4, alphabet="abc" if k % 2 else "abcdefgh")
        if k % 3:
            rows = sorted(rng.sample(range(g.n_rows), rng.randint(1, g.n_rows)))
            cols = sorted(rng.sample(range(g.n_cols), rng.randint(1, g.n_cols)))
            h = delete_lines(g, rows, cols)
        else:
            rows = cols = None
            h = random_grid(rng, 4, 4, alphabet="abc")
        for crit in Criterion:
            heur = align_2d_factored(g, h, crit).tp_score
            exact = align_2d_exact(g, h, crit).tp_score
            assert heur <= exact
            if rows is not None:
                F = similarity_tensor(g, h, crit)
                deletion_tp = alignment_tp(F, tuple(zip(rows, range(len(rows)))),
                                           tuple(zip(cols, range(len(cols)))))
                if deletion_tp == h.size():
                    n_equal += 1
                    assert heur == exact == h.size()
    assert n_equal > 300


def test_identity_symmetry_range():
    rng = random.Random(23)
    for _ in range(300):
        g, h = random_grid(rng, 5, 5), random_grid(rng, 5, 5)
        for crit in Criterion:
            assert grits(g, g, crit).score == 1.0
            ab, ba = grits(g, h, crit), grits(h, g, crit)
            assert abs(ab.score - ba.score) <= 1e-12
            assert 0.0 <= ab.score <= 1.0
            assert ab.tp <= min(g.size(), h.size()) + 1e-12
            assert grits(g, None, crit).score == 0.0


def test_exact_match_implies_score_one():
    rng = random.Random(31)
    for _ in range(200):
        g = random_grid(rng, 5, 5)
        cells = [GridCell(c.span, " " + c.text + "  ", c.is_column_header) for c in g.logical_cells()]
        h = build_grid(g.n_rows, g.n_cols, cells)
        assert grid_exact_match(g, h, "con")
        assert grits(g, h, "con").score == 1.0
        assert grits(g, h, "top").score == 1.0


def test_larger_tables_are_tractable():
    rng = random.Random(1)
    g = random_grid(rng, 30, 12)
    g = random_grid(rng, 30, 12) if g.n_rows < 30 else g
    h = delete_lines(g, [r for r in range(g.n_rows) if r % 7], list(range(g.n_cols)))
    for crit in Criterion:
        r = grits(g, h, crit)
        assert 0.0 < r.score <= 1.0
