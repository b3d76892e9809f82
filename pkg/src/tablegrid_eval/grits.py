"""Grid table similarity (GriTS) between a ground-truth and a predicted grid.

For grids ``A`` (ground truth) and ``B`` (prediction), GriTS selects
sub-grids ``A~`` and ``B~`` by choosing monotone row and column maps, and
scores::

    GriTS_f(A, B) = 2 * sum_ij f(A~_ij, B~_ij) / (|A| + |B|)

The numerator is the (real-valued) true-positive mass ``tp``.  Finding the
best pair of maps exactly is expensive, so :func:`align_2d_factored` uses a
columns-then-rows dynamic-programming heuristic; :func:`align_2d_exact`
enumerates every pair of maps for small grids and serves as its oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import OracleLimitExceeded
from .grid import Criterion, GridCell, TableGrid, normalize_text

DEFAULT_ORACLE_LIMIT = 4

CellSimilarity = Callable[[GridCell, tuple, GridCell, tuple], float]
Pairs = tuple  # tuple of (gt_index, pred_index)


# ---------------------------------------------------------------------------
# cell similarity functions
# ---------------------------------------------------------------------------

def lcs_length(a: Sequence, b: Sequence) -> int:
    """Length of the longest common subsequence of two sequences."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            if x == y:
                cur.append(prev[j] + 1)
            else:
                cur.append(cur[j] if cur[j] > prev[j + 1] else prev[j + 1])
        prev = cur
    return prev[-1]


@lru_cache(maxsize=1 << 16)
def cell_sim_con(a_text: str, b_text: str) -> float:
    """Character-level LCS similarity ``2 * LCS / (len(a) + len(b))``; 1 for two empty strings."""
    total = len(a_text) + len(b_text)
    if total == 0:
        return 1.0
    return 2 * lcs_length(a_text, b_text) / total


def _box_iou(a: tuple[int, int, int, int], b: tuple[int, int, int, int]) -> float:
    ih = min(a[1], b[1]) - max(a[0], b[0])
    iw = min(a[3], b[3]) - max(a[2], b[2])
    inter = ih * iw if ih > 0 and iw > 0 else 0
    area_a = (a[1] - a[0]) * (a[3] - a[2])
    area_b = (b[1] - b[0]) * (b[3] - b[2])
    union = area_a + area_b - inter
    return inter / union if union > 0 else 0.0


def cell_sim_top(a: GridCell, a_pos: tuple[int, int], b: GridCell, b_pos: tuple[int, int]) -> float:
    """IoU of the two cells' spans, each taken relative to its own grid position."""
    return _box_iou(a.span.relative_to(*a_pos), b.span.relative_to(*b_pos))


def _con_key(cell: GridCell, pos):
    return normalize_text(cell.text)


def _top_key(cell: GridCell, pos):
    return cell.span.relative_to(*pos)


def similarity_tensor(gt: TableGrid, pred: TableGrid,
                      f: Union[Criterion, str, CellSimilarity]) -> np.ndarray:
    """``F[i, j, k, l] = f(gt[i, j], pred[k, l])`` as a 4-d array.

    For the built-in criteria, values are computed once per distinct pair of
    cell keys (normalized text or relative span) and broadcast.
    """
    if callable(f) and not isinstance(f, (str, Criterion)):
        out = np.empty((gt.n_rows, gt.n_cols, pred.n_rows, pred.n_cols))
        for i in range(gt.n_rows):
            for j in range(gt.n_cols):
                for k in range(pred.n_rows):
                    for l in range(pred.n_cols):
                        out[i, j, k, l] = f(gt[i, j], (i, j), pred[k, l], (k, l))
        return out
    criterion = Criterion.parse(f)
    key, sim = ((_con_key, cell_sim_con) if criterion is Criterion.CON
                else (_top_key, _box_iou))

    def index(grid):
        keys: dict = {}
        ids = np.empty((grid.n_rows, grid.n_cols), dtype=np.intp)
        for i, row in enumerate(grid.cells):
            for j, cell in enumerate(row):
                ids[i, j] = keys.setdefault(key(cell, (i, j)), len(keys))
        return list(keys), ids

    keys_a, ids_a = index(gt)
    keys_b, ids_b = index(pred)
    table = np.array([[sim(ka, kb) for kb in keys_b] for ka in keys_a], dtype=float)
    return table[ids_a[:, :, None, None], ids_b[None, None, :, :]]


# ---------------------------------------------------------------------------
# alignments
# ---------------------------------------------------------------------------

def _is_monotone(pairs: Pairs) -> bool:
    return all(p[0] < q[0] and p[1] < q[1] for p, q in zip(pairs, pairs[1:]))


@dataclass(frozen=True)
class Alignment2D:
    """Monotone row and column maps between two grids and their tp mass."""

    row_map: Pairs
    col_map: Pairs
    tp_score: float

    def __post_init__(self):
        if not (_is_monotone(self.row_map) and _is_monotone(self.col_map)):
            raise AssertionError(f"alignment maps cross: {self.row_map} / {self.col_map}")

    def transposed(self) -> "Alignment2D":
        """The same alignment seen with the two grids swapped."""
        return Alignment2D(tuple((b, a) for a, b in self.row_map),
                           tuple((b, a) for a, b in self.col_map), self.tp_score)


def alignment_tp(F: np.ndarray, row_map: Pairs, col_map: Pairs) -> float:
    """Correctly rounded sum of ``F`` over the aligned positions."""
    if not row_map or not col_map:
        return 0.0
    ri, rk = (np.array(v)[:, None] for v in zip(*row_map))
    cj, cl = (np.array(v)[None, :] for v in zip(*col_map))
    return math.fsum(F[ri, cj, rk, cl].ravel().tolist())


def align_1d(W, prefer: str = "first") -> tuple[float, Pairs]:
    """Monotone 1-d alignment maximizing the summed gain ``W[p, q]``.

    Returns the optimal value and, among optimal alignments using only
    positive-gain pairs, the lexicographically smallest one.  With
    ``prefer="last"`` ties go the other way: the alignment read from the
    bottom-right corner is lexicographically smallest.
    """
    W = np.asarray(W, dtype=float)
    n, m = W.shape
    if prefer == "last":
        value, pairs = align_1d(W[::-1, ::-1])
        return value, tuple((n - 1 - p, m - 1 - q) for p, q in reversed(pairs))
    w = W.tolist()
    S = [[0.0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        Si, Sn, wi = S[i], S[i + 1], w[i]
        for j in range(m - 1, -1, -1):
            best = Sn[j]
            if Si[j + 1] > best:
                best = Si[j + 1]
            take = wi[j] + Sn[j + 1]
            if take > best:
                best = take
            Si[j] = best
    pairs = []
    i = j = 0
    while i < n and j < m and S[i][j] > 0:
        target = S[i][j]
        found = None
        for p in range(i, n):
            for q in range(j, m):
                if w[p][q] > 0 and w[p][q] + S[p + 1][q + 1] == target:
                    found = (p, q)
                    break
            if found:
                break
        if found is None:  # pragma: no cover - float guard
            break
        pairs.append(found)
        i, j = found[0] + 1, found[1] + 1
    return S[0][0], tuple(pairs)


def _inner_values(F: np.ndarray) -> np.ndarray:
    """``V[j, l]``: best monotone row alignment between column j of A and column l of B.

    All column pairs are solved at once; the DP runs in both traversal
    orders and keeps the larger value so the result is exactly symmetric.
    """
    ra, ca, rb, cb = F.shape

    def sweep(G):
        n, m = G.shape[0], G.shape[2]
        nxt = np.zeros((m + 1,) + G.shape[1::2])
        for i in range(n - 1, -1, -1):
            cur = np.zeros_like(nxt)
            for k in range(m - 1, -1, -1):
                cur[k] = np.maximum(np.maximum(nxt[k], cur[k + 1]), G[i, :, k, :] + nxt[k + 1])
            nxt = cur
        return nxt[0]

    return np.maximum(sweep(F), sweep(F.transpose(2, 3, 0, 1)).T)


def _rows_given_cols(F: np.ndarray, col_map: Pairs) -> Pairs:
    if not col_map:
        return ()
    cj, cl = (list(v) for v in zip(*col_map))
    return align_1d(F[:, cj, :, cl].sum(axis=0))[1]


def _cols_given_rows(F: np.ndarray, row_map: Pairs) -> Pairs:
    if not row_map:
        return ()
    ri, rk = (list(v) for v in zip(*row_map))
    return align_1d(F[ri, :, rk, :].sum(axis=0))[1]


def _factored_pass(F: np.ndarray, prefer: str = "first") -> Alignment2D:
    """Columns scored by their best inner row alignment, then rows with columns fixed."""
    col_map = align_1d(_inner_values(F), prefer)[1]
    row_map = _rows_given_cols(F, col_map)
    return Alignment2D(row_map, col_map, alignment_tp(F, row_map, col_map))


def _refine(F: np.ndarray, start: Alignment2D, max_rounds: int = 20) -> Alignment2D:
    """Alternate column and row re-alignment while tp strictly improves."""
    best = start
    for _ in range(max_rounds):
        col_map = _cols_given_rows(F, best.row_map)
        row_map = _rows_given_cols(F, col_map)
        tp = alignment_tp(F, row_map, col_map)
        if not tp > best.tp_score:
            break
        best = Alignment2D(row_map, col_map, tp)
    return best


def _transpose_grids(F: np.ndarray) -> np.ndarray:
    return F.transpose(2, 3, 0, 1)


def _swap_axes(F: np.ndarray) -> np.ndarray:
    # rows become columns in both grids
    return F.transpose(1, 0, 3, 2)


def _swap_alignment(a: Alignment2D) -> Alignment2D:
    return Alignment2D(a.col_map, a.row_map, a.tp_score)


def align_2d_factored(gt: TableGrid, pred: TableGrid,
                      f: Union[Criterion, str, CellSimilarity] = Criterion.TOP,
                      F: Optional[np.ndarray] = None) -> Alignment2D:
    """Factored 2-d alignment built from 1-d dynamic programs.

    The base pass scores each column pair by the value of a 1-d row
    alignment inside the two columns, aligns columns on those scores, then
    aligns rows on the summed similarity over the mapped columns.  The pass
    is started columns-first and rows-first, with either grid in the
    ground-truth role, and each start is refined by alternating row and
    column re-alignment.  The best result wins, earlier starts on ties.
    Running every start in both roles keeps the score exactly symmetric.
    """
    if F is None:
        F = similarity_tensor(gt, pred, f)
    T = _transpose_grids(F)
    # each start is refined in its own frame, so swapping gt and pred only
    # permutes the candidate list
    candidates = []
    for prefer in ("first", "last"):
        def refined(G: np.ndarray) -> Alignment2D:
            return _refine(G, _factored_pass(G, prefer))

        candidates += [
            refined(F),
            _swap_alignment(refined(_swap_axes(F))),
            refined(T).transposed(),
            _swap_alignment(refined(_swap_axes(T))).transposed(),
        ]
    best = None
    for cand in candidates:
        cand = Alignment2D(cand.row_map, cand.col_map,
                           alignment_tp(F, cand.row_map, cand.col_map))
        if best is None or cand.tp_score > best.tp_score:
            best = cand
    return best


@lru_cache(maxsize=64)
def monotone_maps(n: int, m: int) -> tuple[Pairs, ...]:
    """Every monotone partial map between ``range(n)`` and ``range(m)``, sorted."""
    maps = []
    for k in range(min(n, m) + 1):
        for a in combinations(range(n), k):
            for b in combinations(range(m), k):
                maps.append(tuple(zip(a, b)))
    maps.sort()
    return tuple(maps)


def _indicator(maps: tuple[Pairs, ...], n: int, m: int) -> np.ndarray:
    out = np.zeros((len(maps), n * m))
    for t, pairs in enumerate(maps):
        for p, q in pairs:
            out[t, p * m + q] = 1.0
    return out


def align_2d_exact(gt: TableGrid, pred: TableGrid,
                   f: Union[Criterion, str, CellSimilarity] = Criterion.TOP,
                   limit: int = DEFAULT_ORACLE_LIMIT,
                   F: Optional[np.ndarray] = None) -> Alignment2D:
    """Best alignment by enumerating every (row map, column map) pair.

    Only feasible for small grids: both dimensions of both grids must be at
    most ``limit``.  Ties go to the lexicographically smallest
    ``(row_map, col_map)``.
    """
    biggest = max(gt.n_rows, gt.n_cols, pred.n_rows, pred.n_cols)
    if biggest > limit:
        raise OracleLimitExceeded(f"grid dimension {biggest} exceeds oracle limit {limit}")
    if F is None:
        F = similarity_tensor(gt, pred, f)
    ra, ca, rb, cb = F.shape
    row_maps = monotone_maps(ra, rb)
    col_maps = monotone_maps(ca, cb)
    # tp of every combination at once: rows x (row pairs) @ (row pairs) x (col pairs) @ ...
    by_pairs = F.transpose(0, 2, 1, 3).reshape(ra * rb, ca * cb)
    totals = _indicator(row_maps, ra, rb) @ by_pairs @ _indicator(col_maps, ca, cb).T
    best = totals.max()
    # matrix products round differently from fsum; settle near-ties exactly
    cand_r, cand_c = np.nonzero(totals >= best - 1e-9 * max(1.0, abs(best)))
    chosen = None
    for r, c in sorted(zip(cand_r.tolist(), cand_c.tolist())):
        tp = alignment_tp(F, row_maps[r], col_maps[c])
        if chosen is None or tp > chosen.tp_score:
            chosen = Alignment2D(row_maps[r], col_maps[c], tp)
    return chosen


# ---------------------------------------------------------------------------
# GriTS
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GritsResult:
    """Score of one ground-truth table against one prediction (or none)."""

    criterion: Criterion
    tp: float
    size_gt: int
    size_pred: int

    @property
    def score(self) -> float:
        denom = self.size_gt + self.size_pred
        return 2 * self.tp / denom if denom else 0.0

    def to_dict(self) -> dict:
        return {"criterion": self.criterion.value, "tp": self.tp, "size_gt": self.size_gt,
                "size_pred": self.size_pred, "score": self.score}


def grits(gt: Optional[TableGrid], pred: Optional[TableGrid],
          criterion: Union[Criterion, str] = Criterion.TOP) -> GritsResult:
    """GriTS of ``pred`` against ``gt``; ``None`` stands for an empty (0x0) grid."""
    criterion = Criterion.parse(criterion)
    size_gt = gt.size() if gt is not None else 0
    size_pred = pred.size() if pred is not None else 0
    if gt is None or pred is None:
        return GritsResult(criterion, 0.0, size_gt, size_pred)
    alignment = align_2d_factored(gt, pred, criterion)
    return GritsResult(criterion, alignment.tp_score, size_gt, size_pred)


def grits_exact(gt: Optional[TableGrid], pred: Optional[TableGrid],
                criterion: Union[Criterion, str] = Criterion.TOP,
                limit: int = DEFAULT_ORACLE_LIMIT) -> GritsResult:
    """GriTS with the exhaustive alignment; raises beyond ``limit``."""
    criterion = Criterion.parse(criterion)
    size_gt = gt.size() if gt is not None else 0
    size_pred = pred.size() if pred is not None else 0
    if gt is None or pred is None:
        return GritsResult(criterion, 0.0, size_gt, size_pred)
    alignment = align_2d_exact(gt, pred, criterion, limit=limit)
    return GritsResult(criterion, alignment.tp_score, size_gt, size_pred)
