"""Corpus-level aggregation of GriTS results and table-set matching.

Two aggregate scores are supported.  ``mean`` averages per-table GriTS over
ground-truth tables.  ``pseudo_f1`` treats the summed true-positive mass as
a real-valued TP count over all grid cells of the corpus::

    precision = sum(tp) / sum(|pred|)      recall = sum(tp) / sum(|gt|)

For page- and document-level evaluation the correspondence between
predicted and ground-truth tables is unknown; :func:`match_table_sets`
recovers it with a maximum-weight assignment on true-positive mass.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import EmptyCorpus, LengthMismatch
from .grid import Criterion, TableGrid, grid_exact_match
from .grits import GritsResult, grits


class AggregateMode(str, Enum):
    MEAN = "mean"
    PSEUDO_F1 = "pseudo_f1"


@dataclass(frozen=True)
class AggregateScore:
    mode: AggregateMode
    f1: float
    precision: Optional[float] = None
    recall: Optional[float] = None
    n_gt_cells: int = 0
    n_pred_cells: int = 0
    n_tables: int = 0

    @property
    def value(self) -> float:
        return self.f1


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def aggregate_mean(results: Sequence[GritsResult]) -> AggregateScore:
    """Mean GriTS over the given (ground-truth) tables."""
    if not results:
        raise EmptyCorpus("cannot aggregate an empty list of results")
    mean = math.fsum(r.score for r in results) / len(results)
    return AggregateScore(AggregateMode.MEAN, mean,
                          n_gt_cells=sum(r.size_gt for r in results),
                          n_pred_cells=sum(r.size_pred for r in results),
                          n_tables=len(results))


def aggregate_pseudo_f1(results: Sequence[GritsResult]) -> AggregateScore:
    """Pseudo-F1 over all grid cells of all tables."""
    if not results:
        raise EmptyCorpus("cannot aggregate an empty list of results")
    tp = math.fsum(r.tp for r in results)
    n_gt = sum(r.size_gt for r in results)
    n_pred = sum(r.size_pred for r in results)
    precision = tp / n_pred if n_pred else 0.0
    recall = tp / n_gt if n_gt else 0.0
    return AggregateScore(AggregateMode.PSEUDO_F1, _f1(precision, recall), precision, recall,
                          n_gt, n_pred, sum(1 for r in results if r.size_gt))


def exact_match_accuracy(pairs: Sequence[tuple[TableGrid, Optional[TableGrid]]],
                         criterion: Union[Criterion, str] = Criterion.TOP) -> float:
    """Fraction of ``(gt, pred)`` pairs whose prediction exists and matches exactly."""
    if not pairs:
        raise EmptyCorpus("no table pairs")
    hits = sum(1 for gt, pred in pairs
               if pred is not None and grid_exact_match(gt, pred, criterion))
    return hits / len(pairs)


# ---------------------------------------------------------------------------
# assignment
# ---------------------------------------------------------------------------

def _best_total(W: np.ndarray) -> float:
    if W.size == 0:
        return 0.0
    rows, cols = linear_sum_assignment(W, maximize=True)
    return math.fsum(W[rows, cols].tolist())


def max_weight_assignment(weights, rel_tol: float = 1e-9) -> list[tuple[int, int]]:
    """Maximum-weight one-to-one assignment on a non-negative weight matrix.

    Returns ``min(n_rows, n_cols)`` pairs.  Among optimal assignments (up
    to ``rel_tol``) the one whose sorted pair list is lexicographically
    smallest is returned, so results do not depend on solver internals.
    """
    W = np.asarray(weights, dtype=float)
    if W.ndim != 2:
        raise ValueError("weights must be a 2-d matrix")
    n, m = W.shape
    if n == 0 or m == 0:
        return []
    if (W < 0).any():
        raise ValueError("weights must be non-negative")
    best = _best_total(W)
    tol = rel_tol * max(1.0, abs(best))
    rows_left = list(range(n))
    cols_left = list(range(m))
    fixed = 0.0
    chosen = []
    for i in range(n):
        rows_left.remove(i)
        # the smallest feasible column for row i; if none, row i stays unmatched
        for j in list(cols_left):
            rest_cols = [c for c in cols_left if c != j]
            rest = _best_total(W[np.ix_(rows_left, rest_cols)]) if rows_left and rest_cols else 0.0
            if fixed + W[i, j] + rest >= best - tol:
                chosen.append((i, j))
                fixed += W[i, j]
                cols_left = rest_cols
                break
        if len(chosen) == min(n, m):
            break
    return chosen


@dataclass
class TableSetMatch:
    """One-to-one correspondence between ground-truth and predicted tables."""

    assignment: list[tuple[int, int]]
    unmatched_gt: list[int]
    unmatched_pred: list[int]
    per_gt_results: list[GritsResult]
    unmatched_pred_results: list[GritsResult] = field(default_factory=list)

    @property
    def total_tp(self) -> float:
        return math.fsum(r.tp for r in self.per_gt_results)

    def pred_for_gt(self, gt_index: int) -> Optional[int]:
        for g, p in self.assignment:
            if g == gt_index:
                return p
        return None

    def all_results(self) -> list[GritsResult]:
        """Per-gt results followed by zero-tp records for unmatched predictions."""
        return self.per_gt_results + self.unmatched_pred_results


def tp_matrix(gt: Sequence[TableGrid], pred: Sequence[TableGrid],
              criterion: Union[Criterion, str] = Criterion.TOP) -> list[list[GritsResult]]:
    return [[grits(g, p, criterion) for p in pred] for g in gt]


def match_table_sets(gt: Sequence[TableGrid], pred: Sequence[TableGrid],
                     criterion: Union[Criterion, str] = Criterion.TOP,
                     results: Optional[list[list[GritsResult]]] = None) -> TableSetMatch:
    """Match predicted to ground-truth tables maximizing the total tp mass.

    ``results`` may carry a precomputed ``len(gt) x len(pred)`` matrix of
    :class:`GritsResult`.  Unmatched ground-truth tables score ``tp = 0``
    against an empty prediction.
    """
    criterion = Criterion.parse(criterion)
    if results is None:
        results = tp_matrix(gt, pred, criterion)
    weights = np.array([[r.tp for r in row] for row in results], dtype=float).reshape(len(gt), len(pred))
    assignment = max_weight_assignment(weights)
    by_gt = dict(assignment)
    per_gt = []
    for i, g in enumerate(gt):
        j = by_gt.get(i)
        per_gt.append(results[i][j] if j is not None
                      else GritsResult(criterion, 0.0, g.size(), 0))
    matched_pred = set(by_gt.values())
    unmatched_pred = [j for j in range(len(pred)) if j not in matched_pred]
    return TableSetMatch(
        assignment=assignment,
        unmatched_gt=[i for i in range(len(gt)) if i not in by_gt],
        unmatched_pred=unmatched_pred,
        per_gt_results=per_gt,
        unmatched_pred_results=[GritsResult(criterion, 0.0, 0, pred[j].size())
                                for j in unmatched_pred],
    )


# ---------------------------------------------------------------------------
# binary classification
# ---------------------------------------------------------------------------

_POSITIVE = {True, 1, "pos", "positive", "+", "1", "true"}
_NEGATIVE = {False, 0, "neg", "negative", "-", "0", "false"}


def _as_label(value) -> bool:
    key = value.strip().lower() if isinstance(value, str) else value
    if key in _POSITIVE:
        return True
    if key in _NEGATIVE:
        return False
    raise ValueError(f"not a binary label: {value!r}")


def binary_prf(gold: Sequence, predicted: Sequence) -> tuple[float, float, float]:
    """Recall, precision and F1 of the positive class."""
    if len(gold) != len(predicted):
        raise LengthMismatch(f"{len(gold)} gold labels vs {len(predicted)} predictions")
    if not gold:
        raise EmptyCorpus("no labels")
    tp = fp = fn = 0
    for g, p in zip(gold, predicted):
        g, p = _as_label(g), _as_label(p)
        tp += g and p
        fp += p and not g
        fn += g and not p
    recall = tp / (tp + fn) if tp + fn else 0.0
    precision = tp / (tp + fp) if tp + fp else 0.0
    return recall, precision, _f1(precision, recall)


# ---------------------------------------------------------------------------
# report block
# ---------------------------------------------------------------------------

def corpus_block(per_gt: dict[Criterion, list[GritsResult]],
                 extra_pred: dict[Criterion, list[GritsResult]],
                 exact: dict[Criterion, list[bool]]) -> dict:
    """Corpus summary with both aggregation modes side by side.

    ``per_gt`` holds one result per ground-truth table, ``extra_pred`` the
    zero-tp records of unmatched predictions (they only lower precision).
    """
    block: dict = {}
    for criterion, results in per_gt.items():
        name = f"grits_{criterion.value}"
        if not results:
            block[name] = {"mean": None, "pseudo_f1": None}
            continue
        mean = aggregate_mean(results)
        pf1 = aggregate_pseudo_f1(list(results) + list(extra_pred.get(criterion, [])))
        block[name] = {
            "mean": mean.f1,
            "pseudo_f1": {"p": pf1.precision, "r": pf1.recall, "f1": pf1.f1},
        }
    for criterion, flags in exact.items():
        block[f"acc_{criterion.value}"] = (sum(flags) / len(flags)) if flags else None
    return block
