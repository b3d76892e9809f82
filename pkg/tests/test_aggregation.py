import itertools
import math
import random

import numpy as np
import pytest

from gridgen import random_grid
from tablegrid_eval.aggregation import (AggregateMode, aggregate_mean, aggregate_pseudo_f1,
                                        binary_prf, corpus_block, exact_match_accuracy,
                                        match_table_sets, max_weight_assignment)
from tablegrid_eval.errors import EmptyCorpus, LengthMismatch
from tablegrid_eval.grid import Criterion, grid_from_texts
from tablegrid_eval.grits import GritsResult, grits

G2 = grid_from_texts([["a", "b"], ["c", "d"]])


def permutation_best(W):
    """Maximum total weight over all one-to-one assignments."""
    n, m = W.shape
    if n == 0 or m == 0:
        return 0.0
    if n <= m:
        return max(math.fsum(W[i, p[i]] for i in range(n))
                   for p in itertools.permutations(range(m), n))
    return max(math.fsum(W[p[j], j] for j in range(m))
               for p in itertools.permutations(range(n), m))


def test_mean_examples():
    r1 = GritsResult(Criterion.TOP, 4.0, 4, 4)
    r0 = GritsResult(Criterion.TOP, 0.0, 4, 0)
    assert aggregate_mean([r1]).f1 == 1.0
    assert aggregate_mean([r1, r0]).f1 == 0.5
    with pytest.raises(EmptyCorpus):
        aggregate_mean([])


def test_pseudo_f1_two_table_fixture():
    perfect = grits(G2, G2, "top")
    missing = grits(G2, None, "top")
    assert (perfect.tp, perfect.size_gt, perfect.size_pred) == (4.0, 4, 4)
    assert (missing.tp, missing.size_pred) == (0.0, 0)
    agg = aggregate_pseudo_f1([perfect, missing])
    assert agg.mode is AggregateMode.PSEUDO_F1
    assert agg.precision == 1.0 and agg.recall == 0.5
    assert abs(agg.f1 - 2 / 3) <= 1e-9
    assert abs(aggregate_mean([perfect, missing]).f1 - 0.5) <= 1e-9
    single = aggregate_pseudo_f1([perfect])
    assert (single.precision, single.recall, single.f1) == (1.0, 1.0, 1.0)


def test_pseudo_f1_equals_mean_for_equal_sizes():
    rng = random.Random(3)
    for _ in range(200):
        results = [GritsResult(Criterion.CON, rng.uniform(0, 4), 6, 4) for _ in range(rng.randint(1, 8))]
        assert aggregate_pseudo_f1(results).f1 == pytest.approx(aggregate_mean(results).f1, rel=1e-12)


def test_unmatchable_prediction_only_lowers_precision():
    rng = random.Random(4)
    for _ in range(100):
        sizes = [rng.randint(1, 6) for _ in range(3)]
        results = [GritsResult(Criterion.TOP, rng.uniform(0, min(4, n)), 4, n) for n in sizes]
        base = aggregate_pseudo_f1(results)
        more = aggregate_pseudo_f1(results + [GritsResult(Criterion.TOP, 0.0, 0, 5)])
        assert more.precision <= base.precision
        assert more.recall == base.recall
        for agg in (base, more):
            assert 0 <= agg.f1 <= 1 and 0 <= agg.precision <= 1 and 0 <= agg.recall <= 1


def test_exact_match_accuracy():
    changed = grid_from_texts([["a", "b"], ["c", "X"]])
    assert exact_match_accuracy([(G2, G2)]) == 1.0
    assert exact_match_accuracy([(G2, None)]) == 0.0
    assert exact_match_accuracy([(G2, G2), (G2, changed)], "con") == 0.5
    assert exact_match_accuracy([(G2, G2), (G2, changed)], "top") == 1.0
    with pytest.raises(EmptyCorpus):
        exact_match_accuracy([])


def test_assignment_examples():
    W = np.array([[0.9, 0.2], [0.3, 0.8]]) * 4
    assert max_weight_assignment(W) == [(0, 0), (1, 1)]
    assert max_weight_assignment(np.zeros((0, 3))) == []
    # ties resolve to the lexicographically smallest pair list
    assert max_weight_assignment(np.ones((2, 2))) == [(0, 0), (1, 1)]
    with pytest.raises(ValueError):
        max_weight_assignment([[-1.0]])


def test_assignment_against_permutations():
    rng = np.random.default_rng(12)
    for k in range(600):
        n, m = rng.integers(0, 6, size=2)
        if k % 3 == 0:
            W = rng.integers(0, 4, size=(n, m)).astype(float)
        else:
            W = rng.random((n, m)) * rng.integers(1, 30)
        pairs = max_weight_assignment(W)
        assert len(pairs) == min(n, m)
        assert len({i for i, _ in pairs}) == len(pairs) == len({j for _, j in pairs})
        assert math.fsum(W[i, j] for i, j in pairs) == pytest.approx(permutation_best(W), rel=1e-12, abs=1e-12)


def test_match_table_sets():
    g1 = grid_from_texts([["a", "b"]])
    g2 = grid_from_texts([["x"], ["y"], ["z"]])
    m = match_table_sets([g1], [g1])
    assert m.assignment == [(0, 0)] and m.total_tp == g1.size()
    m = match_table_sets([g1, g2], [])
    assert m.unmatched_gt == [0, 1]
    assert [r.score for r in m.per_gt_results] == [0.0, 0.0]
    m = match_table_sets([g1, g2], [g2, g1, grid_from_texts([["q"]])], "con")
    assert m.pred_for_gt(0) == 1 and m.pred_for_gt(1) == 0
    assert m.unmatched_pred == [2]
    assert [r.size_pred for r in m.unmatched_pred_results] == [1]
    assert len(m.all_results()) == 3


def test_match_invariant_under_pred_permutation():
    rng = random.Random(6)
    for _ in range(60):
        gt = [random_grid(rng, 3, 3, alphabet="abcd") for _ in range(rng.randint(1, 3))]
        pred = [random_grid(rng, 3, 3, alphabet="abcd") for _ in range(rng.randint(1, 3))]
        perm = list(range(len(pred)))
        rng.shuffle(perm)
        a = match_table_sets(gt, pred, "con")
        b = match_table_sets(gt, [pred[p] for p in perm], "con")
        assert a.total_tp == pytest.approx(b.total_tp, abs=1e-12)


def test_binary_prf():
    assert binary_prf([1, 0, 1], [1, 0, 1]) == (1.0, 1.0, 1.0)
    r, p, f = binary_prf(["+", "+"], ["-", "-"])
    assert r == 0.0
    assert binary_prf(["+", "+", "-", "-"], ["+", "-", "+", "-"]) == (0.5, 0.5, 0.5)
    assert binary_prf(["positive", "negative"], ["positive", "positive"]) == (1.0, 0.5, 2 / 3)
    with pytest.raises(LengthMismatch):
        binary_prf([1], [1, 0])
    with pytest.raises(EmptyCorpus):
        binary_prf([], [])


def test_corpus_block_layout():
    perfect = grits(G2, G2, "top")
    missing = grits(G2, None, "top")
    block = corpus_block({Criterion.TOP: [perfect, missing]},
                         {Criterion.TOP: [GritsResult(Criterion.TOP, 0.0, 0, 4)]},
                         {Criterion.TOP: [True, False]})
    assert block["grits_top"]["mean"] == 0.5
    assert block["grits_top"]["pseudo_f1"]["p"] == 0.5
    assert block["grits_top"]["pseudo_f1"]["r"] == 0.5
    assert block["acc_top"] == 0.5
