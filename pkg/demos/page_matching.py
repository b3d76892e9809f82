# Page-level scoring: several tables per page, unknown correspondence.
from tablegrid_eval.aggregation import aggregate_mean, aggregate_pseudo_f1, match_table_sets
from tablegrid_eval.grid import grid_from_texts

small = grid_from_texts([["a", "b"], ["c", "d"]])
big = grid_from_texts([[f"{i}{j}" for j in range(4)] for i in range(5)])

gt = [small, big]
pred = [grid_from_texts([["00", "01", "02", "03"], ["10", "11", "12", "13"]]),  # half of big
        small,
        grid_from_texts([["junk"]])]                                             # spurious

m = match_table_sets(gt, pred, "con")
print("assignment", m.assignment)            # gt index -> pred index
print("unmatched predictions", m.unmatched_pred)

for r in m.per_gt_results:
    print("tp", r.tp, "|gt|", r.size_gt, "|pred|", r.size_pred, "score", round(r.score, 4))

# mean over gt tables weights the 4-cell table like the 20-cell one
print("mean", round(aggregate_mean(m.per_gt_results).f1, 4))

# pseudo-F1 pools cells, and the spurious table counts against precision
pf = aggregate_pseudo_f1(m.all_results())
print("pseudo-F1", round(pf.f1, 4), "P", round(pf.precision, 4), "R", round(pf.recall, 4))

# a missed table: recall drops, precision does not
m2 = match_table_sets(gt, [small], "con")
pf2 = aggregate_pseudo_f1(m2.all_results())
print("P", pf2.precision, "R", round(pf2.recall, 4), "mean", aggregate_mean(m2.per_gt_results).f1)
