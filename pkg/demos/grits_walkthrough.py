# Grid table similarity on a few small tables, step by step.
import numpy as np

from tablegrid_eval.grid import build_grid, grid_from_texts
from tablegrid_eval.grits import align_2d_exact, align_2d_factored, grits, similarity_tensor
from tablegrid_eval.parsers import parse_html_tables, parse_span_markdown

gt = grid_from_texts([["Year", "Sales", "Profit"],
                      ["2021", "10.2", "1.1"],
                      ["2022", "12.9", "1.7"]])

# a prediction that lost the last column and misread one digit
pred = grid_from_texts([["Year", "Sales"],
                        ["2021", "10.2"],
                        ["2022", "12.8"]])

for crit in ("top", "con"):
    r = grits(gt, pred, crit)
    print(crit, "tp =", round(r.tp, 4), "score =", round(r.score, 4))

# which rows and columns were paired up
a = align_2d_factored(gt, pred, "con")
print("rows", a.row_map, "cols", a.col_map)

# on tables this small the exhaustive search is cheap; it agrees
print("exact tp", align_2d_exact(gt, pred, "con").tp_score)

# the 4-d similarity tensor behind it: F[i, j, k, l] = f(gt[i, j], pred[k, l])
F = similarity_tensor(gt, pred, "con")
print(F.shape, np.round(F[2, 1, 2, 1], 3))   # "12.9" vs "12.8"

# spanning cells change the topology score only
merged = build_grid(2, 2, [((0, 0, 0, 1), "Total"), ((1, 1, 0, 0), "a"), ((1, 1, 1, 1), "b")])
split = grid_from_texts([["Total", ""], ["a", "b"]])
print("top", round(grits(merged, split, "top").score, 4),
      "con", round(grits(merged, split, "con").score, 4))

# model output in HTML or span markdown parses into the same structure
html = "<table><tr><th colspan='2'>Total</th></tr><tr><td>a</td><td>b</td></tr></table>"
md = "| <COLSPAN=2> Total |\n| --- | --- |\n| a | b |"
(from_html,) = parse_html_tables(html).grids
(from_md,) = parse_span_markdown(md).grids
print(from_html == from_md, grits(merged, from_md, "top").score)

# an unparsable answer scores zero
print(grits(gt, None, "con").score)
