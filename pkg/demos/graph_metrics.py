# Page graphs: objects with boxes, table -> child relations.
from tablegrid_eval.graph import BBox, PageGraph, PageObject, detection_ap, edge_f1, iou

table = PageObject("table", BBox(100, 100, 900, 600))
header = PageObject("table column header", BBox(100, 100, 900, 150))
row = PageObject("table row", BBox(100, 150, 900, 200))
gt = PageGraph([table, header, row], [(0, 1), (0, 2)])

print(edge_f1(gt, gt))   # identical graphs

# the predicted row box slides down: IoU 1/3 is below the 0.8 node threshold
row_off = PageObject("table row", BBox(100, 175, 900, 225))
print(round(iou(row.bbox, row_off.bbox), 3))
pred = PageGraph([table, header, row_off], [(0, 1), (0, 2)])
s = edge_f1(gt, pred, iou_threshold=0.8)
print(s.precision, s.recall, s.n_tp)
print(edge_f1(gt, pred, iou_threshold=0.3).n_tp)

# detection AP from scored boxes, all-points envelope
preds = [PageObject("table", BBox(100, 100, 900, 560), 0.9),     # IoU 0.92
         PageObject("table row", BBox(100, 160, 900, 210), 0.7),  # IoU ~0.67
         PageObject("table row", BBox(0, 700, 50, 750), 0.95)]    # false positive
ap = detection_ap([table, header, row], preds)
print("AP50", ap.ap50, "AP75", ap.ap75, "AP", round(ap.ap, 4))
for cls, by_thr in ap.per_class.items():
    print(cls, by_thr[0.5], by_thr[0.75])
