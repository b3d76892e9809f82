"""Page-object graphs: edge F1 over relation triples and detection AP.

A page graph has one node per detected object (class label + box) and
parent-to-child edges from each table to its rows, columns, headers,
caption, footer and so on.  A predicted edge is a true positive when both
of its endpoints match the endpoints of an unused ground-truth edge: same
class label and box IoU at or above the threshold.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence, Union

import numpy as np

from .aggregation import max_weight_assignment
from .errors import MissingScores, SchemaViolation, UnknownClassName
from .taxonomy import canonical_class, is_table

EDGE_IOU_THRESHOLD = 0.8
COCO_IOU_THRESHOLDS = tuple(round(0.5 + 0.05 * k, 2) for k in range(10))


@dataclass(frozen=True)
class BBox:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min <= self.x_max and self.y_min <= self.y_max):
            raise ValueError(f"degenerate box {self}")

    @property
    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    def as_list(self) -> list[float]:
        return [self.x_min, self.y_min, self.x_max, self.y_max]

    @classmethod
    def from_seq(cls, values: Sequence[float]) -> "BBox":
        if len(values) != 4:
            raise SchemaViolation(f"bbox needs 4 numbers, got {values!r}")
        return cls(*(float(v) for v in values))


def iou(a: BBox, b: BBox) -> float:
    iw = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    ih = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    inter = iw * ih if iw > 0 and ih > 0 else 0.0
    union = a.area + b.area - inter
    return inter / union if union > 0 else 0.0


@dataclass(frozen=True)
class PageObject:
    class_label: str
    bbox: BBox
    score: Optional[float] = None

    def __post_init__(self):
        label = canonical_class(self.class_label)
        if label is None:
            raise UnknownClassName(f"unknown object class {self.class_label!r}")
        object.__setattr__(self, "class_label", label)
        if self.score is not None and not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [0, 1]")


@dataclass(frozen=True)
class PageGraph:
    nodes: tuple
    edges: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        validate_relations(self.nodes, self.edges)

    def to_obj(self) -> dict:
        nodes = []
        for node in self.nodes:
            rec = {"class": node.class_label, "bbox": node.bbox.as_list()}
            if node.score is not None:
                rec["score"] = node.score
            nodes.append(rec)
        return {"nodes": nodes, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_obj(cls, obj: dict) -> "PageGraph":
        if not isinstance(obj, dict) or "nodes" not in obj:
            raise SchemaViolation("graph JSON needs a 'nodes' list")
        nodes = []
        for k, rec in enumerate(obj["nodes"]):
            try:
                nodes.append(PageObject(rec["class"], BBox.from_seq(rec["bbox"]), rec.get("score")))
            except (KeyError, TypeError) as exc:
                raise SchemaViolation(f"node {k}: {exc}") from None
        edges = obj.get("edges", [])
        if not all(isinstance(e, (list, tuple)) and len(e) == 2 for e in edges):
            raise SchemaViolation("edges must be [source, target] pairs")
        return cls(tuple(nodes), tuple((int(s), int(t)) for s, t in edges))


def validate_relations(nodes: Sequence[PageObject], edges: Sequence[tuple[int, int]]) -> None:
    """Raise :class:`SchemaViolation` unless the edges form a table-rooted hierarchy."""
    parent_of: dict[int, int] = {}
    for s, t in edges:
        if not (0 <= s < len(nodes) and 0 <= t < len(nodes)):
            raise SchemaViolation(f"edge ({s}, {t}) references a missing object")
        if s == t:
            raise SchemaViolation(f"self-loop on object {s}")
        if not is_table(nodes[s].class_label):
            raise SchemaViolation(
                f"edge ({s}, {t}) has parent class {nodes[s].class_label!r}; parents must be tables")
        if t in parent_of:
            raise SchemaViolation(f"object {t} has two parents ({parent_of[t]} and {s})")
        parent_of[t] = s


def load_graph_json(data: Union[str, bytes]) -> PageGraph:
    try:
        obj = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise SchemaViolation(f"invalid graph JSON: {exc}") from None
    return PageGraph.from_obj(obj)


# ---------------------------------------------------------------------------
# edge F1
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EdgeScore:
    precision: float
    recall: float
    f1: float
    n_tp: int
    n_pred: int
    n_gt: int
    matches: tuple = field(default=(), compare=False)  # (pred_edge, gt_edge) pairs

    def __iter__(self) -> Iterator[float]:
        return iter((self.precision, self.recall, self.f1))


def _prf(n_tp: int, n_pred: int, n_gt: int) -> tuple[float, float, float]:
    if n_pred == 0 and n_gt == 0:
        return 1.0, 1.0, 1.0
    p = n_tp / n_pred if n_pred else 0.0
    r = n_tp / n_gt if n_gt else 0.0
    return p, r, (2 * p * r / (p + r) if p + r > 0 else 0.0)


def _node_iou(gt: PageObject, pred: PageObject) -> float:
    return iou(gt.bbox, pred.bbox) if gt.class_label == pred.class_label else -1.0


def edge_f1(gt: PageGraph, pred: PageGraph, iou_threshold: float = EDGE_IOU_THRESHOLD,
            matching: str = "greedy") -> EdgeScore:
    """Precision, recall and F1 over parent-to-child edges.

    ``matching="greedy"`` consumes candidate (pred, gt) edge pairs in order
    of decreasing ``min(source IoU, target IoU)``, ties by index.
    ``matching="hungarian"`` maximizes the number of matched edges instead.
    """
    if not 0.0 < iou_threshold <= 1.0:
        raise ValueError("iou_threshold must be in (0, 1]")
    node_iou = [[_node_iou(g, p) for p in pred.nodes] for g in gt.nodes]
    candidates = []
    for pe, (ps, pt) in enumerate(pred.edges):
        for ge, (gs, gt_) in enumerate(gt.edges):
            s_iou, t_iou = node_iou[gs][ps], node_iou[gt_][pt]
            if s_iou >= iou_threshold and t_iou >= iou_threshold:
                candidates.append((-min(s_iou, t_iou), pe, ge))
    matches = []
    if matching == "greedy":
        used_p, used_g = set(), set()
        for _, pe, ge in sorted(candidates):
            if pe in used_p or ge in used_g:
                continue
            used_p.add(pe)
            used_g.add(ge)
            matches.append((pe, ge))
    elif matching == "hungarian":
        if candidates:
            W = np.zeros((len(pred.edges), len(gt.edges)))
            for _, pe, ge in candidates:
                W[pe, ge] = 1.0
            matches = [(pe, ge) for pe, ge in max_weight_assignment(W) if W[pe, ge] > 0]
    else:
        raise ValueError(f"unknown matching {matching!r}")
    n_tp = len(matches)
    p, r, f1 = _prf(n_tp, len(pred.edges), len(gt.edges))
    return EdgeScore(p, r, f1, n_tp, len(pred.edges), len(gt.edges), tuple(sorted(matches)))


def edge_f1_corpus(pairs: Sequence[tuple[PageGraph, PageGraph]],
                   iou_threshold: float = EDGE_IOU_THRESHOLD,
                   matching: str = "greedy") -> EdgeScore:
    """Edge counts pooled over pages."""
    n_tp = n_pred = n_gt = 0
    for gt, pred in pairs:
        s = edge_f1(gt, pred, iou_threshold, matching)
        n_tp += s.n_tp
        n_pred += s.n_pred
        n_gt += s.n_gt
    p, r, f1 = _prf(n_tp, n_pred, n_gt)
    return EdgeScore(p, r, f1, n_tp, n_pred, n_gt)


# ---------------------------------------------------------------------------
# detection AP
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DetectionAP:
    per_class: dict      # class -> {threshold: AP}
    mean: dict           # threshold -> class-mean AP (None when no class has ground truth)
    thresholds: tuple

    def at(self, threshold: float) -> Optional[float]:
        return self.mean[round(threshold, 2)]

    @property
    def ap50(self) -> Optional[float]:
        return self.mean.get(0.5)

    @property
    def ap75(self) -> Optional[float]:
        return self.mean.get(0.75)

    @property
    def ap(self) -> Optional[float]:
        vals = [self.mean[t] for t in COCO_IOU_THRESHOLDS if t in self.mean]
        if len(vals) != len(COCO_IOU_THRESHOLDS) or any(v is None for v in vals):
            return None
        return math.fsum(vals) / len(vals)

    def to_dict(self) -> dict:
        return {"AP50": self.ap50, "AP75": self.ap75, "AP": self.ap,
                "per_class": {c: {f"{t:.2f}": v for t, v in d.items()}
                              for c, d in self.per_class.items()}}


def average_precision(tp_flags: Sequence[bool], n_gt: int) -> float:
    """Area under the monotone precision envelope (all-points interpolation)."""
    if n_gt == 0:
        raise ValueError("AP is undefined without ground truth")
    tp = np.cumsum(np.asarray(tp_flags, dtype=float))
    fp = np.cumsum(1.0 - np.asarray(tp_flags, dtype=float))
    recall = np.concatenate([[0.0], tp / n_gt])
    precision = np.concatenate([[1.0], tp / np.maximum(tp + fp, 1e-300)])
    # envelope: best precision at any recall >= r
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    return float(np.sum((recall[1:] - recall[:-1]) * envelope[1:]))


def detection_ap_corpus(pages: Sequence[tuple[Sequence[PageObject], Sequence[PageObject]]],
                        iou_thresholds: Sequence[float] = COCO_IOU_THRESHOLDS) -> DetectionAP:
    """AP per class and threshold, with predictions ranked across all pages."""
    for _, pred in pages:
        if any(p.score is None for p in pred):
            raise MissingScores("every predicted object needs a score")
    thresholds = tuple(round(float(t), 2) for t in iou_thresholds)
    classes = sorted({o.class_label for gt, _ in pages for o in gt})
    per_class: dict = {}
    for cls in classes:
        gt_boxes = [[o.bbox for o in gt if o.class_label == cls] for gt, _ in pages]
        n_gt = sum(len(b) for b in gt_boxes)
        ranked = sorted(((-p.score, page, k, p.bbox)
                         for page, (_, pred) in enumerate(pages)
                         for k, p in enumerate(pred) if p.class_label == cls),
                        key=lambda x: x[:3])
        per_class[cls] = {}
        for thr in thresholds:
            used = [set() for _ in pages]
            flags = []
            for _, page, _, box in ranked:
                best, best_iou = None, -1.0
                for g, gbox in enumerate(gt_boxes[page]):
                    if g in used[page]:
                        continue
                    v = iou(gbox, box)
                    if v >= thr and v > best_iou:
                        best, best_iou = g, v
                if best is not None:
                    used[page].add(best)
                flags.append(best is not None)
            per_class[cls][thr] = average_precision(flags, n_gt)
    mean = {t: (math.fsum(per_class[c][t] for c in classes) / len(classes) if classes else None)
            for t in thresholds}
    return DetectionAP(per_class, mean, thresholds)


def detection_ap(gt: Sequence[PageObject], pred: Sequence[PageObject],
                 iou_thresholds: Sequence[float] = COCO_IOU_THRESHOLDS) -> DetectionAP:
    """Single-page convenience wrapper around :func:`detection_ap_corpus`."""
    return detection_ap_corpus([(gt, pred)], iou_thresholds)
