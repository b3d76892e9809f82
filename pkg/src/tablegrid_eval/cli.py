"""Command-line front end.

Every subcommand writes a JSON report (to ``--out`` or stdout) and emits
per-sample warnings as JSON lines on stderr.  Exit status is 0 on success,
1 when the run finished but some samples failed, 2 on configuration errors.

Evaluation corpora are directories of files named ``<sample>.<ext>``; the
ground-truth format follows the extension, predictions are read in
``--format``.  A missing or unparsable prediction is scored as an empty one.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

from .aggregation import binary_prf, corpus_block, match_table_sets
from .datagen import (MATCH_THRESHOLD, read_pairs_jsonl, sample_continuation_pairs,
                      verify_multipart_match, write_pairs_jsonl)
from .dataset import corpus_stats, read_documents_json
from .errors import ConfigError, EmptyCorpus, MissingScores, OracleLimitExceeded, TableEvalError
from .graph import (COCO_IOU_THRESHOLDS, detection_ap_corpus, edge_f1, load_graph_json)
from .grid import Criterion, TableGrid, grid_exact_match
from .grits import DEFAULT_ORACLE_LIMIT, GritsResult, grits, grits_exact
from .parsers import FORMATS, format_for_path, parse_tables

JOBS_ENV = "TABLEGRID_EVAL_JOBS"
_PRED_EXTENSIONS = {"html": (".html", ".htm"), "span-markdown": (".md", ".markdown"),
                    "grid-json": (".json",)}
_TABLE_EXTENSIONS = (".html", ".htm", ".md", ".markdown", ".json")


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _dump(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False, indent=2) + "\n"


def _emit(report: dict, out: Optional[str], text: Optional[str] = None) -> None:
    payload = _dump(report)
    if out:
        Path(out).write_text(payload, encoding="utf-8")
    else:
        sys.stdout.write(payload)
    if text is not None:
        sys.stdout.write(text)


def _warn(sample: Optional[str], code: str, message: str) -> None:
    rec = {"sample": sample, "code": code, "message": message}
    sys.stderr.write(json.dumps(rec, ensure_ascii=False) + "\n")


def _need_dir(path: Optional[str], flag: str) -> Path:
    if not path:
        raise ConfigError(f"{flag} is required")
    p = Path(path)
    if not p.is_dir():
        raise ConfigError(f"{flag} {path} is not a directory")
    return p


def _need_file(path: Optional[str], flag: str) -> Path:
    if not path:
        raise ConfigError(f"{flag} is required")
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"{flag} {path} is not a file")
    return p


def _criteria(value: str) -> list[Criterion]:
    try:
        out = [Criterion.parse(v) for v in value.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if not out:
        raise ConfigError("--criterion needs at least one of top, con")
    return list(dict.fromkeys(out))


def _jobs(value: Optional[int]) -> int:
    if value is None:
        env = os.environ.get(JOBS_ENV, "1")
        try:
            value = int(env)
        except ValueError:
            raise ConfigError(f"{JOBS_ENV}={env!r} is not an integer") from None
    if value < 1:
        raise ConfigError("--jobs must be at least 1")
    return value


def _iou(value: float) -> float:
    if not 0.0 < value <= 1.0:
        raise ConfigError(f"--iou must lie in (0, 1], got {value}")
    return value


def _run_pool(fn: Callable, items: Sequence, jobs: int) -> list:
    """Map ``fn`` over ``items`` keeping input order."""
    if jobs == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


def _samples(gt_dir: Path, extensions: Sequence[str]) -> list[tuple[str, Path]]:
    out = {}
    for f in sorted(gt_dir.iterdir()):
        if f.is_file() and f.suffix.lower() in extensions and f.stem not in out:
            out[f.stem] = f
    return sorted(out.items())


def _pred_path(pred_dir: Path, stem: str, fmt: str) -> Optional[Path]:
    for ext in _PRED_EXTENSIONS[fmt]:
        p = pred_dir / (stem + ext)
        if p.is_file():
            return p
    return None


def _read_tables(path: Path, fmt: str) -> tuple[list[TableGrid], list[dict]]:
    report = parse_tables(path.read_bytes(), fmt)
    return list(report.grids), [dataclasses.asdict(w) for w in report.warnings]


# ---------------------------------------------------------------------------
# table evaluation
# ---------------------------------------------------------------------------

def _pair_record(gt: TableGrid, pred: Optional[TableGrid], criteria: list[Criterion],
                 results: dict[Criterion, GritsResult], oracle_limit: Optional[int]) -> dict:
    rec: dict = {"gt_shape": list(gt.shape),
                 "pred_shape": list(pred.shape) if pred is not None else None}
    for c in criteria:
        r = results[c]
        rec[f"grits_{c.value}"] = r.score
        rec[f"tp_{c.value}"] = r.tp
        rec[f"exact_{c.value}"] = pred is not None and grid_exact_match(gt, pred, c)
        if oracle_limit is not None:
            try:
                exact = grits_exact(gt, pred, c, limit=oracle_limit)
                rec[f"oracle_gap_{c.value}"] = exact.tp - r.tp
            except OracleLimitExceeded:
                rec[f"oracle_gap_{c.value}"] = None
    rec["size_gt"] = gt.size()
    rec["size_pred"] = pred.size() if pred is not None else 0
    return rec


def _eval_sample(task: tuple) -> dict:
    """Evaluate one sample; ``mode`` is ``tsr`` (single table) or ``set``."""
    mode, stem, gt_path, pred_path, fmt, criteria, oracle_limit = task
    out: dict = {"sample": stem, "status": "ok", "warnings": []}
    per_gt = {c: [] for c in criteria}
    extra = {c: [] for c in criteria}
    exact = {c: [] for c in criteria}
    try:
        gt_tables, gt_warn = _read_tables(Path(gt_path), format_for_path(gt_path))
    except (TableEvalError, ValueError, OSError) as exc:
        gt_tables, gt_warn = [], [{"code": type(exc).__name__, "message": str(exc)}]
    if gt_warn:
        out["warnings"] += [dict(w, source="gt") for w in gt_warn]
    if not gt_tables:
        out["status"] = "failed"
        out["error"] = "no ground-truth table"
        return {"record": out, "per_gt": per_gt, "extra": extra, "exact": exact}
    if mode == "tsr":
        gt_tables = gt_tables[:1]
    pred_tables: list[TableGrid] = []
    if pred_path is None:
        out["status"] = "failed"
        out["warnings"].append({"code": "MissingPrediction", "message": "no prediction file",
                                "source": "pred"})
    else:
        try:
            pred_tables, pred_warn = _read_tables(Path(pred_path), fmt)
            hard = False
        except (TableEvalError, ValueError, OSError) as exc:
            pred_warn = [{"code": type(exc).__name__, "message": str(exc)}]
            hard = True
        out["warnings"] += [dict(w, source="pred") for w in pred_warn]
        # a page may legitimately have no predicted table; a cropped table may not
        if hard or (mode == "tsr" and not pred_tables):
            out["status"] = "failed"
    if mode == "tsr":
        pred = pred_tables[0] if pred_tables else None
        gt = gt_tables[0]
        results = {c: grits(gt, pred, c) for c in criteria}
        out["tables"] = [dict(gt_index=0, pred_index=0 if pred is not None else None,
                              **_pair_record(gt, pred, criteria, results, oracle_limit))]
        for c in criteria:
            per_gt[c].append(results[c])
            exact[c].append(out["tables"][0][f"exact_{c.value}"])
        return {"record": out, "per_gt": per_gt, "extra": extra, "exact": exact}

    # set matching: the assignment is fixed by the first criterion
    primary = criteria[0]
    matrices = {c: [[grits(g, p, c) for p in pred_tables] for g in gt_tables] for c in criteria}
    match = match_table_sets(gt_tables, pred_tables, primary, results=matrices[primary])
    tables = []
    for i, gt in enumerate(gt_tables):
        j = match.pred_for_gt(i)
        pred = pred_tables[j] if j is not None else None
        results = {c: (matrices[c][i][j] if j is not None else grits(gt, None, c)) for c in criteria}
        rec = dict(gt_index=i, pred_index=j, **_pair_record(gt, pred, criteria, results, oracle_limit))
        tables.append(rec)
        for c in criteria:
            per_gt[c].append(results[c])
            exact[c].append(rec[f"exact_{c.value}"])
    for j in match.unmatched_pred:
        for c in criteria:
            extra[c].append(GritsResult(c, 0.0, 0, pred_tables[j].size()))
    out["tables"] = tables
    out["unmatched_pred"] = match.unmatched_pred
    return {"record": out, "per_gt": per_gt, "extra": extra, "exact": exact}


def _text_table(name: str, block: dict, criteria: list[Criterion]) -> str:
    cols = ["Model"]
    vals = [name]
    for c in criteria:
        g = block.get(f"grits_{c.value}") or {}
        cols.append(f"GriTS_{c.value.capitalize()}")
        vals.append(_fmt(g.get("mean")))
        pf = g.get("pseudo_f1") or {}
        cols.append(f"GriTS_{c.value.capitalize()} (F1)")
        vals.append(_fmt(pf.get("f1")))
    for c in criteria:
        cols.append(f"Acc_{c.value.capitalize()}")
        vals.append(_fmt(block.get(f"acc_{c.value}")))
    return _align([cols, vals])


def _fmt(v: Any) -> str:
    return "-" if v is None else f"{v:.4f}"


def _align(rows: list[list[str]]) -> str:
    widths = [max(len(r[k]) for r in rows) for k in range(len(rows[0]))]
    lines = ["  ".join(cell.ljust(w) if k == 0 else cell.rjust(w)
                       for k, (cell, w) in enumerate(zip(r, widths))).rstrip() for r in rows]
    lines.insert(1, "-" * len(lines[0]))
    return "\n".join(lines) + "\n"


def cmd_eval_tables(args: argparse.Namespace, mode: str, level: str) -> int:
    gt_dir = _need_dir(args.gt, "--gt")
    pred_dir = _need_dir(args.pred, "--pred")
    if args.format not in FORMATS:
        raise ConfigError(f"--format must be one of {', '.join(FORMATS)}")
    criteria = _criteria(args.criterion)
    jobs = _jobs(args.jobs)
    if args.oracle_limit < 1:
        raise ConfigError("--oracle-limit must be at least 1")
    oracle = args.oracle_limit if args.oracle_check else None
    samples = _samples(gt_dir, _TABLE_EXTENSIONS)
    if not samples:
        raise ConfigError(f"no ground-truth files in {gt_dir}")
    tasks = [(mode, stem, str(path),
              str(p) if (p := _pred_path(pred_dir, stem, args.format)) else None,
              args.format, criteria, oracle)
             for stem, path in samples]
    outputs = _run_pool(_eval_sample, tasks, jobs)

    per_gt = {c: [] for c in criteria}
    extra = {c: [] for c in criteria}
    exact = {c: [] for c in criteria}
    records = []
    for o in outputs:
        records.append(o["record"])
        for c in criteria:
            per_gt[c] += o["per_gt"][c]
            extra[c] += o["extra"][c]
            exact[c] += o["exact"][c]
        for w in o["record"]["warnings"]:
            _warn(o["record"]["sample"], w["code"], w["message"])
    n_failed = sum(r["status"] != "ok" for r in records)
    block = corpus_block(per_gt, extra, exact)
    report = {
        "command": args.command,
        "level": level,
        "config": {"format": args.format, "criteria": [c.value for c in criteria],
                   "oracle_check": bool(args.oracle_check),
                   "oracle_limit": args.oracle_limit},
        "n_samples": len(records),
        "n_tables": len(per_gt[criteria[0]]),
        "n_failed": n_failed,
        "corpus": block,
        "samples": records,
    }
    if oracle is not None:
        gaps = [t[f"oracle_gap_{c.value}"] for r in records for t in r.get("tables", [])
                for c in criteria if t.get(f"oracle_gap_{c.value}") is not None]
        report["oracle"] = {"checked": len(gaps), "min_gap": min(gaps) if gaps else None,
                            "max_gap": max(gaps) if gaps else None}
    text = _text_table(args.name or pred_dir.name, block, criteria) if args.text else None
    _emit(report, args.out, text)
    return 1 if n_failed else 0


# ---------------------------------------------------------------------------
# graphs
# ---------------------------------------------------------------------------

def cmd_eval_graph(args: argparse.Namespace) -> int:
    gt_dir = _need_dir(args.gt, "--gt")
    pred_dir = _need_dir(args.pred, "--pred")
    thr = _iou(args.iou)
    pairs, records = [], []
    n_failed = 0
    for stem, gt_path in _samples(gt_dir, (".json",)):
        rec: dict = {"sample": stem, "status": "ok"}
        try:
            gt = load_graph_json(gt_path.read_bytes())
        except TableEvalError as exc:
            _warn(stem, type(exc).__name__, f"ground truth: {exc}")
            rec.update(status="failed", error=str(exc))
            records.append(rec)
            n_failed += 1
            continue
        pred_path = pred_dir / (stem + ".json")
        try:
            pred = load_graph_json(pred_path.read_bytes())
        except (TableEvalError, OSError) as exc:
            _warn(stem, type(exc).__name__, f"prediction: {exc}")
            rec.update(status="failed", error=str(exc))
            n_failed += 1
            pred = type(gt)(())
        s = edge_f1(gt, pred, thr, args.matching)
        rec.update(precision=s.precision, recall=s.recall, f1=s.f1,
                   n_tp=s.n_tp, n_pred=s.n_pred, n_gt=s.n_gt)
        records.append(rec)
        pairs.append((gt, pred))
    if not records:
        raise ConfigError(f"no graph files in {gt_dir}")
    n_tp = sum(r.get("n_tp", 0) for r in records)
    n_pred = sum(r.get("n_pred", 0) for r in records)
    n_gt = sum(r.get("n_gt", 0) for r in records)
    if n_pred == 0 and n_gt == 0:
        p = r_ = f = 1.0
    else:
        p = n_tp / n_pred if n_pred else 0.0
        r_ = n_tp / n_gt if n_gt else 0.0
        f = 2 * p * r_ / (p + r_) if p + r_ else 0.0
    report: dict = {
        "command": "eval-graph",
        "config": {"iou": thr, "matching": args.matching,
                   "ap_interpolation": "all-points envelope"},
        "n_samples": len(records), "n_failed": n_failed,
        "edges": {"precision": p, "recall": r_, "f1": f, "n_tp": n_tp, "n_pred": n_pred, "n_gt": n_gt},
    }
    try:
        ap = detection_ap_corpus([(g.nodes, pr.nodes) for g, pr in pairs], COCO_IOU_THRESHOLDS)
        report["detection"] = ap.to_dict()
    except MissingScores as exc:
        _warn(None, "MissingScores", str(exc))
        report["detection"] = None
    report["samples"] = records
    text = None
    if args.text:
        det = report["detection"] or {}
        text = _align([["Model", "Edge F1", "AP50", "AP75", "AP"],
                       [args.name or pred_dir.name, _fmt(f), _fmt(det.get("AP50")),
                        _fmt(det.get("AP75")), _fmt(det.get("AP"))]])
    _emit(report, args.out, text)
    return 1 if n_failed else 0


# ---------------------------------------------------------------------------
# dataset tools
# ---------------------------------------------------------------------------

def cmd_stats(args: argparse.Namespace) -> int:
    root = _need_dir(args.gt or args.root, "--gt")
    report = corpus_stats(root, strict=args.strict_classes, jobs=_jobs(args.jobs))
    out = {"command": "stats", **report.to_dict()}
    text = None
    if args.text:
        rows = [["Pages spanned", "Tables"]]
        rows += [[str(k), str(v)] for k, v in sorted(report.pages_spanned.items())]
        rows.append(["Total", str(report.multipage_total)])
        text = _align(rows)
    _emit(out, args.out, text)
    return 0


def cmd_verify_multipart(args: argparse.Namespace) -> int:
    if not 0.0 <= args.threshold <= 1.0:
        raise ConfigError("--threshold must lie in [0, 1]")
    if args.pairs:
        path = _need_file(args.pairs, "--pairs")
        verdicts = []
        for k, obj in enumerate(read_pairs_jsonl(path.read_text(encoding="utf-8"))):
            try:
                v = verify_multipart_match(obj["extracted"], obj["reference"], args.threshold)
            except (KeyError, TypeError):
                raise ConfigError(f"--pairs line {k + 1} needs 'extracted' and 'reference'") from None
            verdicts.append({"id": obj.get("id", k), **v.to_dict()})
        _emit({"command": "verify-multipart", "verdicts": verdicts}, args.out)
        return 0
    extracted = _need_file(args.extracted, "--extracted").read_text(encoding="utf-8")
    reference = _need_file(args.reference, "--reference").read_text(encoding="utf-8")
    v = verify_multipart_match(extracted, reference, args.threshold)
    _emit({"command": "verify-multipart", **v.to_dict()}, args.out)
    return 0


def _document_files(path: Path) -> list[Path]:
    if path.is_file():
        return [path]
    if path.is_dir():
        return sorted(path.rglob("documents.json"))
    raise ConfigError(f"--gt {path} does not exist")


def cmd_sample_pairs(args: argparse.Namespace) -> int:
    if not args.gt:
        raise ConfigError("--gt is required")
    docs = []
    for f in _document_files(Path(args.gt)):
        docs += read_documents_json(f.read_bytes(), strict=args.strict_classes)
    pairs = sample_continuation_pairs(docs, require_negative=args.require_negative)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            write_pairs_jsonl(pairs, fh)
    else:
        write_pairs_jsonl(pairs, sys.stdout)
    n_pos = sum(p.is_positive for p in pairs)
    sys.stderr.write(json.dumps({"positive": n_pos, "negative": len(pairs) - n_pos}) + "\n")
    return 0


def cmd_score_pairs(args: argparse.Namespace) -> int:
    gold_path = _need_file(args.gt, "--gt")
    pred_path = _need_file(args.pred, "--pred")

    def keyed(path: Path) -> dict:
        out = {}
        for obj in read_pairs_jsonl(path.read_text(encoding="utf-8")):
            try:
                out[(str(obj["doc_id"]), int(obj["first_page"]))] = obj["label"]
            except (KeyError, TypeError, ValueError):
                raise ConfigError(f"{path}: each line needs doc_id, first_page and label") from None
        return out

    gold = keyed(gold_path)
    pred = keyed(pred_path)
    missing = sorted(k for k in gold if k not in pred)
    for doc_id, page in missing:
        _warn(f"{doc_id}:{page}", "MissingPrediction", "scored as negative")
    keys = sorted(gold)
    try:
        recall, precision, f1 = binary_prf([gold[k] for k in keys],
                                           [pred.get(k, "negative") for k in keys])
    except EmptyCorpus as exc:
        raise ConfigError(str(exc)) from None
    except ValueError as exc:
        raise ConfigError(f"bad label: {exc}") from None
    report = {"command": "score-pairs", "n_pairs": len(keys), "n_missing": len(missing),
              "recall": recall, "precision": precision, "f1": f1}
    text = None
    if args.text:
        text = _align([["Model", "Recall", "Precision", "F1"],
                       [args.name or pred_path.stem, _fmt(recall), _fmt(precision), _fmt(f1)]])
    _emit(report, args.out, text)
    return 1 if missing else 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tablegrid-eval", description="Table extraction evaluation toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, pred=True):
        p.add_argument("--gt", help="ground-truth directory or file")
        if pred:
            p.add_argument("--pred", help="prediction directory or file")
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        p.add_argument("--text", action="store_true", help="also print an aligned text table")
        p.add_argument("--name", help="row label for the text table")
        p.add_argument("--jobs", type=int, default=None,
                       help=f"worker processes (default ${JOBS_ENV} or 1)")
        p.add_argument("--strict-classes", action="store_true",
                       help="fail on unknown object class names")

    for name, help_ in (("eval-tsr", "one table per sample"),
                        ("eval-page", "table sets per page"),
                        ("eval-doc", "table sets per document")):
        p = sub.add_parser(name, help=help_)
        common(p)
        p.add_argument("--format", default="html", help="prediction format: " + ", ".join(FORMATS))
        p.add_argument("--criterion", default="top,con")
        p.add_argument("--oracle-check", action="store_true",
                       help="report the exhaustive-alignment gap for small grids")
        p.add_argument("--oracle-limit", type=int, default=DEFAULT_ORACLE_LIMIT)

    p = sub.add_parser("eval-graph", help="edge F1 and detection AP")
    common(p)
    p.add_argument("--iou", type=float, default=0.8)
    p.add_argument("--matching", choices=("greedy", "hungarian"), default="greedy")

    p = sub.add_parser("stats", help="corpus statistics")
    common(p, pred=False)
    p.add_argument("root", nargs="?")

    p = sub.add_parser("verify-multipart", help="edit-distance check of multi-part tables")
    p.add_argument("--extracted")
    p.add_argument("--reference")
    p.add_argument("--pairs", help="JSON lines with extracted/reference fields")
    p.add_argument("--threshold", type=float, default=MATCH_THRESHOLD)
    p.add_argument("--out")

    p = sub.add_parser("sample-pairs", help="cross-page continuation pairs as JSON lines")
    common(p, pred=False)
    p.add_argument("--require-negative", action="store_true",
                   help="keep only documents that also supply a negative pair")

    p = sub.add_parser("score-pairs", help="binary P/R/F1 of continuation predictions")
    common(p)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command in ("eval-tsr", "eval-page", "eval-doc"):
            mode = "tsr" if args.command == "eval-tsr" else "set"
            level = {"eval-tsr": "table", "eval-page": "page", "eval-doc": "document"}[args.command]
            return cmd_eval_tables(args, mode, level)
        handlers = {"eval-graph": cmd_eval_graph, "stats": cmd_stats,
                    "verify-multipart": cmd_verify_multipart,
                    "sample-pairs": cmd_sample_pairs, "score-pairs": cmd_score_pairs}
        return handlers[args.command](args)
    except ConfigError as exc:
        sys.stderr.write(f"tablegrid-eval: error: {exc}\n")
        return 2
    except TableEvalError as exc:
        sys.stderr.write(f"tablegrid-eval: {type(exc).__name__}: {exc}\n")
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
