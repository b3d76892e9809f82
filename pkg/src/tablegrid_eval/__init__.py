"""Evaluation toolkit for table extraction: grid similarity, set matching,
page-graph metrics, dataset readers and construction helpers."""
from .aggregation import (AggregateMode, AggregateScore, TableSetMatch, aggregate_mean,
                          aggregate_pseudo_f1, binary_prf, exact_match_accuracy,
                          match_table_sets, max_weight_assignment)
from .datagen import (MatchVerdict, PagePair, enumerate_part_combinations,
                      sample_continuation_pairs, verify_multipart_match)
from .dataset import (DocumentRecord, MultiPartTable, PageAnnotation, StatsReport,
                      corpus_stats, read_sidecar_json, read_voc_annotation)
from .errors import *  # noqa: F401,F403
from .graph import BBox, PageGraph, PageObject, detection_ap, edge_f1, iou
from .grid import CellSpan, Criterion, GridCell, TableGrid, build_grid, grid_exact_match, grid_from_texts
from .grits import (Alignment2D, GritsResult, align_2d_exact, align_2d_factored, grits,
                    grits_exact)
from .parsers import (load_grid_json, parse_html_tables, parse_span_markdown, parse_tables,
                      render_html, render_span_markdown, save_grid_json)

__version__ = "0.1.0"
