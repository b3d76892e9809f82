"""Dataset-construction helpers: multi-part table verification and page-pair sampling.

A multi-part table is accepted when the text extracted from a contiguous
run of detected parts is within a small normalized edit distance of the
reference table text.  Page pairs for the cross-page continuation task
are contiguous pages where the first ends in a table and the second
begins with one; the pair is positive when one table spans both.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Optional, Sequence, Union

from .dataset import DocumentRecord
from .errors import SchemaViolation
from .graph import BBox
from .grid import normalize_text
from .taxonomy import base_class

MATCH_THRESHOLD = 0.02


def levenshtein(a: str, b: str) -> int:
    """Edit distance with unit-cost insertions, deletions and substitutions."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def normalized_edit_distance(a: str, b: str) -> float:
    longest = max(len(a), len(b))
    return levenshtein(a, b) / longest if longest else 0.0


@dataclass(frozen=True)
class MatchVerdict:
    normalized_distance: float
    matched: bool
    threshold: float = MATCH_THRESHOLD

    def to_dict(self) -> dict:
        return {"normalized_distance": self.normalized_distance,
                "matched": self.matched, "threshold": self.threshold,
                "text_normalization": "whitespace"}


def verify_multipart_match(extracted_text: str, reference_text: str,
                           threshold: float = MATCH_THRESHOLD,
                           normalize: bool = True) -> MatchVerdict:
    """Compare texts by edit distance divided by the longer length.

    Whitespace runs are collapsed before comparison unless ``normalize``
    is false.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {threshold}")
    if normalize:
        extracted_text = normalize_text(extracted_text)
        reference_text = normalize_text(reference_text)
    d = normalized_edit_distance(extracted_text, reference_text)
    return MatchVerdict(d, d <= threshold, threshold)


@dataclass(frozen=True)
class PartCombination:
    start: int
    stop: int               # exclusive
    page_indices: tuple[int, ...]
    text: str


def enumerate_part_combinations(parts: Sequence[tuple[int, str]]) -> list[PartCombination]:
    """Every contiguous run of parts, longest first, then by start index."""
    n = len(parts)
    out = []
    for length in range(n, 0, -1):
        for start in range(n - length + 1):
            run = parts[start:start + length]
            out.append(PartCombination(start, start + length,
                                       tuple(p for p, _ in run),
                                       " ".join(t for _, t in run)))
    return out


def match_parts(parts: Sequence[tuple[int, str]], reference_text: str,
                threshold: float = MATCH_THRESHOLD) -> Optional[tuple[PartCombination, MatchVerdict]]:
    """First combination (in enumeration order) that matches the reference."""
    for combo in enumerate_part_combinations(parts):
        verdict = verify_multipart_match(combo.text, reference_text, threshold)
        if verdict.matched:
            return combo, verdict
    return None


# ---------------------------------------------------------------------------
# page pairs
# ---------------------------------------------------------------------------

POSITIVE = "positive"
NEGATIVE = "negative"


@dataclass(frozen=True, order=True)
class PagePair:
    doc_id: str
    first_page_index: int
    label: str

    def __post_init__(self):
        if self.label not in (POSITIVE, NEGATIVE):
            raise ValueError(f"label must be {POSITIVE!r} or {NEGATIVE!r}")
        if self.first_page_index < 0:
            raise ValueError("negative page index")

    @property
    def second_page_index(self) -> int:
        return self.first_page_index + 1

    @property
    def is_positive(self) -> bool:
        return self.label == POSITIVE

    def to_obj(self) -> dict:
        return {"doc_id": self.doc_id, "first_page": self.first_page_index, "label": self.label}


# boundary elements: where a page starts or ends.  Captions open a table and
# footers close one, so they count as part of it at the respective edge.
_OPENS = {"table", "table caption"}
_CLOSES = {"table", "table footer"}
_BOUNDARY = {"table", "table caption", "table footer"}


def _page_elements(doc: DocumentRecord, page: int) -> list[tuple[str, BBox]]:
    elems = []
    if page < len(doc.pages):
        elems += [(base_class(o.class_label), o.bbox) for o in doc.pages[page].objects
                  if base_class(o.class_label) in _BOUNDARY]
    elems += [("table", b) for t in doc.tables for p, b in t.parts if p == page]
    return elems


def page_ends_in_table(doc: DocumentRecord, page: int) -> bool:
    elems = _page_elements(doc, page)
    if not elems:
        return False
    lowest = max(b.y_max for _, b in elems)
    return any(c in _CLOSES for c, b in elems if b.y_max == lowest)


def page_begins_in_table(doc: DocumentRecord, page: int) -> bool:
    elems = _page_elements(doc, page)
    if not elems:
        return False
    highest = min(b.y_min for _, b in elems)
    return any(c in _OPENS for c, b in elems if b.y_min == highest)


def _spanned_pairs(doc: DocumentRecord) -> set[int]:
    firsts = set()
    for t in doc.tables:
        pages = set(t.pages())
        firsts.update(p for p in pages if p + 1 in pages)
    return firsts


def document_pairs(doc: DocumentRecord, require_negative: bool = False) -> list[PagePair]:
    positives = _spanned_pairs(doc)
    if not positives:
        return []
    negatives = [p for p in range(doc.n_pages - 1)
                 if p not in positives
                 and page_ends_in_table(doc, p) and page_begins_in_table(doc, p + 1)]
    if require_negative and not negatives:
        return []
    pairs = [PagePair(doc.doc_id, p, POSITIVE) for p in positives]
    pairs += [PagePair(doc.doc_id, p, NEGATIVE) for p in negatives]
    return sorted(pairs, key=lambda pp: pp.first_page_index)


def sample_continuation_pairs(docs: Iterable[DocumentRecord],
                              require_negative: bool = False) -> list[PagePair]:
    """Contiguous page pairs of every document, ordered by (doc_id, page).

    Only documents with at least one positive pair contribute.  With
    ``require_negative`` a document must also supply a negative pair.
    """
    pairs = []
    seen = set()
    for doc in sorted(docs, key=lambda d: d.doc_id):
        if doc.doc_id in seen:
            raise SchemaViolation(f"duplicate document id {doc.doc_id!r}")
        seen.add(doc.doc_id)
        pairs.extend(document_pairs(doc, require_negative))
    return pairs


def write_pairs_jsonl(pairs: Iterable[PagePair], fh: IO[str]) -> None:
    for pp in pairs:
        fh.write(json.dumps(pp.to_obj(), ensure_ascii=False, separators=(",", ":")) + "\n")


def read_pairs_jsonl(lines: Union[str, Iterable[str]]) -> Iterator[dict]:
    """Yield decoded objects from JSON lines, skipping blank lines."""
    if isinstance(lines, str):
        lines = lines.splitlines()
    for k, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            yield json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaViolation(f"line {k}: {exc}") from None
