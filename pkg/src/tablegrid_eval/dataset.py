"""Readers for the dataset's on-disk annotation formats, and corpus statistics.

Layout of a corpus root::

    <root>/<collection>/<split>/<sample>.xml          PASCAL VOC objects
    <root>/<collection>/<split>/<sample>_words.json   sidecar: words, grids, tables
    <root>/<collection>/<split>/relations.json        {sample: [[parent, child], ...]}
    <root>/<collection>/<split>/documents.json        [document record, ...]

``<split>`` is one of ``train``, ``val``, ``test``; files placed directly
in a collection directory are read as well.

Sidecar JSON (all keys optional)::

    {"image_id": "...",
     "words": [{"text": "...", "bbox": [x0, y0, x1, y1]}, ...],
     "relations": [[parent_index, child_index], ...],
     "grids": [<grid JSON>, ...],
     "tables": [{"table_id": "...", "parts": [{"page": 0, "bbox": [...]}, ...],
                 "grid": <grid JSON>, "html": "..."}, ...]}

A document record is ``{"doc_id": ..., "pages": [<page>, ...], "tables": [...]}``
where a page is ``{"image_id", "page_size": [w, h], "objects": [{"class",
"bbox"}], "words": [...], "relations": [...]}``.
"""
from __future__ import annotations

import json
import logging
import xml.etree.ElementTree as ET
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence, Union

from .errors import SchemaViolation, TableEvalError, UnknownClassName, XmlMalformed
from .graph import BBox, PageObject, validate_relations
from .grid import TableGrid
from .parsers.gridjson import grid_from_obj, grid_to_obj
from .taxonomy import canonical_class

log = logging.getLogger(__name__)

SPLITS = ("train", "val", "test")


class IoFailure(TableEvalError, OSError):
    pass


@dataclass(frozen=True)
class Word:
    text: str
    bbox: BBox


@dataclass
class PageAnnotation:
    image_id: str
    page_size: tuple[float, float] = (0.0, 0.0)
    objects: list[PageObject] = field(default_factory=list)
    words: list[Word] = field(default_factory=list)
    relations: list[tuple[int, int]] = field(default_factory=list)
    unknown_classes: list[str] = field(default_factory=list)

    def validate(self) -> None:
        validate_relations(self.objects, self.relations)


@dataclass
class MultiPartTable:
    table_id: str
    parts: list[tuple[int, BBox]]
    grid: Optional[TableGrid] = None
    html: str = ""

    def __post_init__(self):
        if not self.parts:
            raise SchemaViolation(f"table {self.table_id!r} has no parts")

    def pages(self) -> list[int]:
        return sorted({p for p, _ in self.parts})

    def pages_spanned(self) -> int:
        return len(self.pages())


@dataclass
class DocumentRecord:
    doc_id: str
    pages: list[PageAnnotation] = field(default_factory=list)
    tables: list[MultiPartTable] = field(default_factory=list)
    n_pages: Optional[int] = None

    def __post_init__(self):
        if self.n_pages is None:
            self.n_pages = len(self.pages)
        for t in self.tables:
            for page, _ in t.parts:
                if not 0 <= page < self.n_pages:
                    raise SchemaViolation(
                        f"table {t.table_id!r} references page {page} of a "
                        f"{self.n_pages}-page document {self.doc_id!r}")


@dataclass
class Sidecar:
    image_id: Optional[str] = None
    words: list[Word] = field(default_factory=list)
    relations: list[tuple[int, int]] = field(default_factory=list)
    tables: list[MultiPartTable] = field(default_factory=list)
    grids: list[TableGrid] = field(default_factory=list)


# ---------------------------------------------------------------------------
# PASCAL VOC
# ---------------------------------------------------------------------------

def _xml_float(node: ET.Element, tag: str, default: Optional[float] = None) -> float:
    child = node.find(tag)
    if child is None or child.text is None:
        if default is not None:
            return default
        raise XmlMalformed(f"missing <{tag}>")
    try:
        return float(child.text.strip())
    except ValueError:
        raise XmlMalformed(f"<{tag}> is not a number: {child.text!r}") from None


def read_voc_annotation(data: Union[str, bytes], strict: bool = True) -> PageAnnotation:
    """Objects of one VOC XML file.

    Unknown class names raise :class:`UnknownClassName` in strict mode; in
    lenient mode they are skipped, logged and listed in ``unknown_classes``.
    """
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise XmlMalformed(f"malformed XML: {exc}") from None
    image_id = (root.findtext("filename") or "").strip()
    size = root.find("size")
    page_size = (0.0, 0.0)
    if size is not None:
        page_size = (_xml_float(size, "width", 0.0), _xml_float(size, "height", 0.0))
    ann = PageAnnotation(image_id, page_size)
    for k, obj in enumerate(root.iter("object")):
        raw = (obj.findtext("name") or "").strip()
        label = canonical_class(raw)
        if label is None:
            if strict:
                raise UnknownClassName(f"object {k}: unknown class {raw!r}")
            log.warning("skipping object %d with unknown class %r in %s", k, raw, image_id)
            ann.unknown_classes.append(raw)
            continue
        box = obj.find("bndbox")
        if box is None:
            raise XmlMalformed(f"object {k} has no <bndbox>")
        try:
            bbox = BBox(*(_xml_float(box, t) for t in ("xmin", "ymin", "xmax", "ymax")))
        except ValueError as exc:
            raise XmlMalformed(f"object {k}: {exc}") from None
        score = obj.findtext("score")
        ann.objects.append(PageObject(label, bbox, float(score) if score else None))
    return ann


def write_voc_annotation(ann: PageAnnotation) -> bytes:
    root = ET.Element("annotation")
    ET.SubElement(root, "filename").text = ann.image_id
    size = ET.SubElement(root, "size")
    ET.SubElement(size, "width").text = repr(float(ann.page_size[0]))
    ET.SubElement(size, "height").text = repr(float(ann.page_size[1]))
    ET.SubElement(size, "depth").text = "3"
    for o in ann.objects:
        node = ET.SubElement(root, "object")
        ET.SubElement(node, "name").text = o.class_label
        box = ET.SubElement(node, "bndbox")
        for tag, v in zip(("xmin", "ymin", "xmax", "ymax"), o.bbox.as_list()):
            ET.SubElement(box, tag).text = repr(float(v))
    return ET.tostring(root, encoding="utf-8")


# ---------------------------------------------------------------------------
# JSON sidecars and document records
# ---------------------------------------------------------------------------

def _loads(data: Union[str, bytes]) -> Any:
    try:
        return json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise SchemaViolation(f"invalid JSON: {exc}") from None


def _bbox(value: Any, where: str) -> BBox:
    if not isinstance(value, list) or len(value) != 4 or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        raise SchemaViolation(f"{where}: bbox must be 4 numbers")
    try:
        return BBox(*(float(v) for v in value))
    except ValueError as exc:
        raise SchemaViolation(f"{where}: {exc}") from None


def _words(value: Any) -> list[Word]:
    if not isinstance(value, list):
        raise SchemaViolation("'words' must be a list")
    out = []
    for k, w in enumerate(value):
        if not isinstance(w, dict) or not isinstance(w.get("text"), str):
            raise SchemaViolation(f"word {k} needs a string 'text'")
        out.append(Word(w["text"], _bbox(w.get("bbox"), f"word {k}")))
    return out


def _relations(value: Any, objects: Optional[Sequence[PageObject]]) -> list[tuple[int, int]]:
    if not isinstance(value, list):
        raise SchemaViolation("'relations' must be a list")
    rels = []
    for k, r in enumerate(value):
        if (not isinstance(r, list) or len(r) != 2
                or not all(isinstance(x, int) and not isinstance(x, bool) for x in r)):
            raise SchemaViolation(f"relation {k} must be [parent, child]")
        rels.append((r[0], r[1]))
    if objects is not None:
        validate_relations(objects, rels)
    elif any(p < 0 or c < 0 for p, c in rels):
        raise SchemaViolation("negative object index in relations")
    return rels


def _table(value: Any, k: int) -> MultiPartTable:
    if not isinstance(value, dict):
        raise SchemaViolation(f"table {k} must be an object")
    parts = value.get("parts")
    if not isinstance(parts, list) or not parts:
        raise SchemaViolation(f"table {k} needs a non-empty 'parts' list")
    parsed = []
    for p in parts:
        if not isinstance(p, dict) or not isinstance(p.get("page"), int) or p["page"] < 0:
            raise SchemaViolation(f"table {k}: each part needs a non-negative integer 'page'")
        parsed.append((p["page"], _bbox(p.get("bbox"), f"table {k} part")))
    grid = grid_from_obj(value["grid"]) if value.get("grid") is not None else None
    html = value.get("html", "")
    if not isinstance(html, str):
        raise SchemaViolation(f"table {k}: 'html' must be a string")
    return MultiPartTable(str(value.get("table_id", k)), parsed, grid, html)


def read_sidecar_json(data: Union[str, bytes],
                      objects: Optional[Sequence[PageObject]] = None) -> Sidecar:
    """Parse a sidecar file.  Pass ``objects`` to check relation indices against them."""
    obj = _loads(data)
    if not isinstance(obj, dict):
        raise SchemaViolation("sidecar must be a JSON object")
    grids = obj.get("grids", [])
    if not isinstance(grids, list):
        raise SchemaViolation("'grids' must be a list")
    tables = obj.get("tables", [])
    if not isinstance(tables, list):
        raise SchemaViolation("'tables' must be a list")
    return Sidecar(
        image_id=obj.get("image_id"),
        words=_words(obj.get("words", [])),
        relations=_relations(obj.get("relations", []), objects),
        tables=[_table(t, k) for k, t in enumerate(tables)],
        grids=[grid_from_obj(g) for g in grids],
    )


def _table_obj(t: MultiPartTable) -> dict:
    out = {"table_id": t.table_id,
           "parts": [{"page": p, "bbox": b.as_list()} for p, b in t.parts]}
    if t.grid is not None:
        out["grid"] = grid_to_obj(t.grid)
    if t.html:
        out["html"] = t.html
    return out


def _canonical(obj: Any) -> bytes:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":")).encode("utf-8")


def sidecar_to_bytes(sc: Sidecar) -> bytes:
    """Canonical serialization: sorted keys, compact separators, floats as ``repr``."""
    obj: dict = {
        "words": [{"text": w.text, "bbox": w.bbox.as_list()} for w in sc.words],
        "relations": [list(r) for r in sc.relations],
        "grids": [grid_to_obj(g) for g in sc.grids],
        "tables": [_table_obj(t) for t in sc.tables],
    }
    if sc.image_id is not None:
        obj["image_id"] = sc.image_id
    return _canonical(obj)


def page_from_obj(obj: Any, strict: bool = True) -> PageAnnotation:
    if not isinstance(obj, dict):
        raise SchemaViolation("page must be a JSON object")
    objects = []
    unknown = []
    for k, o in enumerate(obj.get("objects", [])):
        if not isinstance(o, dict) or not isinstance(o.get("class"), str):
            raise SchemaViolation(f"object {k} needs a string 'class'")
        if canonical_class(o["class"]) is None:
            if strict:
                raise UnknownClassName(f"object {k}: unknown class {o['class']!r}")
            unknown.append(o["class"])
            continue
        objects.append(PageObject(o["class"], _bbox(o.get("bbox"), f"object {k}"), o.get("score")))
    size = obj.get("page_size", [0, 0])
    return PageAnnotation(
        image_id=str(obj.get("image_id", "")),
        page_size=(float(size[0]), float(size[1])),
        objects=objects,
        words=_words(obj.get("words", [])),
        relations=_relations(obj.get("relations", []), objects),
        unknown_classes=unknown,
    )


def page_to_obj(page: PageAnnotation) -> dict:
    return {
        "image_id": page.image_id,
        "page_size": [float(page.page_size[0]), float(page.page_size[1])],
        "objects": [{"class": o.class_label, "bbox": o.bbox.as_list()} for o in page.objects],
        "words": [{"text": w.text, "bbox": w.bbox.as_list()} for w in page.words],
        "relations": [list(r) for r in page.relations],
    }


def document_from_obj(obj: Any, strict: bool = True) -> DocumentRecord:
    if not isinstance(obj, dict) or "doc_id" not in obj:
        raise SchemaViolation("document record needs a 'doc_id'")
    pages = [page_from_obj(p, strict) for p in obj.get("pages", [])]
    tables = [_table(t, k) for k, t in enumerate(obj.get("tables", []))]
    n_pages = obj.get("n_pages", len(pages) or None)
    if n_pages is None:
        n_pages = max((p for t in tables for p, _ in t.parts), default=-1) + 1
    return DocumentRecord(str(obj["doc_id"]), pages, tables, n_pages)


def document_to_obj(doc: DocumentRecord) -> dict:
    return {"doc_id": doc.doc_id, "n_pages": doc.n_pages,
            "pages": [page_to_obj(p) for p in doc.pages],
            "tables": [_table_obj(t) for t in doc.tables]}


def read_documents_json(data: Union[str, bytes], strict: bool = True) -> list[DocumentRecord]:
    obj = _loads(data)
    if isinstance(obj, dict) and "documents" in obj:
        obj = obj["documents"]
    if not isinstance(obj, list):
        raise SchemaViolation("documents file must hold a list of document records")
    return [document_from_obj(d, strict) for d in obj]


def documents_to_bytes(docs: Sequence[DocumentRecord]) -> bytes:
    return _canonical([document_to_obj(d) for d in docs])


# ---------------------------------------------------------------------------
# corpus statistics
# ---------------------------------------------------------------------------

@dataclass
class StatsReport:
    objects_per_class: Counter = field(default_factory=Counter)
    unknown_classes: Counter = field(default_factory=Counter)
    pages_spanned: Counter = field(default_factory=Counter)   # multi-page tables only
    multipart_single_page: int = 0
    single_part: int = 0
    long_tables: int = 0
    wide_tables: int = 0
    long_and_wide: int = 0
    grids: int = 0
    relations: int = 0
    samples_per_collection: Counter = field(default_factory=Counter)

    def __add__(self, other: "StatsReport") -> "StatsReport":
        return StatsReport(
            self.objects_per_class + other.objects_per_class,
            self.unknown_classes + other.unknown_classes,
            self.pages_spanned + other.pages_spanned,
            self.multipart_single_page + other.multipart_single_page,
            self.single_part + other.single_part,
            self.long_tables + other.long_tables,
            self.wide_tables + other.wide_tables,
            self.long_and_wide + other.long_and_wide,
            self.grids + other.grids,
            self.relations + other.relations,
            self.samples_per_collection + other.samples_per_collection,
        )

    @property
    def multipage_total(self) -> int:
        return sum(self.pages_spanned.values())

    def add_grid(self, grid: TableGrid) -> None:
        self.grids += 1
        self.long_tables += grid.is_long()
        self.wide_tables += grid.is_wide()
        self.long_and_wide += grid.is_long() and grid.is_wide()

    def add_table(self, table: MultiPartTable) -> None:
        n = table.pages_spanned()
        if n >= 2:
            self.pages_spanned[n] += 1
        elif len(table.parts) >= 2:
            self.multipart_single_page += 1
        else:
            self.single_part += 1
        if table.grid is not None:
            self.add_grid(table.grid)

    def to_dict(self) -> dict:
        return {
            "objects_per_class": dict(sorted(self.objects_per_class.items())),
            "unknown_classes": dict(sorted(self.unknown_classes.items())),
            "multipage_tables": {
                "by_pages_spanned": {str(k): v for k, v in sorted(self.pages_spanned.items())},
                "total": self.multipage_total,
            },
            "multipart_single_page_tables": self.multipart_single_page,
            "single_part_tables": self.single_part,
            "grids": self.grids,
            "long_tables": self.long_tables,
            "wide_tables": self.wide_tables,
            "long_and_wide_tables": self.long_and_wide,
            "relations": self.relations,
            "samples_per_collection": dict(sorted(self.samples_per_collection.items())),
        }


def _file_stats(path: Path, collection: str, strict: bool) -> StatsReport:
    st = StatsReport()
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from None
    name = path.name
    if name.endswith(".xml"):
        ann = read_voc_annotation(data, strict=strict)
        st.objects_per_class.update(o.class_label for o in ann.objects)
        st.unknown_classes.update(ann.unknown_classes)
        st.samples_per_collection[collection] += 1
    elif name == "documents.json":
        for doc in read_documents_json(data, strict=strict):
            st.samples_per_collection[collection] += 1
            for page in doc.pages:
                st.objects_per_class.update(o.class_label for o in page.objects)
                st.unknown_classes.update(page.unknown_classes)
            for t in doc.tables:
                st.add_table(t)
    elif name == "relations.json":
        obj = _loads(data)
        if not isinstance(obj, dict):
            raise SchemaViolation(f"{path}: relations file must map samples to edge lists")
        st.relations += sum(len(_relations(v, None)) for v in obj.values())
    elif name.endswith("_words.json"):
        sc = read_sidecar_json(data)
        for g in sc.grids:
            st.add_grid(g)
        for t in sc.tables:
            st.add_table(t)
    return st


def _corpus_files(root: Path) -> list[tuple[Path, str]]:
    if not root.is_dir():
        raise IoFailure(f"corpus root {root} is not a directory")
    files = []
    for coll in sorted(p for p in root.iterdir() if p.is_dir()):
        dirs = [coll] + [coll / s for s in SPLITS if (coll / s).is_dir()]
        for d in dirs:
            for f in sorted(d.iterdir()):
                if f.is_file() and (f.suffix == ".xml" or f.suffix == ".json"):
                    files.append((f, coll.name))
    return files


def corpus_stats(root: Union[str, Path], strict: bool = False, jobs: int = 1) -> StatsReport:
    """Statistics of a corpus root; per-file reports are summed in path order."""
    files = _corpus_files(Path(root))
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            parts = list(pool.map(lambda fc: _file_stats(fc[0], fc[1], strict), files))
    else:
        parts = [_file_stats(f, c, strict) for f, c in files]
    total = StatsReport()
    for p in parts:
        total = total + p
    return total
