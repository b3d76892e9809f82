import json

import pytest

from corpusgen import voc_xml, write_cropped, write_full_documents
from tablegrid_eval.dataset import (DocumentRecord, IoFailure, MultiPartTable, StatsReport,
                                    corpus_stats, document_from_obj, document_to_obj,
                                    read_documents_json, read_sidecar_json, read_voc_annotation,
                                    sidecar_to_bytes, write_voc_annotation)
from tablegrid_eval.errors import SchemaViolation, UnknownClassName, XmlMalformed
from tablegrid_eval.graph import BBox, PageObject
from tablegrid_eval.grid import grid_from_texts
from tablegrid_eval.parsers import grid_to_obj
from tablegrid_eval.taxonomy import CLASS_NAMES, base_class, canonical_class, is_rotated


def test_taxonomy():
    assert len(CLASS_NAMES) == 16
    assert canonical_class("Table_Row") == "table row"
    assert canonical_class("widget") is None
    assert is_rotated("table caption rotated")
    assert base_class("table footer rotated") == "table footer"


def test_voc_minimal():
    ann = read_voc_annotation(voc_xml("p.jpg", [("table", (1, 2, 30, 40))]))
    assert ann.image_id == "p.jpg"
    assert ann.page_size == (1000.0, 1300.0)
    assert len(ann.objects) == 1
    assert ann.objects[0].class_label == "table"
    assert ann.objects[0].bbox == BBox(1, 2, 30, 40)


def test_voc_unknown_class():
    xml = voc_xml("p.jpg", [("widget", (0, 0, 1, 1)), ("table", (0, 0, 1, 1))])
    with pytest.raises(UnknownClassName):
        read_voc_annotation(xml)
    ann = read_voc_annotation(xml, strict=False)
    assert [o.class_label for o in ann.objects] == ["table"]
    assert ann.unknown_classes == ["widget"]


def test_voc_rotated_and_malformed():
    ann = read_voc_annotation(voc_xml("p", [("table rotated", (0, 0, 5, 5))]))
    assert is_rotated(ann.objects[0].class_label)
    with pytest.raises(XmlMalformed):
        read_voc_annotation("<annotation><object>")
    with pytest.raises(XmlMalformed):
        read_voc_annotation("<annotation><object><name>table</name></object></annotation>")


def test_voc_write_read():
    ann = read_voc_annotation(voc_xml("p.jpg", [("table", (1, 2, 30, 40)),
                                                ("table column header", (1, 2, 30, 8))]))
    again = read_voc_annotation(write_voc_annotation(ann))
    assert again.objects == ann.objects and again.image_id == ann.image_id


def test_sidecar_words_only():
    sc = read_sidecar_json(json.dumps({"words": [{"text": "a", "bbox": [0, 0, 1, 1]}]}))
    assert [w.text for w in sc.words] == ["a"]
    assert sc.relations == [] and sc.tables == [] and sc.grids == []


def test_sidecar_relations_checked():
    objects = [PageObject("table", BBox(0, 0, 10, 10)), PageObject("table row", BBox(0, 0, 10, 2))]
    sc = read_sidecar_json('{"relations": [[0, 1]]}', objects)
    assert sc.relations == [(0, 1)]
    with pytest.raises(SchemaViolation):
        read_sidecar_json('{"relations": [[0, 2]]}', objects)
    with pytest.raises(SchemaViolation):
        read_sidecar_json('{"relations": [[1, 0]]}', objects)
    with pytest.raises(SchemaViolation):
        read_sidecar_json('{"relations": [[0]]}')
    with pytest.raises(SchemaViolation):
        read_sidecar_json("[1, 2]")


def test_sidecar_multipage_table():
    grid = grid_from_texts([["a", "b"]])
    obj = {"tables": [{"table_id": "t", "parts": [{"page": p, "bbox": [0, 0, 10, 10]} for p in (3, 4, 5)],
                       "grid": grid_to_obj(grid), "html": "<table></table>"}]}
    (t,) = read_sidecar_json(json.dumps(obj)).tables
    assert len(t.parts) == 3 and t.pages_spanned() == 3
    assert t.grid == grid
    with pytest.raises(SchemaViolation):
        read_sidecar_json('{"tables": [{"parts": []}]}')


def test_sidecar_canonical_is_byte_stable():
    grid = grid_from_texts([["a", "é"]])
    obj = {"image_id": "x", "words": [{"bbox": [0, 0, 1.5, 2], "text": "é"}],
           "grids": [grid_to_obj(grid)], "relations": [],
           "tables": [{"parts": [{"bbox": [0, 0, 1, 1], "page": 0}], "table_id": "t"}]}
    raw = json.dumps(obj, indent=3).encode()
    once = sidecar_to_bytes(read_sidecar_json(raw))
    assert sidecar_to_bytes(read_sidecar_json(once)) == once


def test_document_record_checks():
    t = MultiPartTable("t", [(0, BBox(0, 0, 1, 1)), (2, BBox(0, 0, 1, 1))])
    with pytest.raises(SchemaViolation):
        DocumentRecord("d", [], [t], 2)
    doc = DocumentRecord("d", [], [t], 3)
    assert document_from_obj(document_to_obj(doc)).tables[0].parts == t.parts
    with pytest.raises(SchemaViolation):
        MultiPartTable("t", [])


def test_documents_json_round_trip(tmp_path):
    t = MultiPartTable("t", [(0, BBox(0, 0, 1, 1)), (1, BBox(0, 0, 1, 1))])
    d = write_full_documents(tmp_path, [DocumentRecord("a", [], [t], 2)])
    (doc,) = read_documents_json((d / "documents.json").read_bytes())
    assert doc.doc_id == "a" and doc.n_pages == 2 and doc.tables[0].pages_spanned() == 2


def two_page_docs():
    tables = [MultiPartTable(f"t{k}", [(k, BBox(0, 0, 1, 1)), (k + 1, BBox(0, 0, 1, 1))])
              for k in range(2)]
    return [DocumentRecord("d", [], tables, 3)]


def test_stats_multipage(tmp_path):
    write_full_documents(tmp_path, two_page_docs())
    st = corpus_stats(tmp_path)
    assert dict(st.pages_spanned) == {2: 2}
    assert st.multipage_total == 2
    assert st.samples_per_collection["full_documents"] == 1


def test_stats_long_wide(tmp_path):
    write_cropped(tmp_path, [(31, 2), (3, 12)])
    st = corpus_stats(tmp_path)
    assert (st.long_tables, st.wide_tables, st.long_and_wide) == (1, 1, 0)
    assert st.objects_per_class["table"] == 2
    assert st.samples_per_collection["cropped_tables"] == 2


def test_stats_additive(tmp_path):
    a, b, both = tmp_path / "a", tmp_path / "b", tmp_path / "both"
    for root in (a, both):
        write_cropped(root, [(31, 12), (2, 2)])
    for root in (b, both):
        write_full_documents(root, two_page_docs())
        write_cropped(root, [(40, 3)], split="val")
    total = corpus_stats(a) + corpus_stats(b)
    assert total == corpus_stats(both)
    assert corpus_stats(both, jobs=4) == corpus_stats(both)
    assert (StatsReport() + total) == total


def test_stats_lenient_and_strict(tmp_path):
    d = tmp_path / "c" / "train"
    d.mkdir(parents=True)
    (d / "x.xml").write_text(voc_xml("x", [("widget", (0, 0, 1, 1))]))
    assert corpus_stats(tmp_path).unknown_classes["widget"] == 1
    with pytest.raises(UnknownClassName):
        corpus_stats(tmp_path, strict=True)
    with pytest.raises(IoFailure):
        corpus_stats(tmp_path / "missing")
