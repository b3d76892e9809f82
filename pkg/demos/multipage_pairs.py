# Multi-page tables: checking part matches and building page pairs.
from tablegrid_eval.datagen import (enumerate_part_combinations, match_parts,
                                    sample_continuation_pairs, verify_multipart_match)
from tablegrid_eval.dataset import DocumentRecord, MultiPartTable
from tablegrid_eval.graph import BBox

reference = "Patient Age Dose 1 54 10mg 2 61 20mg 3 47 10mg 4 58 20mg 5 66 10mg"
parts = [(4, "Patient Age Dose 1 54 10mg 2 61 20mg"),
         (5, "3 47 10mg 4 58 20mg 5 66 1Omg")]   # OCR slip: "1Omg"

for c in enumerate_part_combinations(parts):
    v = verify_multipart_match(c.text, reference)
    print(c.page_indices, round(v.normalized_distance, 4), v.matched)

best = match_parts(parts, reference)
print("accepted", best[0].page_indices)

# a single slip in a short string is too much
print(verify_multipart_match("Total 12.5", "Total 12.6"))


def part(page, y0, y1):
    return page, BBox(50, y0, 950, y1)


doc = DocumentRecord("PMC0001", [], [
    MultiPartTable("t1", [part(1, 700, 1250), part(2, 0, 1250), part(3, 0, 300)]),  # 3 pages
    MultiPartTable("t2", [part(5, 900, 1250)]),     # page 5 ends in a table ...
    MultiPartTable("t3", [part(6, 0, 400)]),        # ... and page 6 starts with a new one
], n_pages=8)

for p in sample_continuation_pairs([doc]):
    print(p.doc_id, p.first_page_index, p.second_page_index, p.label)
