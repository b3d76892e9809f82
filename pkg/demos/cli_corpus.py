# Build a tiny page-level corpus on disk and score it through the CLI entry point.
import json
import tempfile
from pathlib import Path

from tablegrid_eval.cli import run
from tablegrid_eval.grid import grid_from_texts
from tablegrid_eval.parsers import render_html, save_grid_list_json

t1 = grid_from_texts([["a", "b"], ["c", "d"]])
t2 = grid_from_texts([["x", "y", "z"], ["1", "2", "3"], ["4", "5", "6"]])

root = Path(tempfile.mkdtemp())
(root / "gt").mkdir()
(root / "pred").mkdir()
(root / "gt" / "page1.json").write_bytes(save_grid_list_json([t1, t2]))
(root / "pred" / "page1.html").write_text(render_html(t1))          # second table missed
(root / "gt" / "page2.json").write_bytes(save_grid_list_json([t2]))
(root / "pred" / "page2.html").write_text(render_html(t2) + render_html(t1))  # one extra

out = root / "report.json"
code = run(["eval-page", "--gt", str(root / "gt"), "--pred", str(root / "pred"),
            "--out", str(out), "--text", "--name", "demo-model"])
print("exit", code)
print(json.dumps(json.loads(out.read_text())["corpus"], indent=1))
