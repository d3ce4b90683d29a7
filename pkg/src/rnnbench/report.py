"""Render the benchmark comparison tables from a results grid.

Three table families: per-body accuracy tables (rows = the five model
variants, columns = datasets, one decimal), per-body improvement tables
(MeanPool baseline vs best run, relative percent to two decimals), and
the body-vs-body winner table (B/L per cell, "=" on exact ties).

Rendering is a pure function of the grid: it never trains, and the same
grid always produces identical bytes.  CSV and Markdown carry the same
numbers.
"""

import json
from pathlib import Path

from .data import DATASET_ORDER
from .errors import InvalidConfigError, RnnBenchError
from .heads import HEADS, HEAD_DISPLAY
from .runner import cell_key

BODY_DISPLAY = {"lstm": "LSTM", "blstm": "BLSTM"}


class ResultsGrid:
    """Accuracy per (body, head, dataset) cell plus per-cell metadata."""

    def __init__(self, cells: dict):
        # cells: (body, head, dataset) -> {"accuracy": float, ...}
        self.cells = cells

    @classmethod
    def from_accuracies(cls, mapping: dict) -> "ResultsGrid":
        """Build a grid from bare accuracies, e.g. published table values."""
        return cls({key: {"accuracy": acc} for key, acc in mapping.items()})

    @classmethod
    def from_dir(cls, grid_dir) -> "ResultsGrid":
        grid_dir = Path(grid_dir)
        cells = {}
        for path in sorted(grid_dir.glob("*/result.json")):
            with open(path, "r", encoding="utf-8") as f:
                record = json.load(f)
            if record.get("status") != "done":
                continue
            key = (record["body"], record["head"], record["dataset"])
            record["metadata_path"] = str(path.parent / "metadata.json")
            cells[key] = record
        if not cells:
            raise RnnBenchError(f"no completed cells under {grid_dir}")
        return cls(cells)

    def accuracy(self, body, head, dataset) -> float:
        cell = self.cells.get((body, head, dataset))
        if cell is None:
            raise RnnBenchError(f"missing cell {cell_key(body, head, dataset)}")
        return cell["accuracy"]

    def datasets(self) -> list[str]:
        present = {d for (_, _, d) in self.cells}
        ordered = [d for d in DATASET_ORDER if d in present]
        return ordered + sorted(present - set(DATASET_ORDER))

    def bodies(self) -> list[str]:
        present = {b for (b, _, _) in self.cells}
        return [b for b in ("lstm", "blstm") if b in present]

    def missing(self, bodies, heads, datasets) -> list[str]:
        return sorted(cell_key(b, h, d)
                      for b in bodies for h in heads for d in datasets
                      if (b, h, d) not in self.cells)


def format_pct(accuracy: float) -> str:
    """0.9176 -> '91.8%' (accuracies held as fractions)."""
    return f"{100.0 * accuracy:.1f}%"


def format_improvement(baseline: float, best: float) -> str:
    """Relative improvement (best-baseline)/baseline, '+x.xx%'."""
    rel = 100.0 * (best - baseline) / baseline
    return f"+{rel:.2f}%"


def _require_complete(grid, bodies, heads, datasets):
    missing = grid.missing(bodies, heads, datasets)
    if missing:
        raise RnnBenchError("grid incomplete; missing cells: " + ", ".join(missing))


def render_results_tables(grid: ResultsGrid, bodies=None, datasets=None) -> dict:
    """Per-body accuracy tables: {body: {"header": [...], "rows": [[...]]}}."""
    bodies = bodies or grid.bodies()
    datasets = datasets or grid.datasets()
    _require_complete(grid, bodies, HEADS, datasets)
    tables = {}
    for body in bodies:
        rows = []
        for head in HEADS:
            label = f"{BODY_DISPLAY[body]}_{HEAD_DISPLAY[head]}"
            rows.append([label] + [format_pct(grid.accuracy(body, head, d))
                                   for d in datasets])
        tables[body] = {"header": ["Model"] + list(datasets), "rows": rows}
    return tables


def render_improvement_table(grid: ResultsGrid, body: str, datasets=None) -> dict:
    """MeanPool baseline vs best of the five variants, relative percent."""
    datasets = datasets or grid.datasets()
    _require_complete(grid, [body], HEADS, datasets)
    base_label = f"{BODY_DISPLAY[body]}_MeanPool"
    baseline_row = [base_label]
    best_row = ["Best Run"]
    imp_row = ["Performance Improvement"]
    for d in datasets:
        baseline = grid.accuracy(body, "mean_pool", d)
        best = max(grid.accuracy(body, h, d) for h in HEADS)
        baseline_row.append(format_pct(baseline))
        best_row.append(format_pct(best))
        imp_row.append(format_improvement(baseline, best))
    return {"header": ["Model"] + list(datasets),
            "rows": [baseline_row, best_row, imp_row]}


def render_winner_table(grid: ResultsGrid, datasets=None) -> dict:
    """BLSTM-vs-LSTM winners: B, L, or '=' on an exact tie."""
    datasets = datasets or grid.datasets()
    _require_complete(grid, ("lstm", "blstm"), HEADS, datasets)
    rows = []
    for head in HEADS:
        row = [HEAD_DISPLAY[head]]
        for d in datasets:
            l = grid.accuracy("lstm", head, d)
            b = grid.accuracy("blstm", head, d)
            row.append("B" if b > l else "L" if l > b else "=")
        rows.append(row)
    return {"header": ["Model"] + list(datasets), "rows": rows}


def table_markdown(table: dict) -> str:
    header = table["header"]
    lines = ["| " + " | ".join(header) + " |",
             "|" + "|".join(["---"] * len(header)) + "|"]
    for row in table["rows"]:
        lines.append("| " + " | ".join(str(c) for c in row) + " |")
    return "\n".join(lines) + "\n"


def table_csv(table: dict) -> str:
    import csv
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table["header"])
    writer.writerows(table["rows"])
    return buf.getvalue()


TABLE_KINDS = ("results", "improvement", "winners")


def build_report(grid: ResultsGrid, tables=TABLE_KINDS, datasets=None) -> dict:
    """Assemble every requested table; returns {name: table dict}."""
    out = {}
    for kind in tables:
        if kind == "results":
            for body, table in render_results_tables(grid, datasets=datasets).items():
                out[f"results_{body}"] = table
        elif kind == "improvement":
            for body in grid.bodies():
                out[f"improvement_{body}"] = render_improvement_table(
                    grid, body, datasets=datasets)
        elif kind == "winners":
            out["winners"] = render_winner_table(grid, datasets=datasets)
        else:
            raise InvalidConfigError(
                f"unknown table kind {kind!r}; expected {', '.join(TABLE_KINDS)}")
    return out


def write_report(grid: ResultsGrid, out_dir, tables=TABLE_KINDS,
                 fmt="md", figures=True, datasets=None) -> list[str]:
    """Write tables (md or csv) and matplotlib figures; returns the paths."""
    if fmt not in ("md", "csv"):
        raise InvalidConfigError(f"unknown format {fmt!r}; expected md or csv")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rendered = build_report(grid, tables, datasets=datasets)
    render = table_markdown if fmt == "md" else table_csv
    written = []
    for name, table in rendered.items():
        path = out_dir / f"{name}.{fmt}"
        with open(path, "w", encoding="utf-8") as f:
            f.write(render(table))
        written.append(str(path))
    if figures:
        from . import figures as figmod

        written.extend(figmod.render_figures(rendered, out_dir))
    return written
