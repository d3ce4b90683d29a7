import pytest

from rnnbench.errors import InvalidConfigError, RnnBenchError
from rnnbench.heads import HEADS
from rnnbench.report import (ResultsGrid, build_report, format_improvement,
                             format_pct, render_improvement_table,
                             render_results_tables, render_winner_table,
                             table_csv, table_markdown, write_report)

DATASETS = ("MR", "SST-1", "SST-2", "TREC", "Subj", "CR")

# Published accuracy tables (percent) used as reporting-fidelity input.
PUBLISHED_LSTM = {
    "tail":        (79.0, 46.3, 83.9, 91.2, 91.7, 80.1),
    "mean_pool":   (78.1, 44.4, 83.4, 88.2, 91.1, 79.0),
    "max_pool":    (79.6, 46.2, 84.5, 91.8, 91.6, 82.4),
    "hybrid_mean": (79.4, 45.8, 83.4, 89.6, 91.8, 81.0),
    "hybrid_max":  (79.9, 46.0, 83.7, 92.0, 91.7, 82.3),
}
PUBLISHED_BLSTM = {
    "tail":        (78.7, 45.0, 84.1, 92.0, 91.8, 80.4),
    "mean_pool":   (79.9, 45.8, 83.5, 90.2, 91.8, 81.2),
    "max_pool":    (80.4, 47.8, 83.7, 91.8, 92.1, 83.0),
    "hybrid_mean": (79.2, 44.5, 83.4, 91.0, 92.0, 80.2),
    "hybrid_max":  (79.7, 47.0, 83.4, 90.6, 92.2, 82.5),
}


def published_grid() -> ResultsGrid:
    cells = {}
    for body, table in (("lstm", PUBLISHED_LSTM), ("blstm", PUBLISHED_BLSTM)):
        for head, values in table.items():
            for dataset, pct in zip(DATASETS, values):
                cells[(body, head, dataset)] = pct / 100.0
    return ResultsGrid.from_accuracies(cells)


def test_format_pct_rounding():
    assert format_pct(0.9176) == "91.8%"
    assert format_pct(0.781) == "78.1%"
    assert format_pct(1.0) == "100.0%"


def test_format_improvement_zero_delta():
    assert format_improvement(0.781, 0.781) == "+0.00%"


def test_results_tables_reproduce_published_layout():
    grid = published_grid()
    tables = render_results_tables(grid)
    lstm = tables["lstm"]
    assert lstm["header"] == ["Model"] + list(DATASETS)
    labels = [row[0] for row in lstm["rows"]]
    assert labels == ["LSTM_Tail", "LSTM_MeanPool", "LSTM_MaxPool",
                      "LSTM_HybridMeanPool", "LSTM_HybridMaxPool"]
    row = dict(zip(labels, lstm["rows"]))
    assert row["LSTM_MaxPool"][4] == "91.8%"      # TREC column
    blabels = [r[0] for r in tables["blstm"]["rows"]]
    assert blabels[0] == "BLSTM_Tail"


def test_improvement_tables_match_published_values():
    grid = published_grid()
    expected = {
        "lstm": ("+2.30%", "+4.28%", "+1.32%", "+4.31%", "+0.77%", "+4.30%"),
        "blstm": ("+0.63%", "+4.37%", "+0.72%", "+2.00%", "+0.44%", "+2.22%"),
    }
    for body, values in expected.items():
        table = render_improvement_table(grid, body)
        assert table["rows"][2][1:] == list(values)
        assert table["rows"][0][0].endswith("_MeanPool")
        assert table["rows"][1][0] == "Best Run"


def test_improvement_best_run_values():
    grid = published_grid()
    table = render_improvement_table(grid, "lstm")
    assert table["rows"][1][1:] == ["79.9%", "46.3%", "84.5%", "92.0%",
                                    "91.8%", "82.4%"]


def test_winner_table_from_published_numbers():
    # Two cells (MaxPool/TREC and HybridMeanPool/SST-2) tie at published
    # precision and render "="; the paper printed B there, decided from
    # unrounded accuracies the published tables cannot reconstruct.
    grid = published_grid()
    table = render_winner_table(grid)
    rows = {row[0]: row[1:] for row in table["rows"]}
    assert rows["Tail"] == ["L", "L", "B", "B", "B", "B"]
    assert rows["MeanPool"] == ["B", "B", "B", "B", "B", "B"]
    assert rows["MaxPool"] == ["B", "B", "L", "=", "B", "B"]
    assert rows["HybridMeanPool"] == ["L", "L", "=", "B", "B", "L"]
    assert rows["HybridMaxPool"] == ["L", "B", "L", "L", "B", "B"]


def test_winner_tie_rule():
    cells = {("lstm", h, "MR"): 0.5 for h in HEADS}
    cells.update({("blstm", h, "MR"): 0.5 for h in HEADS})
    grid = ResultsGrid.from_accuracies(cells)
    table = render_winner_table(grid)
    assert all(row[1] == "=" for row in table["rows"])


def test_missing_cells_are_listed():
    cells = {("lstm", h, "MR"): 0.5 for h in HEADS if h != "tail"}
    grid = ResultsGrid.from_accuracies(cells)
    with pytest.raises(RnnBenchError, match="lstm_tail__mr"):
        render_results_tables(grid, bodies=["lstm"])


def test_csv_and_markdown_carry_same_numbers():
    grid = published_grid()
    table = render_results_tables(grid)["lstm"]
    md = table_markdown(table)
    csv_text = table_csv(table)
    for row in table["rows"]:
        for cell in row:
            assert str(cell) in md
            assert str(cell) in csv_text


def test_rendering_is_byte_stable():
    grid = published_grid()
    a = table_markdown(render_results_tables(grid)["blstm"])
    b = table_markdown(render_results_tables(grid)["blstm"])
    assert a == b


def test_build_report_kinds():
    grid = published_grid()
    out = build_report(grid)
    assert set(out) == {"results_lstm", "results_blstm", "improvement_lstm",
                        "improvement_blstm", "winners"}
    with pytest.raises(InvalidConfigError):
        build_report(grid, tables=["bogus"])


def test_write_report_files_and_figures(tmp_path):
    grid = published_grid()
    written = write_report(grid, tmp_path, fmt="md", figures=True)
    names = {p.split("/")[-1] for p in written}
    assert "results_lstm.md" in names
    assert "winners.md" in names
    assert "results_lstm.png" in names
    assert "improvement_blstm.png" in names
    assert "winners.png" in names
    for path in written:
        if path.endswith(".png"):
            with open(path, "rb") as f:
                assert f.read(8).startswith(b"\x89PNG")


def test_write_report_csv_format(tmp_path):
    grid = published_grid()
    written = write_report(grid, tmp_path, fmt="csv", figures=False)
    assert all(p.endswith(".csv") for p in written)
    with open(tmp_path / "results_lstm.csv", encoding="utf-8") as f:
        first = f.readline().strip()
    assert first == "Model," + ",".join(DATASETS)
