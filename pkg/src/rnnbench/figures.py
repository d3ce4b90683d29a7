"""Figure rendering for the report path.

Every figure visualizes exactly the numbers of one rendered table (no
extra plot types): grouped bars for the accuracy tables, bars for the
relative-improvement rows, and a colored letter grid for the winner
table.  PNG files land next to the delimited output.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_WINNER_COLORS = {"B": "#4c72b0", "L": "#dd8452", "=": "#aaaaaa"}


def _parse_pct(cell: str) -> float:
    return float(cell.rstrip("%"))


def _accuracy_figure(table: dict, title: str, path) -> None:
    datasets = table["header"][1:]
    labels = [row[0] for row in table["rows"]]
    values = np.array([[_parse_pct(c) for c in row[1:]] for row in table["rows"]])
    x = np.arange(len(datasets))
    width = 0.8 / len(labels)
    fig, ax = plt.subplots(figsize=(9, 4))
    for k, label in enumerate(labels):
        ax.bar(x + (k - (len(labels) - 1) / 2) * width, values[k], width,
               label=label)
    ax.set_xticks(x, datasets)
    ax.set_ylabel("Accuracy (%)")
    ax.set_ylim(values.min() - 2, min(100.0, values.max() + 2))
    ax.set_title(title)
    ax.legend(fontsize=8, ncols=2)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _improvement_figure(table: dict, title: str, path) -> None:
    datasets = table["header"][1:]
    imp_row = table["rows"][-1]
    values = [float(c.lstrip("+").rstrip("%")) for c in imp_row[1:]]
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.bar(datasets, values, color="#55a868")
    ax.set_ylabel("Relative improvement (%)")
    ax.set_title(title)
    for i, v in enumerate(values):
        ax.text(i, v, f"+{v:.2f}%", ha="center", va="bottom", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _winner_figure(table: dict, path) -> None:
    datasets = table["header"][1:]
    heads = [row[0] for row in table["rows"]]
    fig, ax = plt.subplots(figsize=(1.2 * len(datasets) + 2, 0.6 * len(heads) + 1.5))
    for r, row in enumerate(table["rows"]):
        for c, letter in enumerate(row[1:]):
            ax.add_patch(plt.Rectangle((c, len(heads) - 1 - r), 1, 1,
                                       color=_WINNER_COLORS.get(letter, "#ffffff"),
                                       alpha=0.6))
            ax.text(c + 0.5, len(heads) - 1 - r + 0.5, letter,
                    ha="center", va="center", fontweight="bold")
    ax.set_xlim(0, len(datasets))
    ax.set_ylim(0, len(heads))
    ax.set_xticks(np.arange(len(datasets)) + 0.5, datasets)
    ax.set_yticks(np.arange(len(heads)) + 0.5, list(reversed(heads)))
    ax.set_title("BLSTM (B) vs LSTM (L) winners")
    ax.tick_params(length=0)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_figures(rendered: dict, out_dir) -> list[str]:
    """Render one PNG per table in a build_report() result."""
    written = []
    for name, table in rendered.items():
        path = str(out_dir / f"{name}.png")
        if name.startswith("results_"):
            body = name.split("_", 1)[1].upper()
            _accuracy_figure(table, f"{body} accuracy by dataset", path)
        elif name.startswith("improvement_"):
            body = name.split("_", 1)[1].upper()
            _improvement_figure(table, f"{body}: best run vs MeanPool baseline", path)
        elif name == "winners":
            _winner_figure(table, path)
        else:
            continue
        written.append(path)
    return written
