"""Render bucketed-report CSVs as grayscale heatmaps.

Input is the report schema written by the embedstab toolkit: comment lines
starting with '#', then a header row `row_label,col_label,mass,outline` and
one row per cell, in row-major order. The masses are already normalized along
the report's axis, so the outline mass rule is simply `mass > threshold`.

Rendering is deterministic: cell shade is black at fill-opacity mass/max_mass
(darker = more mass, strictly monotone in the cell value), outlined cells get
a stroke, and the SVG is written with stable formatting.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field


class ReportFormatError(ValueError):
    pass


REQUIRED_COLUMNS = ("row_label", "col_label", "mass", "outline")


@dataclass
class ReportGrid:
    row_labels: list[str]
    col_labels: list[str]
    masses: dict[tuple[str, str], float]
    csv_outline: dict[tuple[str, str], bool]

    def mass(self, r: str, c: str) -> float:
        return self.masses.get((r, c), 0.0)


@dataclass
class FigureSpec:
    csv_path: str
    out_path: str
    outline_threshold: float = 0.01
    use_csv_flags: bool = False  # render the producer's flags instead of the rule
    cell_size: int = 28
    title: str = ""

    def __post_init__(self):
        if self.outline_threshold < 0:
            raise ValueError("outline threshold must be >= 0")


def read_report_csv(path: str) -> ReportGrid:
    with open(path, encoding="utf-8") as fh:
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        try:
            header = next(reader)
        except StopIteration:
            raise ReportFormatError(f"{path!r}: empty report") from None
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise ReportFormatError(
                f"{path!r}: missing required columns {missing}; got {header}"
            )
        idx = {c: header.index(c) for c in REQUIRED_COLUMNS}
        rows: dict[str, None] = {}
        cols: dict[str, None] = {}
        masses: dict[tuple[str, str], float] = {}
        outline: dict[tuple[str, str], bool] = {}
        for ln, rec in enumerate(reader, start=2):
            if len(rec) < len(REQUIRED_COLUMNS):
                raise ReportFormatError(f"{path!r} row {ln}: too few fields")
            r, c = rec[idx["row_label"]], rec[idx["col_label"]]
            try:
                mass = float(rec[idx["mass"]])
            except ValueError:
                raise ReportFormatError(
                    f"{path!r} row {ln}: mass {rec[idx['mass']]!r} is not a number"
                ) from None
            if mass < 0:
                raise ReportFormatError(f"{path!r} row {ln}: negative mass")
            rows.setdefault(r)
            cols.setdefault(c)
            masses[(r, c)] = mass
            outline[(r, c)] = rec[idx["outline"]] == "1"
    return ReportGrid(list(rows), list(cols), masses, outline)


def outline_flags(grid: ReportGrid, spec: FigureSpec) -> dict[tuple[str, str], bool]:
    if spec.use_csv_flags:
        return dict(grid.csv_outline)
    return {
        key: mass > spec.outline_threshold for key, mass in grid.masses.items()
    }


def _svg_escape(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    )


def render_heatmap(spec: FigureSpec) -> str:
    """Write the heatmap SVG and return the output path."""
    grid = read_report_csv(spec.csv_path)
    flags = outline_flags(grid, spec)
    cell = spec.cell_size
    left, top = 110, 40 if spec.title else 16
    bottom = 70
    width = left + cell * len(grid.col_labels) + 16
    height = top + cell * len(grid.row_labels) + bottom
    vmax = max(grid.masses.values(), default=0.0)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    if spec.title:
        parts.append(
            f'<text x="{left}" y="24" font-size="14" font-family="sans-serif">'
            f"{_svg_escape(spec.title)}</text>"
        )
    for ri, r in enumerate(grid.row_labels):
        y = top + ri * cell
        parts.append(
            f'<text x="{left - 6}" y="{y + cell * 0.65}" font-size="9" '
            f'text-anchor="end" font-family="sans-serif">{_svg_escape(r)}</text>'
        )
        for ci, c in enumerate(grid.col_labels):
            x = left + ci * cell
            mass = grid.mass(r, c)
            opacity = 0.0 if vmax == 0 else mass / vmax
            stroke = (
                ' stroke="black" stroke-width="2"'
                if flags.get((r, c), False)
                else ' stroke="#cccccc" stroke-width="0.5"'
            )
            parts.append(
                f'<rect class="cell" data-row="{_svg_escape(r)}" '
                f'data-col="{_svg_escape(c)}" x="{x}" y="{y}" '
                f'width="{cell}" height="{cell}" fill="black" '
                f'fill-opacity="{opacity!r}"{stroke}/>'
            )
    for ci, c in enumerate(grid.col_labels):
        x = left + ci * cell
        parts.append(
            f'<text x="{x + cell / 2}" y="{top + cell * len(grid.row_labels) + 12}" '
            f'font-size="9" text-anchor="end" font-family="sans-serif" '
            f'transform="rotate(-45 {x + cell / 2} '
            f'{top + cell * len(grid.row_labels) + 12})">{_svg_escape(c)}</text>'
        )
    parts.append("</svg>")
    svg = "\n".join(parts) + "\n"

    if spec.out_path.endswith(".png"):
        _write_png(grid, flags, spec, vmax)
    else:
        with open(spec.out_path, "w", encoding="utf-8") as fh:
            fh.write(svg)
    return spec.out_path


def _write_png(grid, flags, spec, vmax):
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        import numpy as np
    except ImportError as exc:
        raise ReportFormatError(
            "PNG output needs matplotlib (pip install embedstab-plots[png]); "
            "SVG output has no dependencies"
        ) from exc
    data = np.array(
        [[grid.mass(r, c) for c in grid.col_labels] for r in grid.row_labels]
    )
    fig, ax = plt.subplots(figsize=(max(4, len(grid.col_labels) * 0.4),
                                    max(3, len(grid.row_labels) * 0.4)))
    ax.imshow(1.0 - (data / vmax if vmax else data), cmap="gray", vmin=0, vmax=1)
    for ri, r in enumerate(grid.row_labels):
        for ci, c in enumerate(grid.col_labels):
            if flags.get((r, c), False):
                ax.add_patch(plt.Rectangle((ci - 0.5, ri - 0.5), 1, 1,
                                           fill=False, edgecolor="black", lw=2))
    ax.set_xticks(range(len(grid.col_labels)))
    ax.set_xticklabels(grid.col_labels, rotation=45, ha="right", fontsize=7)
    ax.set_yticks(range(len(grid.row_labels)))
    ax.set_yticklabels(grid.row_labels, fontsize=7)
    if spec.title:
        ax.set_title(spec.title)
    fig.tight_layout()
    fig.savefig(spec.out_path, dpi=150)
    plt.close(fig)
