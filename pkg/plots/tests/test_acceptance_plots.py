"""Acceptance: rendering the figure-1-style CSV produced by the toolkit's
frequency-trend run. Shading ranks must agree with the CSV value ranks
(Spearman rho = 1 over cells) and outline flags must match the 0.01-mass rule.
"""

import os
import xml.etree.ElementTree as ET

from embedstab_plots import FigureSpec, read_report_csv, render_heatmap

DATA = os.path.join(os.path.dirname(__file__), "data", "figure1_frequency_report.csv")


def parse_cells(svg_path):
    tree = ET.parse(svg_path)
    cells = {}
    for rect in tree.getroot().iter("{http://www.w3.org/2000/svg}rect"):
        if rect.get("class") != "cell":
            continue
        key = (rect.get("data-row"), rect.get("data-col"))
        cells[key] = {
            "opacity": float(rect.get("fill-opacity")),
            "outlined": rect.get("stroke") == "black",
        }
    return cells


def average_ranks(values):
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1
        for t in range(i, j + 1):
            ranks[order[t]] = avg
        i = j + 1
    return ranks


def spearman(a, b):
    ra, rb = average_ranks(a), average_ranks(b)
    ma = sum(ra) / len(ra)
    mb = sum(rb) / len(rb)
    cov = sum((x - ma) * (y - mb) for x, y in zip(ra, rb))
    va = sum((x - ma) ** 2 for x in ra) ** 0.5
    vb = sum((y - mb) ** 2 for y in rb) ** 0.5
    return cov / (va * vb)


def test_figure1_rendering_ranks_and_outlines(tmp_path):
    assert os.path.exists(DATA), (
        "missing committed artifact from the frequency-trend acceptance run; "
        "run the main package's tests/test_acceptance.py first"
    )
    out = render_heatmap(FigureSpec(DATA, str(tmp_path / "fig1.svg"), 0.01))
    cells = parse_cells(out)
    grid = read_report_csv(DATA)

    keys = [(r, c) for r in grid.row_labels for c in grid.col_labels]
    masses = [grid.mass(r, c) for r, c in keys]
    opacities = [cells[k]["opacity"] for k in keys]

    # per-cell shading ranks agree with CSV value ranks
    assert spearman(masses, opacities) == 1.0
    for (m1, o1), (m2, o2) in zip(
        sorted(zip(masses, opacities)), sorted(zip(masses, opacities))[1:]
    ):
        assert (m2 > m1) == (o2 > o1)

    # outline flags match the 0.01-mass rule exactly
    for k, m in zip(keys, masses):
        assert cells[k]["outlined"] == (m > 0.01)
    print("\nACCEPTANCE figure-rendering: PASS "
          f"(rho=1 over {len(keys)} cells, outlines match 0.01 rule)")
