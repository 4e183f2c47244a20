import xml.etree.ElementTree as ET

import pytest

from embedstab_plots import FigureSpec, ReportFormatError, read_report_csv, render_heatmap


def write_report(path, cells, header="row_label,col_label,mass,outline",
                 comments=("# manifest abc123",)):
    with open(path, "w", encoding="utf-8") as fh:
        for c in comments:
            fh.write(c + "\n")
        fh.write(header + "\n")
        for row in cells:
            fh.write(",".join(str(x) for x in row) + "\n")
    return str(path)


def parse_cells(svg_path):
    ns = {"svg": "http://www.w3.org/2000/svg"}
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


def test_single_dark_outlined_cell(tmp_path):
    csv = write_report(
        tmp_path / "r.csv",
        [("r0", "c0", 1.0, 1), ("r0", "c1", 0.0, 0),
         ("r1", "c0", 0.0, 0), ("r1", "c1", 0.0, 0)],
    )
    out = render_heatmap(FigureSpec(csv, str(tmp_path / "r.svg"), 0.01))
    cells = parse_cells(out)
    assert cells[("r0", "c0")]["opacity"] == 1.0
    assert cells[("r0", "c0")]["outlined"]
    for key in (("r0", "c1"), ("r1", "c0"), ("r1", "c1")):
        assert cells[key]["opacity"] == 0.0
        assert not cells[key]["outlined"]


def test_uniform_report_no_outlines_above_threshold(tmp_path):
    rows = [(f"r{i}", f"c{j}", 0.25, 0) for i in range(2) for j in range(4)]
    csv = write_report(tmp_path / "u.csv", rows)
    out = render_heatmap(FigureSpec(csv, str(tmp_path / "u.svg"), 0.5))
    cells = parse_cells(out)
    opacities = {v["opacity"] for v in cells.values()}
    assert opacities == {1.0}  # uniform shading (scaled to the max)
    assert not any(v["outlined"] for v in cells.values())
    # threshold below the uniform mass outlines everything
    out2 = render_heatmap(FigureSpec(csv, str(tmp_path / "u2.svg"), 0.1))
    assert all(v["outlined"] for v in parse_cells(out2).values())


def test_rendering_is_deterministic(tmp_path):
    rows = [("a", "x", 0.3, 0), ("a", "y", 0.7, 1)]
    csv = write_report(tmp_path / "d.csv", rows)
    p1 = render_heatmap(FigureSpec(csv, str(tmp_path / "one.svg"), 0.01))
    p2 = render_heatmap(FigureSpec(csv, str(tmp_path / "two.svg"), 0.01))
    assert open(p1).read() == open(p2).read()


def test_rendering_does_not_touch_the_csv(tmp_path):
    rows = [("a", "x", 0.5, 0)]
    csv = write_report(tmp_path / "c.csv", rows)
    before = open(csv).read()
    render_heatmap(FigureSpec(csv, str(tmp_path / "c.svg"), 0.01))
    assert open(csv).read() == before


def test_schema_mismatch_lists_missing_columns(tmp_path):
    csv = write_report(tmp_path / "bad.csv", [("a", 1)], header="row_label,value")
    with pytest.raises(ReportFormatError, match="col_label"):
        render_heatmap(FigureSpec(csv, str(tmp_path / "bad.svg")))


def test_shading_is_monotone_in_mass(tmp_path):
    import random

    rng = random.Random(0)
    rows = []
    for i in range(5):
        for j in range(6):
            rows.append((f"r{i}", f"c{j}", round(rng.random(), 6), 0))
    csv = write_report(tmp_path / "m.csv", rows)
    out = render_heatmap(FigureSpec(csv, str(tmp_path / "m.svg"), 0.01))
    cells = parse_cells(out)
    grid = read_report_csv(csv)
    pairs = [(grid.mass(r, c), cells[(r, c)]["opacity"]) for r, c in cells]
    pairs.sort()
    for (m1, o1), (m2, o2) in zip(pairs, pairs[1:]):
        assert (m2 > m1 and o2 > o1) or (m2 == m1 and o2 == o1)


def test_csv_flag_mode(tmp_path):
    rows = [("a", "x", 0.9, 0), ("a", "y", 0.001, 1)]
    csv = write_report(tmp_path / "f.csv", rows)
    out = render_heatmap(
        FigureSpec(csv, str(tmp_path / "f.svg"), 0.01, use_csv_flags=True)
    )
    cells = parse_cells(out)
    assert not cells[("a", "x")]["outlined"]
    assert cells[("a", "y")]["outlined"]


def test_cli_render_and_errors(tmp_path, capsys):
    from embedstab_plots.cli import main

    rows = [("a", "x", 0.4, 0), ("b", "x", 0.6, 1)]
    csv = write_report(tmp_path / "ok.csv", rows)
    out = str(tmp_path / "ok.svg")
    assert main(["render", "--csv", csv, "--out", out,
                 "--outline-threshold", "0.5"]) == 0
    assert parse_cells(out)[("b", "x")]["outlined"]
    assert main(["render", "--csv", str(tmp_path / "missing.csv"),
                 "--out", out]) == 2
