"""Output format tests for fsmodel."""

from __future__ import annotations

from fractions import Fraction
import json

import pytest

from fsmodel.analysis import CellLabel, check_unshielded, declared_limits, detect_theta
from fsmodel.errors import FSModelError, UniverseMismatch
from fsmodel.relations import Partition, check_fs_at_scale, fs_relation, quotient_metric
from fsmodel.render import (
    dumps,
    limit_to_json,
    load_partition,
    render_pgm,
    render_svg,
    report_to_json,
    save_partition,
    theta_to_json,
    to_jsonable,
    write_atomic,
)


def test_jsonable_values() -> None:
    assert to_jsonable({"eps": Fraction(1, 4), 3: {2, 1}}) == {"eps": "1/4", "3": [1, 2]}
    assert to_jsonable(CellLabel.SET) == "SET"
    assert dumps({"b": 1, "a": Fraction(2)}) == '{\n  "a": "2",\n  "b": 1\n}\n'


def test_limit_and_theta_payloads(comb4) -> None:
    entry = limit_to_json(comb4, declared_limits(comb4)[0])
    assert entry["label"] == "H"
    assert entry["witness"] == ["Hn[1]", "Hn[2]", "Hn[3]", "Hn[4]"]
    assert entry["distances"] == [Fraction(1, 2**n) for n in range(1, 5)]
    assert json.loads(dumps(entry))["distances"][0] == "1/2"

    payload = theta_to_json(comb4, detect_theta(comb4))
    assert payload["pieces"]["X2"] == ["Hn[2]"]
    assert payload["atoms"]["X1"] == list(comb4.piece_atoms[0])
    assert theta_to_json(comb4, None) is None


def test_report_lists_collapsed_pieces(comb4) -> None:
    fs = fs_relation(comb4)
    report = check_fs_at_scale(comb4, fs, quotient_metric(comb4, fs), Fraction(1, 2), 4)
    data = report_to_json(comb4, fs, report)
    assert data["passed"] is True
    assert data["collapsed_pieces"] == {"0": ["H"]}
    assert data["eps"] == "1/2"


def test_partition_files(comb4, theta, tmp_path) -> None:
    path = tmp_path / "nested" / "fs.json"
    fs = fs_relation(comb4)
    save_partition(path, fs)
    loaded = load_partition(path, comb4)
    assert loaded == fs
    assert loaded.frozen
    assert loaded.truncation is comb4
    with pytest.raises(UniverseMismatch):
        load_partition(path, theta)

    broken = tmp_path / "broken.json"
    broken.write_text("[1, 2]")
    with pytest.raises(FSModelError, match="does not hold an object"):
        load_partition(broken, comb4)
    with pytest.raises(FSModelError, match="Cannot load"):
        load_partition(tmp_path / "absent.json", comb4)


def test_write_atomic_replaces_content(tmp_path) -> None:
    path = tmp_path / "out.txt"
    write_atomic(path, "first\n")
    write_atomic(path, "second\n")
    assert path.read_text() == "second\n"
    assert [p.name for p in tmp_path.iterdir()] == ["out.txt"]


def test_svg_has_one_group_per_class(comb4) -> None:
    fs = fs_relation(comb4)
    svg = render_svg(comb4, fs)
    assert svg.startswith("<svg ")
    assert svg.count('<g id="class-') == len(fs)
    assert svg.count("<circle ") == len(fs.merged_classes()) == 1
    assert "<title>comb / fs</title>" in svg
    assert render_svg(comb4, fs) == svg


def test_svg_draws_boxes_as_rects(box) -> None:
    svg = render_svg(box, Partition.identity(box).freeze(), title="a<b")
    assert svg.count("<rect ") == len(box.atoms) + 1
    assert "<title>a&lt;b / identity</title>" in svg


def test_pgm_layout(box) -> None:
    raster = check_unshielded(box, Fraction(1, 16)).raster
    lines = render_pgm(raster).splitlines()
    assert lines[:4] == ["P2", "# delta 1/16", "21 21", "2"]
    assert len(lines) == 4 + 21
    assert lines[4].split() == ["2"] * 21
    assert lines[12].split()[10] == "0"
