"""Geometry tests for fsmodel."""

from __future__ import annotations

from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st
import pytest

from fsmodel.errors import InvalidPiece, InvalidScale, MarkerOffGeometry
from fsmodel.geometry import (
    Part,
    PieceGeometry,
    Point,
    as_scalar,
    covers,
    diameter,
    format_scalar,
    hausdorff_distance,
    is_connected,
    set_distance,
    subdivide,
    touching_pairs,
    union_covers,
)

coords = st.fractions(min_value=-3, max_value=3, max_denominator=4)
small_coords = st.fractions(min_value=-2, max_value=2, max_denominator=2)


@st.composite
def parts(draw, values=coords) -> Part:
    xs = sorted((draw(values), draw(values)))
    ys = sorted((draw(values), draw(values)))
    return Part(xs[0], ys[0], xs[1], ys[1])


def _seg(x0, y0, x1, y1) -> Part:
    return Part.segment(Point(x0, y0), Point(x1, y1))


UNIT_SQUARE = PieceGeometry(
    (
        _seg(0, 0, 1, 0),
        _seg(1, 0, 1, 1),
        _seg(0, 1, 1, 1),
        _seg(0, 0, 0, 1),
    )
)


def test_scalars_are_exact() -> None:
    assert as_scalar("3/12") == Fraction(1, 4)
    assert format_scalar(Fraction(6, 3)) == "2"
    assert format_scalar(Fraction(-3, 8)) == "-3/8"
    with pytest.raises(TypeError, match="inexact"):
        as_scalar(0.5)


def test_part_validation() -> None:
    with pytest.raises(InvalidPiece, match="inverted"):
        Part(1, 0, 0, 1)
    with pytest.raises(InvalidPiece, match="axis-aligned"):
        Part.segment(Point(0, 0), Point(1, 1))
    assert Part.point(Point(1, 2)).is_point


def test_hausdorff_of_parallel_segments() -> None:
    assert hausdorff_distance(_seg(0, 0, 1, 0), _seg(0, "1/4", 1, "1/4")) == Fraction(1, 4)


def test_hausdorff_of_outline_and_filled_square() -> None:
    """The center of the box is half a unit from the outline."""
    filled = Part.box(Point(0, 0), Point(1, 1))
    assert hausdorff_distance(UNIT_SQUARE, filled) == Fraction(1, 2)
    assert set_distance(UNIT_SQUARE, filled) == 0


def test_tooth_to_its_base_point() -> None:
    tooth = _seg("3/8", 0, "3/8", "1/8")
    assert hausdorff_distance(tooth, Part.point(Point("3/8", 0))) == Fraction(1, 8)


def test_covers_needs_every_point() -> None:
    whole = Part.box(Point(0, 0), Point(2, 1))
    left = Part.box(Point(0, 0), Point(1, 1))
    right = Part.box(Point(1, 0), Point(2, 1))
    gapped = Part.box(Point("5/4", 0), Point(2, 1))
    assert covers(whole, [left, right])
    assert not covers(whole, [left, gapped])
    assert union_covers(UNIT_SQUARE, [Part.box(Point(0, 0), Point(1, 1))])


def test_outline_is_connected_but_parallel_bars_are_not() -> None:
    assert is_connected(UNIT_SQUARE)
    assert not is_connected([_seg(0, 0, 1, 0), _seg(0, 1, 1, 1)])


def test_subdivide_rejects_markers_off_geometry() -> None:
    with pytest.raises(MarkerOffGeometry):
        subdivide(_seg(0, 0, 1, 0), Fraction(1, 4), [Point(0, 1)])
    with pytest.raises(InvalidScale):
        subdivide(_seg(0, 0, 1, 0), Fraction(0))


def test_subdivide_cuts_on_global_lattice_and_markers() -> None:
    atoms = subdivide(
        _seg("1/8", 0, 1, 0), Fraction(1, 4), [Point("3/8", 0)], start_id=5, piece=2
    )
    cuts = [atom.part.x0 for atom in atoms]
    assert cuts == [Fraction(n, 8) for n in (1, 2, 3, 4, 6)]
    assert [atom.id for atom in atoms] == [5, 6, 7, 8, 9]
    assert {atom.parent_piece for atom in atoms} == {2}


@given(a=parts(), b=parts())
def test_distances_are_symmetric(a: Part, b: Part) -> None:
    assert set_distance(a, b) == set_distance(b, a)
    assert hausdorff_distance(a, b) == hausdorff_distance(b, a)
    assert set_distance(a, b) <= hausdorff_distance(a, b)


@given(a=parts(), b=parts(), c=parts())
def test_hausdorff_triangle_inequality(a: Part, b: Part, c: Part) -> None:
    assert hausdorff_distance(a, c) <= hausdorff_distance(a, b) + hausdorff_distance(b, c)


@given(st.lists(parts(), min_size=2, max_size=8))
def test_touching_pairs_matches_pairwise_distance(items: list[Part]) -> None:
    expected = [
        (i, j)
        for i in range(len(items))
        for j in range(i + 1, len(items))
        if items[i].distance(items[j]) == 0
    ]
    assert touching_pairs(items) == expected


@settings(max_examples=40)
@given(part=parts(small_coords), delta=st.sampled_from([Fraction(1), Fraction(1, 2)]))
def test_subdivision_covers_with_small_connected_atoms(part: Part, delta: Fraction) -> None:
    atoms = subdivide(part, delta)
    cells = [atom.part for atom in atoms]
    assert all(diameter(cell) <= delta for cell in cells)
    assert union_covers(part, cells)
    assert all(part.contains(cell) for cell in cells)
    assert is_connected(cells)
