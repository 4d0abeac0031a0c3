"""Limit, theta, raster and chain tests for fsmodel."""

from __future__ import annotations

from dataclasses import replace
from fractions import Fraction
import logging

import pytest

from fsmodel.analysis import (
    LIMIT_SCAN,
    CellLabel,
    ThetaWitness,
    check_unshielded,
    declared_limits,
    detect_theta,
    fill_cells,
    irreducible_chain,
    is_irreducible,
    min_feature_gap,
    numeric_limit_scan,
    piece_element,
    raster_hull,
    verify_limit,
    verify_theta,
)
from fsmodel.cdl import (
    LIMIT_CONTINUUM,
    LIMIT_POINT,
    LIMIT_SELF,
    Depth,
    load_compactum,
    truncate,
)
from fsmodel.errors import FSModelError, InvalidScale, NoConnection

# --------- limits ----------


def test_comb_declared_limits(comb4) -> None:
    horizontal, teeth = declared_limits(comb4)

    assert (horizontal.label, horizontal.kind, horizontal.family) == (
        "H",
        LIMIT_CONTINUUM,
        "Hn",
    )
    assert horizontal.members == (1, 2, 3, 4)
    assert horizontal.distances == tuple(Fraction(1, 2**n) for n in range(1, 5))
    assert horizontal.anchor == 0
    assert horizontal.nondegenerate and horizontal.monotone
    assert verify_limit(comb4, horizontal)

    assert (teeth.label, teeth.kind, teeth.parametric) == ("point(V)", LIMIT_POINT, True)
    assert not teeth.nondegenerate
    assert teeth.distances[:3] == (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4))
    assert verify_limit(comb4, teeth)


def test_tampered_witness_fails_verification(comb4) -> None:
    horizontal = declared_limits(comb4)[0]
    assert not verify_limit(comb4, replace(horizontal, distances=(1, 1, 1, 1)))
    reversed_order = replace(
        horizontal,
        members=horizontal.members[::-1],
        distances=horizontal.distances[::-1],
    )
    assert not verify_limit(comb4, reversed_order)
    touching = replace(horizontal, members=(1, 5), distances=(Fraction(1, 2),) * 2)
    assert not verify_limit(comb4, touching)


def test_self_accumulating_fibers(cantor6) -> None:
    limits = declared_limits(cantor6)
    assert len(limits) == 64
    assert all(limit.kind == LIMIT_SELF for limit in limits)
    first = limits[0]
    assert first.anchor == 0 and first.label == "F[000000]"
    assert len(first.members) >= 2
    assert all(a > b for a, b in zip(first.distances, first.distances[1:]))
    assert verify_limit(cantor6, first)


def test_restricted_keeps_witness_rows(comb4) -> None:
    horizontal = declared_limits(comb4)[0]
    kept = horizontal.restricted([2, 4])
    assert kept.members == (2, 4)
    assert kept.params == (2, 4)
    assert kept.distances == (Fraction(1, 4), Fraction(1, 16))


def test_piece_element(comb4) -> None:
    element = piece_element(comb4, 5)
    assert (element.label, element.anchor, element.family) == ("V[1/2]", 5, "V")


def test_numeric_scan_finds_the_base_arc(comb8) -> None:
    (found,) = numeric_limit_scan(comb8, Fraction(1, 2), 4)
    assert found.kind == LIMIT_SCAN
    assert found.label == "Hn->H"
    assert found.anchor == 0
    assert found.members == tuple(range(1, 9))


def test_numeric_scan_edge_cases(square, cantor6) -> None:
    assert numeric_limit_scan(square, Fraction(1, 2), 3) == []
    assert numeric_limit_scan(cantor6, Fraction(1), 8)
    with pytest.raises(InvalidScale):
        numeric_limit_scan(square, Fraction(0), 3)
    with pytest.raises(InvalidScale):
        numeric_limit_scan(square, Fraction(1), 2)


# --------- theta ----------


def test_theta_fixture(theta) -> None:
    witness = detect_theta(theta)
    assert witness is not None
    assert witness.labels(theta) == {
        "X1": ["bottom"],
        "X2": ["top"],
        "C1": ["left"],
        "C2": ["middle"],
        "C3": ["right"],
    }
    assert verify_theta(theta, witness)


def test_comb_contains_theta(comb4) -> None:
    """H and Hn[2] joined by the three teeth that reach y = 1/4."""
    witness = detect_theta(comb4)
    assert witness == ThetaWitness((0,), (2,), ((5,), (6,), (7,)))
    assert verify_theta(comb4, witness)


def test_no_theta_in_square_or_cantor(square, cantor6) -> None:
    assert detect_theta(square) is None
    assert detect_theta(cantor6, max_pieces=2) is None


def test_theta_search_skips_sets_around_a_shared_arc() -> None:
    """Every connected set with three neighbours contains the base arc."""
    t = truncate(load_compactum("fixture:arccomb"), Depth.uniform(7), Fraction(1, 16))
    assert len(t.pieces) == 1 + 2**7
    assert detect_theta(t) is None


def test_bogus_theta_witness(theta) -> None:
    overlapping = ThetaWitness((0,), (1,), ((2,), (3,), (2,)))
    assert not verify_theta(theta, overlapping)
    touching_bars = ThetaWitness((0,), (2,), ((1,), (3,), (4,)))
    assert not verify_theta(theta, touching_bars)


# --------- raster ----------


def test_square_outline_is_unshielded(square) -> None:
    verdict = check_unshielded(square, Fraction(1, 16))
    assert verdict.unshielded
    assert verdict.witness is None
    assert verdict.raster.counts()["BOUNDED_COMPLEMENT"] == 15 * 15


def test_filled_box_is_shielded_at_its_center(box) -> None:
    verdict = check_unshielded(box, Fraction(1, 16))
    assert not verdict.unshielded
    assert verdict.witness == (8, 8)
    assert verdict.raster.counts() == {
        "SET": 289,
        "BOUNDED_COMPLEMENT": 0,
        "UNBOUNDED_COMPLEMENT": 21 * 21 - 289,
    }
    assert verdict.raster.label_at(8, 8) == CellLabel.SET
    assert verdict.raster.label_at(100, 100) == CellLabel.UNBOUNDED_COMPLEMENT


def test_comb_is_shielded_between_teeth(comb4) -> None:
    verdict = check_unshielded(comb4, Fraction(1, 64))
    assert not verdict.unshielded
    assert verdict.witness in verdict.raster.shielded
    assert verdict.raster.cells(CellLabel.BOUNDED_COMPLEMENT)
    # deepest shielded cell sits on the third horizontal
    assert verdict.witness == (24, 8)
    cell = verdict.raster.cell_box(*verdict.witness)
    assert (cell.x0, cell.y0) == (Fraction(3, 8), Fraction(1, 8))


@pytest.mark.parametrize(
    ("name", "has_theta"),
    [
        ("comb4", True),
        ("theta", True),
        ("square", False),
        ("box", False),
        ("cantor6", False),
        ("arccomb5", False),
    ],
)
@pytest.mark.parametrize("delta", [Fraction(1, 32), Fraction(1, 64)])
def test_theta_means_shielded(name, has_theta, delta, request) -> None:
    t = request.getfixturevalue(name)
    assert (detect_theta(t) is not None) == has_theta
    if has_theta:
        assert not check_unshielded(t, delta).unshielded


def test_fibers_on_an_arc_are_unshielded(arccomb5) -> None:
    assert check_unshielded(arccomb5, Fraction(1, 64)).unshielded


def test_coarse_raster_warns(theta, caplog) -> None:
    assert min_feature_gap(theta) == Fraction(1, 2)
    with caplog.at_level(logging.WARNING, logger="fsmodel.analysis"):
        check_unshielded(theta, Fraction(1, 2))
    assert "exceeds half the minimal feature gap" in caplog.text


def test_hull_fills_the_square(square, comb4) -> None:
    atoms = square.piece_atoms[0]
    assert len(raster_hull(square, atoms, Fraction(1, 16))) == 17 * 17
    with pytest.raises(FSModelError, match="connected"):
        raster_hull(comb4, comb4.atoms_of([0, 1]), Fraction(1, 16))
    with pytest.raises(FSModelError, match="non-empty"):
        raster_hull(comb4, [], Fraction(1, 16))


def test_fill_cells_closes_a_ring() -> None:
    ring = {(c, r) for c in range(3) for r in range(3)} - {(1, 1)}
    assert fill_cells(ring) == frozenset(ring | {(1, 1)})
    assert fill_cells([]) == frozenset()


# --------- chains ----------


def test_chain_climbs_the_first_tooth(comb4) -> None:
    h = comb4.piece_atoms[0]
    hn2 = comb4.piece_atoms[comb4.piece("Hn[2]").index]
    tooth = comb4.piece_atoms[comb4.piece("V[1/2]").index]

    chain = irreducible_chain(comb4, h, hn2)

    assert chain[0] in h and chain[-1] in hn2
    assert chain[1:-1] == tooth[:4]
    assert chain == (7, 80, 81, 82, 83, 39)
    assert is_irreducible(comb4, chain, h, hn2)
    assert not is_irreducible(comb4, (*chain, 8), h, hn2)


def test_adjacent_sets_give_two_atom_chain(comb4) -> None:
    h = comb4.piece_atoms[0]
    tooth = comb4.piece_atoms[5]
    chain = irreducible_chain(comb4, h, tooth)
    assert len(chain) == 2
    assert is_irreducible(comb4, chain, h, tooth)


def test_chain_errors(comb4, cantor6) -> None:
    with pytest.raises(NoConnection):
        irreducible_chain(cantor6, cantor6.piece_atoms[0], cantor6.piece_atoms[1])
    with pytest.raises(FSModelError, match="disjoint"):
        irreducible_chain(comb4, [0, 1], [1, 2])
    with pytest.raises(FSModelError, match="non-empty"):
        irreducible_chain(comb4, [], [1])
