"""Equivariance and induced map tests for fsmodel."""

from __future__ import annotations

from fractions import Fraction

import pytest

from fsmodel.cdl import Depth, load_compactum, load_map, parse_map
from fsmodel.dynamics import (
    InducedMap,
    build_system,
    codomain_depth,
    induced_map,
    induced_map_to_json,
    verify_equivariance,
    verify_semiconjugacy,
)
from fsmodel.errors import DepthMismatch, NotEquivariant
from fsmodel.relations import Partition, class_projection, comp_relation, fs_relation

DELTA = Fraction(1, 16)


@pytest.fixture(scope="module")
def cantor_shift():
    cantor = load_compactum("fixture:cantor")
    return build_system(cantor, load_map("fixture:shift", cantor), Depth.uniform(6), DELTA)


def test_shift_drops_one_letter(cantor_shift) -> None:
    s = cantor_shift
    assert s.domain.depth == Depth.uniform(6)
    assert s.codomain.depth == Depth(6, 6, 5)
    assert not s.same_depth
    assert s.fully_invariant
    assert len(s.piece_image) == 64
    assert s.codomain.pieces[s.piece_image[0]].label == "F[00000]"
    assert s.codomain.pieces[s.piece_image[63]].label == "F[11111]"


def test_fs_is_equivariant_under_the_shift(cantor_shift) -> None:
    s = cantor_shift
    p_dom, p_cod = fs_relation(s.domain), fs_relation(s.codomain)

    verdict = verify_equivariance(s, p_dom, p_cod)
    assert verdict.passed and verdict.into and verdict.onto

    im = induced_map(s, p_dom, p_cod)
    assert len(im.table) == 64
    for piece in s.domain.pieces:
        source = p_dom.class_of(s.domain.piece_atoms[piece.index][0])
        target = s.codomain.piece(f"F[{piece.param[1:]}]")
        assert im(source) == p_cod.class_of(s.codomain.piece_atoms[target.index][0])
    assert verify_semiconjugacy(s, im).passed
    assert induced_map_to_json(im)["domain"] == "fs"


def test_comp_factors_through_fs_under_the_shift(cantor_shift) -> None:
    s = cantor_shift
    fs_dom, fs_cod = fs_relation(s.domain), fs_relation(s.codomain)
    comp_dom, comp_cod = comp_relation(s.domain), comp_relation(s.codomain)
    assert verify_equivariance(s, comp_dom, comp_cod).passed

    fine = induced_map(s, comp_dom, comp_cod)
    coarse = induced_map(s, fs_dom, fs_cod)
    assert verify_semiconjugacy(s, fine).passed
    assert verify_semiconjugacy(s, coarse).passed

    down = class_projection(comp_dom, fs_dom)
    across = class_projection(comp_cod, fs_cod)
    for source, target in fine.table.items():
        assert across[target] == coarse(down[source])


def test_depth_change_needs_codomain_partition(cantor_shift) -> None:
    with pytest.raises(DepthMismatch, match="codomain partition"):
        verify_equivariance(cantor_shift, fs_relation(cantor_shift.domain))


def test_merging_distant_fibers_breaks_equivariance(cantor_shift) -> None:
    s = cantor_shift
    p_cod = fs_relation(s.codomain)
    bad = fs_relation(s.domain).copy("adversarial")
    first = s.domain.piece_atoms[s.domain.piece("F[000000]").index][0]
    last = s.domain.piece_atoms[s.domain.piece("F[111111]").index][0]
    bad.union(first, last)

    verdict = verify_equivariance(s, bad, p_cod)
    assert not verdict.passed
    assert not verdict.into
    assert verdict.domain_class == first
    assert len(verdict.codomain_classes) == 2
    with pytest.raises(NotEquivariant):
        induced_map(s, bad, p_cod)


def test_corrupted_table_fails_semiconjugacy(cantor_shift) -> None:
    s = cantor_shift
    p_dom, p_cod = fs_relation(s.domain), fs_relation(s.codomain)
    im = induced_map(s, p_dom, p_cod)
    source, target = sorted(im.table.items())[0]
    other = next(v for v in im.table.values() if v != target)
    corrupted = InducedMap(p_dom, p_cod, {**im.table, source: other})
    verdict = verify_semiconjugacy(s, corrupted)
    assert not verdict.passed
    assert verdict.expected == other
    assert verdict.found == target


def test_identity_map_keeps_depth() -> None:
    cantor = load_compactum("fixture:cantor")
    s = build_system(cantor, load_map("fixture:identity", cantor), Depth.uniform(3), DELTA)
    assert s.same_depth
    fs = fs_relation(s.domain)
    im = induced_map(s, fs)
    assert all(source == target for source, target in im.table.items())


def test_reflection_of_the_base_arc(comb4) -> None:
    flip = parse_map("map flip { on H: affine (-1, 0, 0, 1, 1, 0) }")
    s = build_system(comb4.spec, flip, comb4.depth, comb4.delta, domain=comb4)
    assert s.same_depth and s.fully_invariant
    h = comb4.piece_atoms[0]
    assert s.atom_image[h[0]] == (h[-1],)
    identity = Partition.identity(comb4).freeze()
    assert verify_equivariance(s, identity).passed
    assert verify_equivariance(s, fs_relation(comb4)).passed


def test_shift_needs_room_to_drop_a_letter() -> None:
    cantor = load_compactum("fixture:cantor")
    with pytest.raises(DepthMismatch, match="at least 2"):
        codomain_depth(cantor, load_map("fixture:shift", cantor), Depth.uniform(1))
