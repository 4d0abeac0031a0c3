"""Partition, closure and quotient tests for fsmodel."""

from __future__ import annotations

from fractions import Fraction

import pytest

from fsmodel.analysis import piece_element
from fsmodel.cdl import Depth, load_compactum, truncate
from fsmodel.errors import ConfigError, FSModelError, InvalidScale, UniverseMismatch
from fsmodel.geometry import Part, Point
from fsmodel.relations import (
    RULE_CONNECTIVITY,
    RULE_LIMIT,
    ClosureRules,
    Partition,
    check_fs_at_scale,
    check_fs_grid,
    class_graph,
    class_projection,
    close,
    comp_relation,
    compare,
    finest_relation,
    fs_relation,
    h_relation,
    is_closed_under,
    is_top_model,
    join,
    meet,
    monotone_preimage_components,
    named_relation,
    phi_chain,
    phi_relation,
    quotient_diameter,
    quotient_metric,
    refines,
    verify_collapse,
)

EPS_GRID = (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8))

ROW = tuple(Part.segment(Point(i, 0), Point(i + 1, 0)) for i in range(4))


# --------- partitions ----------


def test_union_find_class_ids_are_smallest_atoms() -> None:
    p = Partition(ROW)
    assert p.union(3, 1)
    assert not p.union(1, 3)
    assert p.class_of(3) == 1
    assert p.labels() == (0, 1, 2, 1)
    assert p.classes() == [(0,), (1, 3), (2,)]
    assert p.merged_classes() == [(1, 3)]
    assert len(p) == 3
    assert p.geometry(3).bounds == Part(1, 0, 4, 0)
    assert [m.classes for m in p.provenance] == [(3, 1)]


def test_partition_constructors() -> None:
    by_classes = Partition.from_classes(ROW, [[2, 0], [3]])
    by_labels = Partition.from_labels(ROW, [0, 1, 0, 3])
    assert by_classes == by_labels
    with pytest.raises(UniverseMismatch):
        Partition.from_labels(ROW, [0, 1])
    with pytest.raises(FSModelError, match="outside the universe"):
        Partition.from_labels(ROW, [0, 1, 2, 9])


def test_frozen_partitions_reject_unions() -> None:
    p = Partition(ROW).freeze()
    with pytest.raises(FSModelError, match="frozen"):
        p.union(0, 1)
    clone = p.copy("thawed")
    assert clone.union(0, 1)
    assert p.labels() == (0, 1, 2, 3)


def test_json_keeps_labels_and_trace(comb4) -> None:
    fs = fs_relation(comb4)
    data = fs.to_json()
    assert data["name"] == "fs"
    assert data["atoms"] == len(comb4.atoms)
    assert data["trace"][0]["rule"] == RULE_CONNECTIVITY
    loaded = Partition.from_json(data, comb4.universe)
    assert loaded == fs
    assert [r.rule for r in loaded.trace] == [r.rule for r in fs.trace]
    with pytest.raises(UniverseMismatch):
        Partition.from_json({"classes": {"0": 0}}, comb4.universe)


def test_lattice_operations_need_one_universe(comb4, theta) -> None:
    with pytest.raises(UniverseMismatch):
        refines(Partition.identity(comb4), Partition.identity(theta))


# --------- named relations ----------


def test_fs_collapses_only_the_base_arc(comb8) -> None:
    fs = fs_relation(comb8)
    assert fs.frozen
    assert fs.merged_classes() == [comb8.piece_atoms[0]]
    assert fs.trace[0].rule == RULE_CONNECTIVITY
    assert fs.trace[-1].rule == RULE_LIMIT and fs.trace[-1].merges == 0
    assert compare(fs, h_relation(comb8)) == "equal"
    assert verify_collapse(comb8, fs).passed


def test_fs_check_on_the_comb(comb8) -> None:
    fs = fs_relation(comb8)
    qm = quotient_metric(comb8, fs)
    assert all(r.passed for r in check_fs_grid(comb8, fs, qm, EPS_GRID, 8))
    assert check_fs_at_scale(comb8, fs, qm, Fraction(1, 2), 4).passed


def test_identity_violates_fs_on_the_horizontals(comb8) -> None:
    identity = Partition.identity(comb8).freeze()
    report = check_fs_at_scale(
        comb8, identity, quotient_metric(comb8, identity), Fraction(1, 2), 4
    )
    assert not report.passed
    (violation,) = report.violations
    assert violation.family == "Hn"
    assert violation.members == ("Hn[1]", "Hn[2]", "Hn[3]", "Hn[4]")
    assert all(size >= Fraction(1, 2) for size in violation.diameters)


def test_phi_relations_pass_but_leave_the_arc(comb8) -> None:
    for n in (2, 4):
        phi = phi_relation(comb8, n)
        assert phi.name == f"phi:{n}"
        qm = quotient_metric(comb8, phi)
        assert check_fs_at_scale(comb8, phi, qm, Fraction(1, 2), 4).passed
    verdict = verify_collapse(comb8, phi_relation(comb8, 2))
    assert not verdict.passed
    assert verdict.limit == "H"
    assert len(verdict.classes) > 1


def test_h_and_phi_are_incomparable(comb8) -> None:
    h = h_relation(comb8)
    phi4 = phi_relation(comb8, 4)
    assert not refines(h, phi4)
    assert not refines(phi4, h)
    assert compare(fs_relation(comb8), named_relation(comb8, "phi:2")) == "incomparable"
    assert meet(h, phi_relation(comb8, 8)) == Partition.identity(comb8)


def test_phi_chain_gets_finer(comb4) -> None:
    chain = phi_chain(comb4, 4)
    assert [p.name for p in chain] == ["phi:1", "phi:2", "phi:3", "phi:4"]
    assert all(refines(b, a) for a, b in zip(chain, chain[1:]))
    assert compare(chain[1], chain[2]) == "equal"
    assert compare(chain[2], chain[3]) == "coarser"


def test_join_and_projection(comb4) -> None:
    fs = fs_relation(comb4)
    phi2 = phi_relation(comb4, 2)
    both = join(fs, phi2)
    assert refines(fs, both) and refines(phi2, both)
    projection = class_projection(Partition.identity(comb4), fs)
    assert set(projection.values()) == {fs.class_of(a) for a in range(len(comb4.atoms))}
    with pytest.raises(FSModelError, match="does not refine"):
        class_projection(fs, Partition.identity(comb4))


def test_class_graph_and_preimages(comb4) -> None:
    fs = fs_relation(comb4)
    graph = class_graph(fs)
    assert graph.number_of_nodes() == len(fs)
    assert graph.has_edge(0, comb4.piece_atoms[5][0])
    assert monotone_preimage_components(comb4, fs, [0]) == 1


def test_named_relation_errors(comb4) -> None:
    with pytest.raises(ConfigError, match="Unknown relation"):
        named_relation(comb4, "coarsest")
    with pytest.raises(ConfigError, match="Malformed"):
        named_relation(comb4, "phi:x")
    with pytest.raises(ConfigError, match="N >= 1"):
        named_relation(comb4, "phi:0")


def test_cantor_fibers(cantor6) -> None:
    fs = fs_relation(cantor6)
    comp = comp_relation(cantor6)
    assert len(fs.merged_classes()) == 64
    assert comp.merged_classes() == []
    assert compare(comp, fs) == "finer"


def test_comp_matches_fs_on_two_combs() -> None:
    t = truncate(load_compactum("fixture:twocombs"), Depth.uniform(3), Fraction(1, 8))
    fs = fs_relation(t)
    assert len(fs.merged_classes()) == 2
    assert compare(comp_relation(t), fs) == "equal"


def test_fibers_on_an_arc(arccomb5) -> None:
    fs = fs_relation(arccomb5)
    assert len(fs.merged_classes()) == 32
    qm = quotient_metric(arccomb5, fs)
    assert check_fs_at_scale(arccomb5, fs, qm, Fraction(1, 2), 8).passed

    fibers = arccomb5.family_members("F")
    half = finest_relation(
        arccomb5,
        [piece_element(arccomb5, i) for i in fibers[:16]],
        ClosureRules(limit_closure=False),
    )
    report = check_fs_at_scale(
        arccomb5, half, quotient_metric(arccomb5, half), Fraction(1, 2), 8
    )
    assert not report.passed
    assert report.violations[0].members[0] == "F[10000]"


def test_top_model(arccomb5) -> None:
    fs = fs_relation(arccomb5)
    identity = Partition.identity(arccomb5).freeze()
    assert is_top_model(arccomb5, fs, [identity], [Fraction(1, 2)], 8)
    assert not is_top_model(arccomb5, identity, [], [Fraction(1, 2)], 8)


def test_closure_is_idempotent(comb4) -> None:
    fs = fs_relation(comb4)
    collapse = [piece_element(comb4, 0)]
    assert is_closed_under(fs, collapse)
    again = fs.copy()
    assert close(again, collapse) == 0
    assert again == fs


# --------- quotient metric ----------


def test_quotient_metric_contracts_classes(comb4) -> None:
    identity = Partition.identity(comb4).freeze()
    fs = fs_relation(comb4)
    h = comb4.piece_atoms[0]
    before = quotient_metric(comb4, identity)
    after = quotient_metric(comb4, fs)
    assert before.distance(h[0], h[-1]) == Fraction(15, 16)
    assert after.distance(h[0], h[-1]) == 0
    assert quotient_diameter(h, fs, after) == 0
    assert quotient_diameter(h, identity, before) == 1


def test_single_atom_piece_keeps_its_size(comb8) -> None:
    tooth = comb8.piece_atoms[comb8.piece("V[1/256]").index]
    assert len(tooth) == 1
    for p in (Partition.identity(comb8).freeze(), fs_relation(comb8)):
        qm = quotient_metric(comb8, p)
        assert quotient_diameter(tooth, p, qm) == Fraction(1, 256)


def test_quotient_metric_between_components(cantor6) -> None:
    identity = Partition.identity(cantor6).freeze()
    qm = quotient_metric(cantor6, identity)
    assert qm.distance(cantor6.piece_atoms[0][0], cantor6.piece_atoms[1][0]) is None


def test_fs_check_arguments(comb4) -> None:
    fs = fs_relation(comb4)
    qm = quotient_metric(comb4, fs)
    with pytest.raises(InvalidScale):
        check_fs_at_scale(comb4, fs, qm, Fraction(0), 4)
    with pytest.raises(InvalidScale):
        check_fs_at_scale(comb4, fs, qm, Fraction(1, 2), 2)
