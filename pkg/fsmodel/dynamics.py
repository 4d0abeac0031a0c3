"""Symbolic self-maps, equivariance of partitions and induced quotient maps."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Dict, Iterable, List, NamedTuple, Optional, Set, Tuple, Union

from .cdl import (
    ACTION_AFFINE,
    ACTION_SHIFT,
    PARAM_INTEGER,
    PARAM_WORD,
    CompactumSpec,
    Depth,
    MapAction,
    MapSpec,
    Piece,
    TruncatedCompactum,
    member_label,
    truncate,
    validate_map,
)
from .errors import DepthMismatch, FSModelError, NotEquivariant
from .geometry import Part, Point, bounding_box, union_covers
from .relations import Partition

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DynamicalSystem:
    """A map between two truncations of one compactum.

    ``piece_image[i]`` is the codomain piece receiving domain piece ``i`` and
    ``atom_image[a]`` the codomain atoms covered by the image of atom ``a``.
    """

    spec: CompactumSpec
    map: MapSpec
    domain: TruncatedCompactum
    codomain: TruncatedCompactum
    piece_image: Tuple[int, ...]
    atom_image: Tuple[Tuple[int, ...], ...] = field(repr=False)
    fully_invariant: bool = True

    @property
    def same_depth(self) -> bool:
        return self.codomain is self.domain


def codomain_depth(spec: CompactumSpec, map_spec: MapSpec, depth: Depth) -> Depth:
    """Depth at which every image of a depth-limited member is declared."""
    result = depth
    for action in map_spec.actions:
        if action.kind != ACTION_SHIFT:
            continue
        param = spec.family(action.target).param
        if param.kind == PARAM_WORD:
            if depth.word <= 1:
                raise DepthMismatch(
                    f"Shift on {action.target} needs word depth of at least 2, "
                    f"got {depth.word}"
                )
            result = replace(result, word=depth.word - 1)
        elif param.kind == PARAM_INTEGER:
            result = replace(result, integer=depth.integer + 1)
    return result


def build_system(
    spec: CompactumSpec,
    map_spec: MapSpec,
    depth: Depth,
    delta: Union[Fraction, int, str],
    domain: Optional[TruncatedCompactum] = None,
) -> DynamicalSystem:
    validate_map(map_spec, spec)
    if domain is None:
        domain = truncate(spec, depth, delta)
    target_depth = codomain_depth(spec, map_spec, depth)
    codomain = domain if target_depth == depth else truncate(spec, target_depth, delta)

    piece_image: List[int] = []
    atom_image: List[Tuple[int, ...]] = []
    for piece in domain.pieces:
        action = map_spec.action_for(piece.family or piece.label)
        target, transfer = _image_piece(piece, action, codomain)
        piece_image.append(target.index)
        for atom in domain.piece_atoms[piece.index]:
            image = transfer(domain.atoms[atom].part)
            hits = tuple(
                b for b in codomain.piece_atoms[target.index]
                if _overlaps(image, codomain.atoms[b].part)
            )
            if not hits:
                raise DepthMismatch(f"Image of atom {atom} of {piece.label} is undefined")
            atom_image.append(hits)

    fully_invariant = set(piece_image) == set(range(len(codomain.pieces)))
    if not fully_invariant:
        missed = sorted(set(range(len(codomain.pieces))) - set(piece_image))
        _LOGGER.warning(
            "Map %s is not fully invariant on %s: %d codomain pieces have no preimage",
            map_spec.name,
            spec.name,
            len(missed),
        )
    _LOGGER.debug(
        "Built %s on %s: depth %s to %s, %d atoms",
        map_spec.name,
        spec.name,
        depth,
        target_depth,
        len(atom_image),
    )
    return DynamicalSystem(
        spec,
        map_spec,
        domain,
        codomain,
        tuple(piece_image),
        tuple(atom_image),
        fully_invariant,
    )


def _image_piece(piece: Piece, action: MapAction, codomain: TruncatedCompactum):
    if action.kind == ACTION_AFFINE:
        image = [_affine_part(action, part) for part in piece.geometry.parts]
        for candidate in codomain.pieces:
            if union_covers(image, candidate.geometry):
                return candidate, lambda part: _affine_part(action, part)
        raise DepthMismatch(f"Image of {piece.label} is not a declared piece")

    label = piece.label
    if action.kind == ACTION_SHIFT:
        if isinstance(piece.param, str):
            label = member_label(piece.family, piece.param[1:])
        else:
            label = member_label(piece.family, piece.param + 1)
    try:
        target = codomain.piece(label)
    except FSModelError as err:
        raise DepthMismatch(f"Image {label} of {piece.label} leaves the truncation") from err
    source_box = bounding_box(piece.geometry.parts)
    target_box = bounding_box(target.geometry.parts)
    return target, lambda part: _rescale(part, source_box, target_box)


def _affine_part(action: MapAction, part: Part) -> Part:
    corners = [
        action.apply(Point(x, y))
        for x in (part.x0, part.x1)
        for y in (part.y0, part.y1)
    ]
    return Part(
        min(p.x for p in corners),
        min(p.y for p in corners),
        max(p.x for p in corners),
        max(p.y for p in corners),
        part.kind,
    )


def _axis(
    lo: Fraction, hi: Fraction, s0: Fraction, s1: Fraction, t0: Fraction, t1: Fraction
) -> Tuple[Fraction, Fraction]:
    if s1 == s0:
        return t0, t1
    scale = (t1 - t0) / (s1 - s0)
    return t0 + (lo - s0) * scale, t0 + (hi - s0) * scale


def _rescale(part: Part, source: Part, target: Part) -> Part:
    x0, x1 = _axis(part.x0, part.x1, source.x0, source.x1, target.x0, target.x1)
    y0, y1 = _axis(part.y0, part.y1, source.y0, source.y1, target.y0, target.y1)
    return Part(x0, y0, x1, y1, part.kind)


def _overlaps(a: Part, b: Part) -> bool:
    """Positive overlap along every axis where both parts have extent."""
    for lo_a, hi_a, lo_b, hi_b in ((a.x0, a.x1, b.x0, b.x1), (a.y0, a.y1, b.y0, b.y1)):
        lo, hi = max(lo_a, lo_b), min(hi_a, hi_b)
        if hi_a > lo_a and hi_b > lo_b:
            if hi <= lo:
                return False
        elif hi < lo:
            return False
    return True


# ---------------------------
# Equivariance
# ---------------------------


class EquivarianceVerdict(NamedTuple):
    passed: bool
    into: bool
    onto: bool
    domain_class: Optional[int] = None
    codomain_classes: Tuple[int, ...] = ()


def _codomain_partition(
    s: DynamicalSystem, p_dom: Partition, p_cod: Optional[Partition]
) -> Partition:
    if p_cod is not None:
        return p_cod
    if not s.same_depth:
        raise DepthMismatch(
            f"Map {s.map.name} changes depth; a codomain partition is required"
        )
    return p_dom


def _class_images(s: DynamicalSystem, p_dom: Partition) -> Dict[int, Set[int]]:
    return {
        members[0]: {b for a in members for b in s.atom_image[a]}
        for members in p_dom.classes()
    }


def verify_equivariance(
    s: DynamicalSystem, p_dom: Partition, p_cod: Optional[Partition] = None
) -> EquivarianceVerdict:
    """Classes must map into single classes and cover their image classes."""
    p_cod = _codomain_partition(s, p_dom, p_cod)
    covered: Dict[int, Set[int]] = {}
    for source, image in _class_images(s, p_dom).items():
        targets = sorted({p_cod.class_of(b) for b in image})
        if len(targets) != 1:
            _LOGGER.debug("Class %d of %s maps into %s", source, p_dom.name, targets)
            return EquivarianceVerdict(False, False, False, source, tuple(targets))
        covered.setdefault(targets[0], set()).update(image)
    for members in p_cod.classes():
        if covered.get(members[0], set()) != set(members):
            return EquivarianceVerdict(False, True, False, None, (members[0],))
    return EquivarianceVerdict(True, True, True)


@dataclass(frozen=True)
class InducedMap:
    """Class-to-class table of the map induced on quotients."""

    domain: Partition = field(compare=False)
    codomain: Partition = field(compare=False)
    table: Dict[int, int]

    def __call__(self, class_id: int) -> int:
        return self.table[class_id]


def induced_map(
    s: DynamicalSystem, p_dom: Partition, p_cod: Optional[Partition] = None
) -> InducedMap:
    p_cod = _codomain_partition(s, p_dom, p_cod)
    verdict = verify_equivariance(s, p_dom, p_cod)
    if not verdict.passed:
        raise NotEquivariant(
            f"{p_dom.name} is not equivariant under {s.map.name}: class "
            f"{verdict.domain_class} against {list(verdict.codomain_classes)}"
        )
    table = {
        source: p_cod.class_of(min(image))
        for source, image in _class_images(s, p_dom).items()
    }
    return InducedMap(p_dom, p_cod, table)


class SemiconjugacyVerdict(NamedTuple):
    passed: bool
    atom: Optional[int] = None
    expected: Optional[int] = None
    found: Optional[int] = None


def verify_semiconjugacy(
    s: DynamicalSystem, im: InducedMap, samples: Optional[Iterable[int]] = None
) -> SemiconjugacyVerdict:
    """class(f(a)) == g(class(a)) for every sampled atom."""
    atoms = range(len(s.domain.atoms)) if samples is None else samples
    for atom in atoms:
        expected = im.table.get(im.domain.class_of(atom))
        for image in s.atom_image[atom]:
            found = im.codomain.class_of(image)
            if found != expected:
                return SemiconjugacyVerdict(False, atom, expected, found)
    return SemiconjugacyVerdict(True)


def induced_map_to_json(im: InducedMap) -> Dict[str, Any]:
    return {
        "domain": im.domain.name,
        "codomain": im.codomain.name,
        "table": {str(k): v for k, v in sorted(im.table.items())},
    }
