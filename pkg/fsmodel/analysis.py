"""Limit continua, theta configurations, raster topology and irreducible chains."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, replace
from enum import IntEnum
from fractions import Fraction
from typing import (
    Dict,
    FrozenSet,
    Iterable,
    Iterator,
    List,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
)

import networkx as nx
import numpy as np
from scipy import ndimage

from .cdl import (
    LIMIT_CONTINUUM,
    LIMIT_POINT,
    LIMIT_SELF,
    ParamValue,
    TruncatedCompactum,
)
from .const import DEFAULT_MAX_PIECES, DEFAULT_RASTER_PADDING
from .errors import FSModelError, InvalidScale, NoConnection
from .geometry import (
    Part,
    PieceGeometry,
    as_scalar,
    diameter,
    hausdorff_distance,
    set_distance,
)

_LOGGER = logging.getLogger(__name__)

LIMIT_SCAN = "scan"
LIMIT_PIECE = "piece"

Cell = Tuple[int, int]


# ---------------------------
# Limit continua
# ---------------------------


@dataclass(frozen=True)
class LimitContinuum:
    """Hausdorff limit of pairwise disjoint pieces, with its witness sequence.

    ``members`` are piece indices in witness order and ``distances`` their
    Hausdorff distances to the limit. Parametric point limits compare each
    member with its own limit point.
    """

    label: str
    geometry: PieceGeometry
    family: Optional[str] = None
    members: Tuple[int, ...] = ()
    params: Tuple[ParamValue, ...] = ()
    distances: Tuple[Fraction, ...] = ()
    kind: str = LIMIT_CONTINUUM
    anchor: Optional[int] = None
    parametric: bool = False

    @property
    def nondegenerate(self) -> bool:
        return diameter(self.geometry) > 0

    @property
    def monotone(self) -> bool:
        return all(a >= b for a, b in zip(self.distances, self.distances[1:]))

    def restricted(self, members: Iterable[int]) -> LimitContinuum:
        keep = set(members)
        rows = [
            row
            for row in zip(self.members, self.params, self.distances)
            if row[0] in keep
        ]
        return replace(
            self,
            members=tuple(r[0] for r in rows),
            params=tuple(r[1] for r in rows),
            distances=tuple(r[2] for r in rows),
        )


def piece_element(t: TruncatedCompactum, index: int) -> LimitContinuum:
    """A single piece as a collapse element."""
    piece = t.pieces[index]
    return LimitContinuum(
        piece.label, piece.geometry, piece.family, kind=LIMIT_PIECE, anchor=index
    )


def declared_limits(t: TruncatedCompactum) -> List[LimitContinuum]:
    found: List[LimitContinuum] = []
    for fam in t.spec.families:
        members = t.family_members(fam.name)
        if not members:
            continue
        pieces = [t.pieces[m] for m in members]
        params = tuple(piece.param for piece in pieces)
        if fam.limit.kind == LIMIT_CONTINUUM:
            target = t.piece(fam.limit.name)
            found.append(
                LimitContinuum(
                    target.label,
                    target.geometry,
                    fam.name,
                    members,
                    params,
                    tuple(
                        hausdorff_distance(p.geometry, target.geometry) for p in pieces
                    ),
                    LIMIT_CONTINUUM,
                    target.index,
                )
            )
        elif fam.limit.kind == LIMIT_POINT:
            found.append(
                LimitContinuum(
                    f"point({fam.name})",
                    pieces[-1].limit,
                    fam.name,
                    members,
                    params,
                    tuple(hausdorff_distance(p.geometry, p.limit) for p in pieces),
                    LIMIT_POINT,
                    parametric=fam.limit.parametric,
                )
            )
        if fam.accumulates_self:
            for index in members:
                piece = t.pieces[index]
                chain, distances = _approach(
                    t, piece.geometry, [m for m in members if m != index]
                )
                found.append(
                    LimitContinuum(
                        piece.label,
                        piece.geometry,
                        fam.name,
                        chain,
                        tuple(t.pieces[m].param for m in chain),
                        distances,
                        LIMIT_SELF,
                        index,
                    )
                )
    for limit in found:
        if not limit.monotone:
            _LOGGER.warning(
                "Family %s does not approach its limit %s monotonically",
                limit.family,
                limit.label,
            )
    return found


def verify_limit(t: TruncatedCompactum, limit: LimitContinuum) -> bool:
    """Exact check of a witness: disjoint members, nonincreasing distances."""
    for a, b in itertools.combinations(limit.members, 2):
        if set_distance(t.pieces[a].geometry, t.pieces[b].geometry) == 0:
            return False
    for member, recorded in zip(limit.members, limit.distances):
        piece = t.pieces[member]
        target = piece.limit if limit.parametric else limit.geometry
        if hausdorff_distance(piece.geometry, target) != recorded:
            return False
    return len(limit.distances) == len(limit.members) and limit.monotone


def _approach(
    t: TruncatedCompactum, target: PieceGeometry, others: Sequence[int]
) -> Tuple[Tuple[int, ...], Tuple[Fraction, ...]]:
    """Pairwise disjoint pieces at strictly decreasing distance to target."""
    scored = sorted(
        ((hausdorff_distance(t.pieces[o].geometry, target), o) for o in others),
        key=lambda row: (-row[0], row[1]),
    )
    chain: List[int] = []
    distances: List[Fraction] = []
    touching = t.piece_graph
    for distance, other in scored:
        if distances and distance >= distances[-1]:
            continue
        if any(touching.has_edge(other, kept) for kept in chain):
            continue
        chain.append(other)
        distances.append(distance)
    return tuple(chain), tuple(distances)


def numeric_limit_scan(
    t: TruncatedCompactum, eps: Fraction, count: int
) -> List[LimitContinuum]:
    """Advisory search for undeclared limits among large family members."""
    eps = as_scalar(eps)
    if eps <= 0:
        raise InvalidScale(f"Scan epsilon must be positive, got {eps}")
    if count < 3:
        raise InvalidScale(f"Scan count must be at least 3, got {count}")
    large = [p.index for p in t.pieces if diameter(p.geometry) >= eps]
    large_set = set(large)
    found: List[LimitContinuum] = []
    for name, members in t.families.items():
        candidates = [m for m in members if m in large_set]
        if len(candidates) < count:
            continue
        best = None
        for anchor in large:
            chain, distances = _approach(
                t,
                t.pieces[anchor].geometry,
                [m for m in candidates if m != anchor],
            )
            if len(chain) < count:
                continue
            key = (-len(chain), distances[-1], anchor)
            if best is None or key < best[0]:
                best = (key, anchor, chain, distances)
        if best is None:
            continue
        _, anchor, chain, distances = best
        target = t.pieces[anchor]
        found.append(
            LimitContinuum(
                f"{name}->{target.label}",
                target.geometry,
                name,
                chain,
                tuple(t.pieces[m].param for m in chain),
                distances,
                LIMIT_SCAN,
                anchor,
            )
        )
    _LOGGER.debug("Limit scan at eps %s found %d candidates", eps, len(found))
    return found


# ---------------------------
# Theta configurations
# ---------------------------


@dataclass(frozen=True)
class ThetaWitness:
    """Two disjoint piece sets joined by three pairwise disjoint connectors."""

    x1: Tuple[int, ...]
    x2: Tuple[int, ...]
    connectors: Tuple[Tuple[int, ...], ...]

    def roles(self) -> Dict[str, Tuple[int, ...]]:
        roles = {"X1": self.x1, "X2": self.x2}
        roles.update({f"C{i + 1}": c for i, c in enumerate(self.connectors)})
        return roles

    def atoms(self, t: TruncatedCompactum) -> Dict[str, FrozenSet[int]]:
        return {role: t.atoms_of(pieces) for role, pieces in self.roles().items()}

    def labels(self, t: TruncatedCompactum) -> Dict[str, List[str]]:
        return {
            role: [t.pieces[i].label for i in pieces]
            for role, pieces in self.roles().items()
        }


def detect_theta(
    t: TruncatedCompactum, max_pieces: int = DEFAULT_MAX_PIECES
) -> Optional[ThetaWitness]:
    """Search connected piece sets of growing size for a theta configuration.

    Piece sets are bitmasks over piece indices; the second end set and the
    connectors are drawn only from sets through pieces that can still qualify.
    """
    graph = t.piece_graph
    everything = _mask(graph.nodes)
    for size in range(1, max_pieces + 1):
        sets = _connected_sets(graph, size)
        masks = [_mask(s) for s in sets]
        near = [_mask(_boundary(graph, s)) for s in sets]
        through: Dict[int, List[int]] = {}
        for index, s in enumerate(sets):
            for v in s:
                through.setdefault(v, []).append(index)
        roles = {i for i, m in enumerate(near) if m.bit_count() >= 3}
        for i in sorted(roles):
            closed = masks[i] | near[i]
            partners = sorted(
                {
                    j
                    for v in _members(everything & ~closed)
                    for j in through.get(v, ())
                    if j > i and j in roles and not masks[j] & closed
                }
            )
            for j in partners:
                used = masks[i] | masks[j]
                connectors = sorted(
                    {
                        c
                        for v in _members(near[i])
                        for c in through.get(v, ())
                        if not masks[c] & used and masks[c] & near[j]
                    }
                )
                trio = _disjoint_triple(connectors, masks, near)
                if trio is not None:
                    witness = ThetaWitness(
                        tuple(sorted(sets[i])),
                        tuple(sorted(sets[j])),
                        tuple(tuple(sorted(sets[c])) for c in trio),
                    )
                    _LOGGER.debug("Theta witness at size %d: %s", size, witness)
                    return witness
    return None


def _mask(pieces: Iterable[int]) -> int:
    mask = 0
    for v in pieces:
        mask |= 1 << v
    return mask


def _members(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _connected_sets(graph: nx.Graph, limit: int) -> List[FrozenSet[int]]:
    level = {frozenset([v]) for v in graph.nodes}
    found = set(level)
    for _ in range(limit - 1):
        grown = set()
        for s in level:
            for v in set().union(*(graph[u] for u in s)) - s:
                grown.add(s | {v})
        level = grown - found
        found |= level
    return sorted(found, key=lambda s: (len(s), sorted(s)))


def _boundary(graph: nx.Graph, s: FrozenSet[int]) -> FrozenSet[int]:
    return frozenset(set().union(*(graph[u] for u in s)) - s)


def _disjoint_triple(
    connectors: List[int], masks: List[int], near: List[int]
) -> Optional[Tuple[int, ...]]:
    for trio in itertools.combinations(connectors, 3):
        if all(
            not masks[a] & (masks[b] | near[b])
            for a, b in itertools.combinations(trio, 2)
        ):
            return trio
    return None


def verify_theta(t: TruncatedCompactum, witness: ThetaWitness) -> bool:
    """Re-check the disjointness pattern of a witness on atoms."""
    roles = witness.atoms(t)

    def meets(a: FrozenSet[int], b: FrozenSet[int]) -> bool:
        return bool(a & b) or any(n in b for u in a for n in t.graph[u])

    if any(not nx.is_connected(t.graph.subgraph(atoms)) for atoms in roles.values()):
        return False
    if meets(roles["X1"], roles["X2"]):
        return False
    chains = [roles["C1"], roles["C2"], roles["C3"]]
    if any(meets(a, b) for a, b in itertools.combinations(chains, 2)):
        return False
    return all(meets(c, roles["X1"]) and meets(c, roles["X2"]) for c in chains)


# ---------------------------
# Raster topology
# ---------------------------


class CellLabel(IntEnum):
    SET = 0
    BOUNDED_COMPLEMENT = 1
    UNBOUNDED_COMPLEMENT = 2


_FOUR = ndimage.generate_binary_structure(2, 1)
_EIGHT = ndimage.generate_binary_structure(2, 2)


@dataclass(frozen=True, eq=False)
class RasterDecomposition:
    """Labelled grid of half-open cells [col*delta, (col+1)*delta) x [...).

    ``labels`` is indexed [row, col] with row 0 at the bottom of the frame; cell
    coordinates exposed by the methods are global lattice indices.
    """

    delta: Fraction
    col0: int
    row0: int
    labels: np.ndarray

    @property
    def shape(self) -> Tuple[int, int]:
        return self.labels.shape

    def cell_of(self, x: Fraction, y: Fraction) -> Cell:
        return math.floor(x / self.delta), math.floor(y / self.delta)

    def cell_box(self, col: int, row: int) -> Part:
        d = self.delta
        return Part(col * d, row * d, (col + 1) * d, (row + 1) * d)

    def label_at(self, col: int, row: int) -> CellLabel:
        r, c = row - self.row0, col - self.col0
        if 0 <= r < self.labels.shape[0] and 0 <= c < self.labels.shape[1]:
            return CellLabel(int(self.labels[r, c]))
        return CellLabel.UNBOUNDED_COMPLEMENT

    def _cells(self, mask: np.ndarray) -> FrozenSet[Cell]:
        rows, cols = np.nonzero(mask)
        return frozenset(
            (int(c) + self.col0, int(r) + self.row0) for r, c in zip(rows, cols)
        )

    def cells(self, label: CellLabel) -> FrozenSet[Cell]:
        return self._cells(self.labels == label)

    def shielded_mask(self) -> np.ndarray:
        outside = ndimage.binary_dilation(
            self.labels == CellLabel.UNBOUNDED_COMPLEMENT, structure=_EIGHT
        )
        return (self.labels == CellLabel.SET) & ~outside

    @property
    def shielded(self) -> FrozenSet[Cell]:
        return self._cells(self.shielded_mask())

    def counts(self) -> Dict[str, int]:
        return {
            label.name: int(np.count_nonzero(self.labels == label))
            for label in CellLabel
        }


class UnshieldedVerdict(NamedTuple):
    unshielded: bool
    raster: RasterDecomposition
    witness: Optional[Cell]


def _frame(
    parts: Sequence[Part], delta: Fraction, padding: int
) -> Tuple[int, int, Tuple[int, int]]:
    cols = [math.floor(v / delta) for p in parts for v in (p.x0, p.x1)]
    rows = [math.floor(v / delta) for p in parts for v in (p.y0, p.y1)]
    col0, row0 = min(cols) - padding, min(rows) - padding
    shape = (max(rows) + padding - row0 + 1, max(cols) + padding - col0 + 1)
    return col0, row0, shape


def _paint(
    parts: Sequence[Part], delta: Fraction, col0: int, row0: int, shape: Tuple[int, int]
) -> np.ndarray:
    mask = np.zeros(shape, dtype=bool)
    for p in parts:
        c_lo = math.floor(p.x0 / delta) - col0
        c_hi = math.floor(p.x1 / delta) - col0
        r_lo = math.floor(p.y0 / delta) - row0
        r_hi = math.floor(p.y1 / delta) - row0
        mask[r_lo : r_hi + 1, c_lo : c_hi + 1] = True
    return mask


def _classify(mask: np.ndarray) -> np.ndarray:
    """Label complement regions; the frame corner is always outside."""
    regions, _ = ndimage.label(~mask, structure=_FOUR)
    outside = regions[0, 0]
    labels = np.full(mask.shape, CellLabel.SET, dtype=np.int8)
    labels[regions != 0] = CellLabel.BOUNDED_COMPLEMENT
    labels[regions == outside] = CellLabel.UNBOUNDED_COMPLEMENT
    return labels


def rasterize(
    parts: Sequence[Part], delta: Fraction, padding: int = DEFAULT_RASTER_PADDING
) -> RasterDecomposition:
    delta = as_scalar(delta)
    if delta <= 0:
        raise InvalidScale(f"Raster delta must be positive, got {delta}")
    if padding < 1:
        raise InvalidScale("Raster frame needs at least one cell of padding")
    col0, row0, shape = _frame(parts, delta, padding)
    labels = _classify(_paint(parts, delta, col0, row0, shape))
    return RasterDecomposition(delta, col0, row0, labels)


def min_feature_gap(t: TruncatedCompactum) -> Optional[Fraction]:
    """Smallest positive distance between two pieces."""
    gaps = [
        gap
        for a, b in itertools.combinations(t.pieces, 2)
        if (gap := set_distance(a.geometry, b.geometry)) > 0
    ]
    return min(gaps, default=None)


def check_unshielded(t: TruncatedCompactum, delta: Fraction) -> UnshieldedVerdict:
    """Decide unshieldedness at resolution delta.

    The witness is the shielded cell deepest inside the bounded part of the
    picture (chessboard distance to the unbounded complement).
    """
    delta = as_scalar(delta)
    gap = min_feature_gap(t)
    if gap is not None and delta > gap / 2:
        _LOGGER.warning(
            "Raster delta %s exceeds half the minimal feature gap %s of %s",
            delta,
            gap,
            t.spec.name,
        )
    raster = rasterize([part for p in t.pieces for part in p.geometry.parts], delta)
    shielded = raster.shielded_mask()
    if not shielded.any():
        return UnshieldedVerdict(True, raster, None)
    depth = ndimage.distance_transform_cdt(
        raster.labels != CellLabel.UNBOUNDED_COMPLEMENT, metric="chessboard"
    )
    flat = int(np.argmax(np.where(shielded, depth, -1)))
    row, col = np.unravel_index(flat, shielded.shape)
    witness = (int(col) + raster.col0, int(row) + raster.row0)
    _LOGGER.debug("%s is shielded at delta %s, witness cell %s", t.spec.name, delta, witness)
    return UnshieldedVerdict(False, raster, witness)


def raster_cells(parts: Sequence[Part], delta: Fraction) -> FrozenSet[Cell]:
    raster_delta = as_scalar(delta)
    if raster_delta <= 0:
        raise InvalidScale(f"Raster delta must be positive, got {raster_delta}")
    col0, row0, shape = _frame(parts, raster_delta, 1)
    mask = _paint(parts, raster_delta, col0, row0, shape)
    rows, cols = np.nonzero(mask)
    return frozenset((int(c) + col0, int(r) + row0) for r, c in zip(rows, cols))


def fill_cells(cells: Iterable[Cell]) -> FrozenSet[Cell]:
    """Cells plus every complement cell they enclose."""
    cells = frozenset(cells)
    if not cells:
        return cells
    col0 = min(c for c, _ in cells) - 1
    row0 = min(r for _, r in cells) - 1
    shape = (
        max(r for _, r in cells) - row0 + 2,
        max(c for c, _ in cells) - col0 + 2,
    )
    mask = np.zeros(shape, dtype=bool)
    for col, row in cells:
        mask[row - row0, col - col0] = True
    labels = _classify(mask)
    rows, cols = np.nonzero(labels != CellLabel.UNBOUNDED_COMPLEMENT)
    return frozenset((int(c) + col0, int(r) + row0) for r, c in zip(rows, cols))


def raster_hull(
    t: TruncatedCompactum, atomset: Iterable[int], delta: Fraction
) -> FrozenSet[Cell]:
    atoms = sorted(set(atomset))
    if not atoms:
        raise FSModelError("Hull needs a non-empty atom set")
    if not nx.is_connected(t.graph.subgraph(atoms)):
        raise FSModelError("Hull needs a connected atom set")
    return fill_cells(raster_cells([t.atoms[a].part for a in atoms], delta))


# ---------------------------
# Irreducible chains
# ---------------------------


def irreducible_chain(
    t: TruncatedCompactum, a: Iterable[int], b: Iterable[int]
) -> Tuple[int, ...]:
    """Shortest atom chain from a to b, preferring the smallest atom ids."""
    a, b = frozenset(a), frozenset(b)
    if not a or not b:
        raise FSModelError("Chain endpoints must be non-empty atom sets")
    if a & b:
        raise FSModelError("Chain endpoints must be disjoint")
    graph = t.graph
    to_b = nx.multi_source_dijkstra_path_length(graph, b)
    reach = [to_b[x] for x in a if x in to_b]
    if not reach:
        raise NoConnection("Atom sets lie in different components")
    length = min(reach)
    if length == 1:
        start = min(x for x in a if to_b.get(x) == 1)
        return start, min(y for y in graph[start] if y in b)

    step = min(
        x
        for x in graph.nodes
        if to_b.get(x) == length - 1 and x not in a and any(n in a for n in graph[x])
    )
    chain = [min(n for n in graph[step] if n in a), step]
    while to_b[chain[-1]] > 0:
        here = chain[-1]
        chain.append(min(n for n in graph[here] if to_b.get(n) == to_b[here] - 1))
    return tuple(chain)


def _connects(
    t: TruncatedCompactum, atoms: Iterable[int], a: FrozenSet[int], b: FrozenSet[int]
) -> bool:
    sub = t.graph.subgraph(atoms)
    return any(comp & a and comp & b for comp in map(set, nx.connected_components(sub)))


def is_irreducible(
    t: TruncatedCompactum, chain: Iterable[int], a: Iterable[int], b: Iterable[int]
) -> bool:
    """Connected between a and b, and no single atom can be dropped."""
    chain, a, b = set(chain), frozenset(a), frozenset(b)
    if not _connects(t, chain, a, b):
        return False
    return all(not _connects(t, chain - {x}, a, b) for x in chain)
