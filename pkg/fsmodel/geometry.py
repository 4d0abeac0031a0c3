"""Exact rational planar geometry in the L-infinity metric."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import networkx as nx
import numpy as np

from .errors import InvalidPiece, InvalidScale, MarkerOffGeometry

Scalar = Fraction

SEG = "seg"
BOX = "box"

_ZERO = Fraction(0)
_ROW_CHUNK = 1024
_INT64_SAFE = 2**62


def as_scalar(value: Union[int, str, Fraction]) -> Fraction:
    """Coerce to an exact rational; floats are rejected."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError(f"Refusing inexact coordinate {value!r}")
    return Fraction(value)


def format_scalar(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True, order=True)
class Point:
    x: Fraction
    y: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", as_scalar(self.x))
        object.__setattr__(self, "y", as_scalar(self.y))

    def __str__(self) -> str:
        return f"({format_scalar(self.x)}, {format_scalar(self.y)})"


@dataclass(frozen=True, order=True)
class Part:
    """Closed axis-aligned rectangle; segments and points are degenerate ones."""

    x0: Fraction
    y0: Fraction
    x1: Fraction
    y1: Fraction
    kind: str = BOX

    def __post_init__(self) -> None:
        for name in ("x0", "y0", "x1", "y1"):
            object.__setattr__(self, name, as_scalar(getattr(self, name)))
        if self.x0 > self.x1 or self.y0 > self.y1:
            raise InvalidPiece(f"Part has inverted bounds: {self}")
        if self.kind not in (SEG, BOX):
            raise InvalidPiece(f"Unknown part kind {self.kind!r}")
        if self.kind == SEG and self.x0 != self.x1 and self.y0 != self.y1:
            raise InvalidPiece(f"Segment {self} is not axis-aligned")

    @classmethod
    def segment(cls, a: Point, b: Point) -> Part:
        if a.x != b.x and a.y != b.y:
            raise InvalidPiece(f"Segment {a}-{b} is not axis-aligned")
        return cls(min(a.x, b.x), min(a.y, b.y), max(a.x, b.x), max(a.y, b.y), SEG)

    @classmethod
    def box(cls, a: Point, b: Point) -> Part:
        return cls(min(a.x, b.x), min(a.y, b.y), max(a.x, b.x), max(a.y, b.y), BOX)

    @classmethod
    def point(cls, p: Point) -> Part:
        return cls(p.x, p.y, p.x, p.y, SEG)

    def __str__(self) -> str:
        lo = Point(self.x0, self.y0)
        hi = Point(self.x1, self.y1)
        return f"{self.kind} {lo} {hi}"

    @property
    def width(self) -> Fraction:
        return self.x1 - self.x0

    @property
    def height(self) -> Fraction:
        return self.y1 - self.y0

    @property
    def diameter(self) -> Fraction:
        return max(self.width, self.height)

    @property
    def is_point(self) -> bool:
        return self.x0 == self.x1 and self.y0 == self.y1

    @property
    def corners(self) -> tuple[Point, ...]:
        return tuple(
            sorted({Point(x, y) for x in (self.x0, self.x1) for y in (self.y0, self.y1)})
        )

    def contains_xy(self, x: Fraction, y: Fraction) -> bool:
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1

    def contains(self, other: Part) -> bool:
        return (
            self.x0 <= other.x0
            and other.x1 <= self.x1
            and self.y0 <= other.y0
            and other.y1 <= self.y1
        )

    def distance(self, other: Part) -> Fraction:
        gap_x = max(_ZERO, other.x0 - self.x1, self.x0 - other.x1)
        gap_y = max(_ZERO, other.y0 - self.y1, self.y0 - other.y1)
        return max(gap_x, gap_y)

    def point_distance(self, x: Fraction, y: Fraction) -> Fraction:
        gap_x = max(_ZERO, x - self.x1, self.x0 - x)
        gap_y = max(_ZERO, y - self.y1, self.y0 - y)
        return max(gap_x, gap_y)

    def intersection(self, other: Part) -> Part | None:
        x0, x1 = max(self.x0, other.x0), min(self.x1, other.x1)
        y0, y1 = max(self.y0, other.y0), min(self.y1, other.y1)
        if x0 > x1 or y0 > y1:
            return None
        kind = BOX if (x0 < x1 and y0 < y1) else SEG
        return Part(x0, y0, x1, y1, kind)

    def expanded(self, t: Fraction) -> Part:
        return Part(self.x0 - t, self.y0 - t, self.x1 + t, self.y1 + t, BOX)


@dataclass(frozen=True)
class PieceGeometry:
    """Finite union of parts."""

    parts: tuple[Part, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "parts", tuple(self.parts))
        if not self.parts:
            raise InvalidPiece("Geometry needs at least one part")

    @classmethod
    def of(cls, *parts: Part) -> PieceGeometry:
        return cls(tuple(parts))

    @property
    def bounds(self) -> Part:
        return bounding_box(self.parts)

    @property
    def connected(self) -> bool:
        return is_connected(self.parts)

    def union(self, other: PieceGeometry) -> PieceGeometry:
        return PieceGeometry(self.parts + other.parts)

    def __str__(self) -> str:
        return " ".join(str(part) for part in self.parts)


@dataclass(frozen=True)
class Atom:
    """Small connected cell of a truncation."""

    id: int
    geometry: PieceGeometry
    parent_piece: int

    @property
    def part(self) -> Part:
        return self.geometry.parts[0]


GeometryLike = Union[PieceGeometry, Part, Sequence[Part]]


def _as_parts(g: GeometryLike) -> tuple[Part, ...]:
    if isinstance(g, PieceGeometry):
        return g.parts
    if isinstance(g, Part):
        return (g,)
    return tuple(g)


def bounding_box(parts: Iterable[Part]) -> Part:
    parts = tuple(parts)
    return Part(
        min(p.x0 for p in parts),
        min(p.y0 for p in parts),
        max(p.x1 for p in parts),
        max(p.y1 for p in parts),
        BOX,
    )


# ---------------------------
# Metric
# ---------------------------


def set_distance(a: GeometryLike, b: GeometryLike) -> Fraction:
    """Minimal L-infinity distance between two closed sets."""
    return min(p.distance(q) for p in _as_parts(a) for q in _as_parts(b))


def diameter(a: GeometryLike) -> Fraction:
    # The L-infinity diameter of a union of rectangles is the longer side of its
    # bounding box.
    return bounding_box(_as_parts(a)).diameter


def hausdorff_distance(a: GeometryLike, b: GeometryLike) -> Fraction:
    parts_a, parts_b = _as_parts(a), _as_parts(b)
    return max(_directed(parts_a, parts_b), _directed(parts_b, parts_a))


def _directed(source: Sequence[Part], target: Sequence[Part]) -> Fraction:
    return max(_directed_part(part, target) for part in source)


def _directed_part(a: Part, target: Sequence[Part]) -> Fraction:
    if len(target) == 1:
        # distance to a rectangle is convex, so the worst point is a corner
        only = target[0]
        return max(only.point_distance(c.x, c.y) for c in a.corners)
    candidates = _hausdorff_candidates(a, target)
    lo, hi = 0, len(candidates) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if covers(a, [part.expanded(candidates[mid]) for part in target]):
            hi = mid
        else:
            lo = mid + 1
    return candidates[lo]


def _hausdorff_candidates(a: Part, target: Sequence[Part]) -> list[Fraction]:
    xs = {a.x0, a.x1}.union(*({p.x0, p.x1} for p in target))
    ys = {a.y0, a.y1}.union(*({p.y0, p.y1} for p in target))
    values = {_ZERO}
    for coords in (xs, ys):
        for u, v in itertools.combinations(sorted(coords), 2):
            values.add(v - u)
            values.add((v - u) / 2)
    return sorted(values)


def covers(target: Part, parts: Sequence[Part]) -> bool:
    """Exact test that the union of parts contains target."""
    near = [p for p in parts if p.distance(target) == 0]
    if not near:
        return False
    xs = _samples(target.x0, target.x1, (v for p in near for v in (p.x0, p.x1)))
    ys = _samples(target.y0, target.y1, (v for p in near for v in (p.y0, p.y1)))
    return all(any(p.contains_xy(x, y) for p in near) for x in xs for y in ys)


def _samples(lo: Fraction, hi: Fraction, cuts: Iterable[Fraction]) -> list[Fraction]:
    values = sorted({lo, hi, *(c for c in cuts if lo < c < hi)})
    return values + [(u + v) / 2 for u, v in zip(values, values[1:])]


def union_covers(target: GeometryLike, parts: GeometryLike) -> bool:
    pool = _as_parts(parts)
    return all(covers(part, pool) for part in _as_parts(target))


# ---------------------------
# Connectivity
# ---------------------------


def lattice(parts: Sequence[Part]) -> tuple[int, np.ndarray]:
    """Scale part bounds to a shared integer lattice.

    Returns the scale and an (n, 4) array of x0, y0, x1, y1. Falls back to an object
    array when the integers would not fit comfortably in int64.
    """
    coords = [(p.x0, p.y0, p.x1, p.y1) for p in parts]
    scale = math.lcm(*(v.denominator for row in coords for v in row)) if coords else 1
    rows = [[v.numerator * (scale // v.denominator) for v in row] for row in coords]
    biggest = max((abs(v) for row in rows for v in row), default=0)
    dtype = np.int64 if biggest < _INT64_SAFE else object
    return scale, np.array(rows, dtype=dtype).reshape(len(rows), 4)


def touching_pairs(parts: Sequence[Part]) -> list[tuple[int, int]]:
    """Index pairs i < j of parts at distance zero, in lexicographic order."""
    if len(parts) < 2:
        return []
    _, bounds = lattice(parts)
    x0, y0, x1, y1 = (bounds[:, i] for i in range(4))
    pairs: list[tuple[int, int]] = []
    for start in range(0, len(parts), _ROW_CHUNK):
        stop = min(start + _ROW_CHUNK, len(parts))
        hit = (
            (x0[start:stop, None] <= x1[None, :])
            & (x0[None, :] <= x1[start:stop, None])
            & (y0[start:stop, None] <= y1[None, :])
            & (y0[None, :] <= y1[start:stop, None])
        )
        rows, cols = np.nonzero(np.asarray(hit, dtype=bool))
        rows = rows + start
        keep = rows < cols
        pairs.extend(zip(rows[keep].tolist(), cols[keep].tolist()))
    return pairs


def is_connected(parts: GeometryLike) -> bool:
    parts = _as_parts(parts)
    if not parts:
        return False
    graph = nx.Graph()
    graph.add_nodes_from(range(len(parts)))
    graph.add_edges_from(touching_pairs(parts))
    return nx.is_connected(graph)


# ---------------------------
# Subdivision
# ---------------------------


def subdivide(
    g: GeometryLike,
    delta: Fraction,
    markers: Iterable[Point] = (),
    *,
    start_id: int = 0,
    piece: int = 0,
) -> list[Atom]:
    """Cut g into atoms of diameter at most delta, also splitting at markers.

    Cuts fall on the global lattice of multiples of delta so atoms of different
    pieces line up.
    """
    parts = _as_parts(g)
    delta = as_scalar(delta)
    if delta <= 0:
        raise InvalidScale(f"Atom granularity must be positive, got {delta}")
    markers = tuple(markers)
    for marker in markers:
        if not any(p.contains_xy(marker.x, marker.y) for p in parts):
            raise MarkerOffGeometry(f"Marker {marker} is not on the geometry")

    atoms: list[Atom] = []
    for part in parts:
        on_part = [m for m in markers if part.contains_xy(m.x, m.y)]
        xs = _cuts(part.x0, part.x1, delta, (m.x for m in on_part))
        ys = _cuts(part.y0, part.y1, delta, (m.y for m in on_part))
        for ya, yb in _spans(ys):
            for xa, xb in _spans(xs):
                cell = Part(xa, ya, xb, yb, part.kind)
                atoms.append(
                    Atom(start_id + len(atoms), PieceGeometry((cell,)), piece)
                )
    return atoms


def _cuts(
    lo: Fraction, hi: Fraction, delta: Fraction, extra: Iterable[Fraction]
) -> list[Fraction]:
    cuts = {lo, hi}
    first = math.floor(lo / delta) + 1
    last = math.ceil(hi / delta) - 1
    cuts.update(i * delta for i in range(first, last + 1))
    cuts.update(v for v in extra if lo < v < hi)
    return sorted(cuts)


def _spans(cuts: list[Fraction]) -> list[tuple[Fraction, Fraction]]:
    if len(cuts) == 1:
        return [(cuts[0], cuts[0])]
    return list(zip(cuts, cuts[1:]))
