"""Closed equivalence relations on truncations and their quotients."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, List, NamedTuple, Optional, Sequence, Set, Tuple

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .analysis import LimitContinuum, declared_limits, piece_element
from .cdl import LIMIT_CONTINUUM, PARAM_DYADIC, TruncatedCompactum
from .const import (
    DEFAULT_MIN_TAIL,
    DEFAULT_TAIL_FRACTION,
    RELATION_COMP,
    RELATION_FS,
    RELATION_H,
    RELATION_IDENTITY,
    RELATION_PHI,
)
from .errors import (
    ConfigError,
    FSModelError,
    InvalidScale,
    NonCoveredCollapse,
    UniverseMismatch,
)
from .geometry import (
    Part,
    PieceGeometry,
    as_scalar,
    set_distance,
    touching_pairs,
    union_covers,
)

_LOGGER = logging.getLogger(__name__)

RULE_CONNECTIVITY = "connectivity"
RULE_LIMIT = "limit"
RULE_MANUAL = "manual"

RELATION_CUSTOM = "custom"


@dataclass(frozen=True)
class Merge:
    round: int
    rule: str
    source: str
    classes: Tuple[int, int]
    heuristic: bool = False


@dataclass(frozen=True)
class ClosureRound:
    index: int
    rule: str
    merges: int


@dataclass(frozen=True)
class ClosureRules:
    """Limit-closure settings for the fixpoint loop."""

    limit_closure: bool = True
    tail_fraction: Fraction = DEFAULT_TAIL_FRACTION
    min_tail: int = DEFAULT_MIN_TAIL


# ---------------------------
# Partition
# ---------------------------


class Partition:
    """Union-find over atom ids with per-class geometry and a closure trace.

    Class ids are the smallest atom of the class. A partition is mutable until
    ``freeze`` is called.
    """

    def __init__(self, universe: Sequence[Part], name: str = RELATION_CUSTOM) -> None:
        self.universe: Tuple[Part, ...] = tuple(universe)
        self.name = name
        self.truncation: Optional[TruncatedCompactum] = None
        self.trace: List[ClosureRound] = []
        self.provenance: List[Merge] = []
        size = len(self.universe)
        self._parent = list(range(size))
        self._rank = [0] * size
        self._least = list(range(size))
        self._members: Dict[int, List[int]] = {a: [a] for a in range(size)}
        self._parts: Dict[int, List[Part]] = {
            a: [part] for a, part in enumerate(self.universe)
        }
        self._stage: Dict[int, int] = {}
        self._frozen = False

    @classmethod
    def identity(
        cls, t: TruncatedCompactum, name: str = RELATION_IDENTITY
    ) -> Partition:
        partition = cls(t.universe, name)
        partition.truncation = t
        return partition

    @classmethod
    def from_classes(
        cls,
        universe: Sequence[Part],
        classes: Iterable[Iterable[int]],
        name: str = RELATION_CUSTOM,
    ) -> Partition:
        partition = cls(universe, name)
        for members in classes:
            members = list(members)
            for atom in members[1:]:
                partition.union(members[0], atom)
        return partition

    @classmethod
    def from_labels(
        cls, universe: Sequence[Part], labels: Sequence[int], name: str = RELATION_CUSTOM
    ) -> Partition:
        if len(labels) != len(universe):
            raise UniverseMismatch(
                f"{len(labels)} labels for a universe of {len(universe)} atoms"
            )
        partition = cls(universe, name)
        for atom, label in enumerate(labels):
            if not 0 <= label < len(universe):
                raise FSModelError(f"Atom {atom} has class {label} outside the universe")
            partition.union(atom, label)
        return partition

    def __len__(self) -> int:
        return len(self._members)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return self.universe == other.universe and self.labels() == other.labels()

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"Partition({self.name!r}, atoms={len(self.universe)}, classes={len(self)})"

    @property
    def frozen(self) -> bool:
        return self._frozen

    def freeze(self) -> Partition:
        self._frozen = True
        return self

    def copy(self, name: Optional[str] = None) -> Partition:
        clone = Partition.from_labels(self.universe, self.labels(), name or self.name)
        clone.truncation = self.truncation
        clone.trace = list(self.trace)
        clone.provenance = list(self.provenance)
        clone._stage = {clone.find(a): s for a, s in self._stage.items()}
        return clone

    # --------- union-find ----------

    def find(self, atom: int) -> int:
        root = atom
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[atom] != root:
            self._parent[atom], atom = root, self._parent[atom]
        return root

    def union(
        self,
        a: int,
        b: int,
        *,
        rule: str = RULE_MANUAL,
        source: str = "",
        round_index: int = 0,
        heuristic: bool = False,
    ) -> bool:
        if self._frozen:
            raise FSModelError(f"Partition {self.name!r} is frozen")
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        merge = Merge(
            round_index, rule, source, (self._least[ra], self._least[rb]), heuristic
        )
        if self._rank[ra] < self._rank[rb]:
            ra, rb = rb, ra
        self._parent[rb] = ra
        if self._rank[ra] == self._rank[rb]:
            self._rank[ra] += 1
        self._members[ra].extend(self._members.pop(rb))
        self._parts[ra].extend(self._parts.pop(rb))
        self._least[ra] = min(self._least[ra], self._least[rb])
        self._stage.pop(rb, None)
        self._stage[ra] = round_index
        self.provenance.append(merge)
        return True

    # --------- queries ----------

    def class_of(self, atom: int) -> int:
        return self._least[self.find(atom)]

    def members(self, class_id: int) -> Tuple[int, ...]:
        return tuple(sorted(self._members[self.find(class_id)]))

    def geometry(self, class_id: int) -> PieceGeometry:
        return PieceGeometry(tuple(self._parts[self.find(class_id)]))

    def classes(self) -> List[Tuple[int, ...]]:
        found = [tuple(sorted(members)) for members in self._members.values()]
        return sorted(found)

    def merged_classes(self) -> List[Tuple[int, ...]]:
        return [members for members in self.classes() if len(members) > 1]

    def labels(self) -> Tuple[int, ...]:
        return tuple(self.class_of(a) for a in range(len(self.universe)))

    def stage_of(self, class_id: int) -> int:
        """Last closure round in which the class grew; 0 for untouched classes."""
        return self._stage.get(self.find(class_id), 0)

    # --------- serialization ----------

    def to_json(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "atoms": len(self.universe),
            "classes": {str(a): label for a, label in enumerate(self.labels())},
            "trace": [
                {"round": r.index, "rule": r.rule, "merges": r.merges}
                for r in self.trace
            ],
            "provenance": [
                {
                    "round": m.round,
                    "rule": m.rule,
                    "source": m.source,
                    "classes": list(m.classes),
                    "heuristic": m.heuristic,
                }
                for m in self.provenance
            ],
        }

    @classmethod
    def from_json(
        cls, data: Dict[str, Any], universe: Sequence[Part]
    ) -> Partition:
        try:
            mapping = {int(k): int(v) for k, v in data["classes"].items()}
            labels = [mapping[a] for a in range(len(universe))]
        except (KeyError, TypeError, ValueError) as err:
            raise UniverseMismatch(
                f"Partition does not cover the atom universe: {err}"
            ) from err
        if len(mapping) != len(universe):
            raise UniverseMismatch(
                f"Partition has {len(mapping)} atoms, universe has {len(universe)}"
            )
        partition = cls.from_labels(universe, labels, data.get("name", RELATION_CUSTOM))
        partition.trace = [
            ClosureRound(r["round"], r["rule"], r["merges"]) for r in data.get("trace", [])
        ]
        return partition


# ---------------------------
# Closure loop
# ---------------------------


def _truncation_of(p: Partition) -> TruncatedCompactum:
    if p.truncation is None:
        raise FSModelError(f"Partition {p.name!r} is not attached to a truncation")
    return p.truncation


def _collapse_atoms(t: TruncatedCompactum, element: LimitContinuum) -> Tuple[int, ...]:
    if element.anchor is not None:
        return t.piece_atoms[element.anchor]
    atoms = t.atoms_within(element.geometry)
    if not atoms or not union_covers(
        element.geometry, [t.atoms[a].part for a in atoms]
    ):
        raise NonCoveredCollapse(f"{element.label} is not covered by atoms")
    return atoms


def _elements(
    t: TruncatedCompactum, collapse: Iterable[LimitContinuum]
) -> List[Tuple[LimitContinuum, Tuple[int, ...]]]:
    return [(e, _collapse_atoms(t, e)) for e in collapse if e.nondegenerate]


def _tail(element: LimitContinuum, rules: ClosureRules) -> Tuple[int, ...]:
    start = int(len(element.members) * rules.tail_fraction)
    tail = element.members[start:]
    return tail if len(tail) >= rules.min_tail else ()


def _limit_targets(
    t: TruncatedCompactum,
    labels: Sequence[int],
    element: LimitContinuum,
    atoms: Tuple[int, ...],
    rules: ClosureRules,
) -> List[int]:
    """Classes meeting every tail member and adjacent to the element's class."""
    tail = _tail(element, rules)
    if not tail:
        return []
    anchor = labels[atoms[0]]
    persistent = set.intersection(
        *({labels[a] for a in t.piece_atoms[m]} for m in tail)
    )
    persistent.discard(anchor)
    if not persistent:
        return []
    adjacent = {
        labels[n]
        for a, label in enumerate(labels)
        if label == anchor
        for n in t.graph[a]
    }
    return sorted(persistent & adjacent)


def close(
    p: Partition,
    collapse: Iterable[LimitContinuum],
    rules: Optional[ClosureRules] = None,
) -> int:
    """Run the closure loop to its fixpoint and return the number of merges."""
    t = _truncation_of(p)
    rules = rules or ClosureRules()
    elements = _elements(t, collapse)
    round_index = len(p.trace)

    count = 0
    for element, atoms in elements:
        for atom in atoms[1:]:
            count += p.union(
                atoms[0],
                atom,
                rule=RULE_CONNECTIVITY,
                source=element.label,
                round_index=round_index,
            )
    for (e1, a1), (e2, a2) in itertools.combinations(elements, 2):
        if set_distance(e1.geometry, e2.geometry) == 0:
            count += p.union(
                a1[0],
                a2[0],
                rule=RULE_CONNECTIVITY,
                source=f"{e1.label}+{e2.label}",
                round_index=round_index,
            )
    p.trace.append(ClosureRound(round_index, RULE_CONNECTIVITY, count))
    total = count

    while rules.limit_closure:
        round_index += 1
        labels = p.labels()
        planned = [
            (atoms[0], target, element.label)
            for element, atoms in elements
            for target in _limit_targets(t, labels, element, atoms, rules)
        ]
        count = sum(
            p.union(
                a,
                b,
                rule=RULE_LIMIT,
                source=source,
                round_index=round_index,
                heuristic=True,
            )
            for a, b, source in planned
        )
        p.trace.append(ClosureRound(round_index, RULE_LIMIT, count))
        total += count
        if not count:
            break

    _LOGGER.debug(
        "Closed %s under %d elements: %d merges in %d rounds",
        p.name,
        len(elements),
        total,
        len(p.trace),
    )
    return total


def is_closed_under(
    p: Partition,
    collapse: Iterable[LimitContinuum],
    rules: Optional[ClosureRules] = None,
) -> bool:
    """Respects the collapse family, has connected classes, is limit-stable."""
    t = _truncation_of(p)
    rules = rules or ClosureRules()
    labels = p.labels()
    elements = _elements(t, collapse)
    for _, atoms in elements:
        if len({labels[a] for a in atoms}) > 1:
            return False
    for (e1, a1), (e2, a2) in itertools.combinations(elements, 2):
        if set_distance(e1.geometry, e2.geometry) == 0 and labels[a1[0]] != labels[a2[0]]:
            return False
    for members in p.classes():
        if not nx.is_connected(t.graph.subgraph(members)):
            return False
    if rules.limit_closure:
        for element, atoms in elements:
            if _limit_targets(t, labels, element, atoms, rules):
                return False
    return True


def finest_relation(
    t: TruncatedCompactum,
    collapse: Iterable[LimitContinuum],
    rules: Optional[ClosureRules] = None,
    name: str = RELATION_CUSTOM,
) -> Partition:
    partition = Partition.identity(t, name)
    close(partition, collapse, rules)
    return partition.freeze()


# ---------------------------
# Named relations
# ---------------------------


def fs_relation(t: TruncatedCompactum) -> Partition:
    collapse = [limit for limit in declared_limits(t) if limit.nondegenerate]
    return finest_relation(t, collapse, name=RELATION_FS)


def comp_relation(t: TruncatedCompactum) -> Partition:
    """fs applied inside each connected component of the atom graph."""
    owner: Dict[int, int] = {}
    for index, component in enumerate(t.components):
        owner.update(dict.fromkeys(component, index))
    collapse = []
    for limit in declared_limits(t):
        if not limit.nondegenerate:
            continue
        home = owner[_collapse_atoms(t, limit)[0]]
        inside = [m for m in limit.members if owner[t.piece_atoms[m][0]] == home]
        if len(inside) >= 2:
            collapse.append(limit.restricted(inside))
    return finest_relation(t, collapse, name=RELATION_COMP)


def h_relation(t: TruncatedCompactum) -> Partition:
    collapse = [
        limit
        for limit in declared_limits(t)
        if limit.kind == LIMIT_CONTINUUM and limit.nondegenerate
    ]
    return finest_relation(t, collapse, name=RELATION_H)


def phi_relation(t: TruncatedCompactum, n: int) -> Partition:
    """Collapse every dyadic family member whose denominator exceeds n."""
    collapse = [
        piece_element(t, index)
        for fam in t.spec.families
        if fam.param.kind == PARAM_DYADIC
        for index in t.family_members(fam.name)
        if t.pieces[index].param.denominator > n
    ]
    return finest_relation(
        t,
        collapse,
        ClosureRules(limit_closure=False),
        name=f"{RELATION_PHI}:{n}",
    )


def phi_chain(t: TruncatedCompactum, n_max: int) -> List[Partition]:
    return [phi_relation(t, n) for n in range(1, n_max + 1)]


def named_relation(t: TruncatedCompactum, name: str) -> Partition:
    if name == RELATION_IDENTITY:
        return Partition.identity(t).freeze()
    if name == RELATION_FS:
        return fs_relation(t)
    if name == RELATION_COMP:
        return comp_relation(t)
    if name == RELATION_H:
        return h_relation(t)
    head, sep, tail = name.partition(":")
    if head == RELATION_PHI and sep:
        try:
            n = int(tail)
        except ValueError as err:
            raise ConfigError(f"Malformed relation {name!r}: {err}") from err
        if n < 1:
            raise ConfigError(f"Relation {name!r} needs N >= 1")
        return phi_relation(t, n)
    raise ConfigError(f"Unknown relation {name!r}")


# ---------------------------
# Lattice operations
# ---------------------------


def _same_universe(p1: Partition, p2: Partition) -> None:
    if p1.universe is not p2.universe and p1.universe != p2.universe:
        raise UniverseMismatch(f"{p1.name!r} and {p2.name!r} partition different atoms")


def refines(p1: Partition, p2: Partition) -> bool:
    """True iff every p1-class lies inside a p2-class."""
    _same_universe(p1, p2)
    coarse = p2.labels()
    return all(len({coarse[a] for a in members}) == 1 for members in p1.classes())


def meet(p1: Partition, p2: Partition) -> Partition:
    _same_universe(p1, p2)
    groups: Dict[Tuple[int, int], List[int]] = {}
    for atom, key in enumerate(zip(p1.labels(), p2.labels())):
        groups.setdefault(key, []).append(atom)
    result = Partition.from_classes(p1.universe, groups.values(), f"{p1.name}&{p2.name}")
    result.truncation = p1.truncation
    return result.freeze()


def join(p1: Partition, p2: Partition) -> Partition:
    _same_universe(p1, p2)
    result = Partition.from_labels(p1.universe, p1.labels(), f"{p1.name}|{p2.name}")
    for members in p2.merged_classes():
        for atom in members[1:]:
            result.union(members[0], atom)
    result.truncation = p1.truncation
    return result.freeze()


def compare(p1: Partition, p2: Partition) -> str:
    finer, coarser = refines(p1, p2), refines(p2, p1)
    if finer and coarser:
        return "equal"
    if finer:
        return "finer"
    if coarser:
        return "coarser"
    return "incomparable"


def class_projection(fine: Partition, coarse: Partition) -> Dict[int, int]:
    """Factor map from fine classes to the coarse classes containing them."""
    if not refines(fine, coarse):
        raise FSModelError(f"{fine.name!r} does not refine {coarse.name!r}")
    labels = coarse.labels()
    return {members[0]: labels[members[0]] for members in fine.classes()}


def monotone_preimage_components(
    t: TruncatedCompactum, p: Partition, class_ids: Iterable[int]
) -> int:
    atoms = [a for c in set(class_ids) for a in p.members(c)]
    return nx.number_connected_components(t.graph.subgraph(atoms))


def class_graph(p: Partition) -> nx.Graph:
    """Classes as nodes, joined when their geometries touch."""
    labels = p.labels()
    graph = nx.Graph()
    graph.add_nodes_from(members[0] for members in p.classes())
    if p.truncation is not None:
        edges = p.truncation.graph.edges
    else:
        edges = touching_pairs(p.universe)
    graph.add_edges_from(
        (labels[a], labels[b]) for a, b in edges if labels[a] != labels[b]
    )
    return graph


class CollapseVerdict(NamedTuple):
    passed: bool
    limit: Optional[str]
    classes: Tuple[int, ...]


def verify_collapse(t: TruncatedCompactum, p: Partition) -> CollapseVerdict:
    """Every nondegenerate declared limit must be a single class."""
    for limit in declared_limits(t):
        if not limit.nondegenerate:
            continue
        split = sorted({p.class_of(a) for a in _collapse_atoms(t, limit)})
        if len(split) > 1:
            return CollapseVerdict(False, limit.label, tuple(split))
    return CollapseVerdict(True, None, ())


# ---------------------------
# Quotient metric
# ---------------------------


@dataclass(frozen=True, eq=False)
class QuotientMetric:
    """Shortest-path pseudo-metric with free hops inside classes.

    ``table`` holds distances between contracted nodes scaled by ``scale``;
    atoms in different components have no finite distance. ``reach`` is half
    the diameter of an atom left alone in its class and 0 for collapsed atoms.
    """

    partition: Partition
    node_of: Tuple[int, ...]
    scale: int
    reach: Tuple[Fraction, ...]
    table: np.ndarray = field(repr=False)

    def distance(self, a: int, b: int) -> Optional[Fraction]:
        value = self.table[self.node_of[a], self.node_of[b]]
        if not np.isfinite(value):
            return None
        return Fraction(int(round(value)), self.scale)


def quotient_metric(t: TruncatedCompactum, p: Partition) -> QuotientMetric:
    labels = p.labels()
    widths = [atom.part.diameter for atom in t.atoms]

    free = nx.Graph()
    free.add_nodes_from(range(len(t.atoms)))
    for a, b in t.graph.edges:
        if labels[a] == labels[b] or widths[a] + widths[b] == 0:
            free.add_edge(a, b)
    for members in p.merged_classes():
        free.add_edges_from((members[0], a) for a in members[1:])
    node_of = [0] * len(t.atoms)
    nodes = sorted(nx.connected_components(free), key=min)
    for index, component in enumerate(nodes):
        for atom in component:
            node_of[atom] = index

    weights: Dict[Tuple[int, int], Fraction] = {}
    for a, b in t.graph.edges:
        u, v = sorted((node_of[a], node_of[b]))
        if u == v:
            continue
        w = (widths[a] + widths[b]) / 2
        if w < weights.get((u, v), w + 1):
            weights[(u, v)] = w
    scale = math.lcm(*(w.denominator for w in weights.values())) if weights else 1
    keys = sorted(weights)
    matrix = csr_matrix(
        (
            [float(weights[k] * scale) for k in keys],
            ([u for u, _ in keys], [v for _, v in keys]),
        ),
        shape=(len(nodes), len(nodes)),
    )
    table = dijkstra(matrix, directed=False)
    _LOGGER.debug(
        "Quotient metric for %s: %d atoms contracted to %d nodes",
        p.name,
        len(t.atoms),
        len(nodes),
    )
    merged = {a for members in p.merged_classes() for a in members}
    reach = tuple(
        Fraction(0) if a in merged else widths[a] / 2 for a in range(len(t.atoms))
    )
    return QuotientMetric(p, tuple(node_of), scale, reach, table)


def quotient_diameter(
    atoms: Iterable[int], p: Partition, qm: QuotientMetric
) -> Fraction:
    """Quotient diameter of a connected atom set.

    Largest quotient distance between two of its atoms plus half of each
    endpoint atom's diameter; atoms of merged classes count as points.
    """
    atoms = list(atoms)
    if not atoms:
        return Fraction(0)
    scale = math.lcm(qm.scale, *(qm.reach[a].denominator for a in atoms))
    nodes = [qm.node_of[a] for a in atoms]
    reach = np.array([float(qm.reach[a] * scale) for a in atoms])
    block = qm.table[np.ix_(nodes, nodes)] * (scale // qm.scale)
    block = block + reach[:, None] + reach[None, :]
    finite = block[np.isfinite(block)]
    return Fraction(int(round(finite.max())), scale)


# ---------------------------
# Finitely Suslinian check
# ---------------------------


@dataclass(frozen=True)
class FSViolation:
    family: str
    members: Tuple[str, ...]
    diameters: Tuple[Fraction, ...]


@dataclass(frozen=True)
class QuotientReport:
    relation: str
    class_count: int
    merged: Tuple[int, ...]
    nondegenerate: Tuple[int, ...]
    eps: Fraction
    k: int
    violations: Tuple[FSViolation, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.violations


def check_fs_at_scale(
    t: TruncatedCompactum,
    p: Partition,
    qm: QuotientMetric,
    eps: Fraction,
    k: int,
) -> QuotientReport:
    """Look for k pairwise quotient-disjoint family members of diameter >= eps.

    Two members are joined when their pieces touch or one merged class meets
    both (a class meets a piece when it contains or touches one of its atoms).
    """
    eps = as_scalar(eps)
    if eps <= 0:
        raise InvalidScale(f"Epsilon must be positive, got {eps}")
    if k < 3:
        raise InvalidScale(f"k must be at least 3, got {k}")
    labels = p.labels()
    merged = p.merged_classes()
    merged_ids = {members[0] for members in merged}
    touched: Dict[int, Set[int]] = {}

    def meets(index: int) -> Set[int]:
        if index not in touched:
            touched[index] = {
                labels[x]
                for a in t.piece_atoms[index]
                for x in (a, *t.graph[a])
                if labels[x] in merged_ids
            }
        return touched[index]

    def joined(a: int, b: int) -> bool:
        return t.piece_graph.has_edge(a, b) or bool(meets(a) & meets(b))

    violations = []
    for name, members in t.families.items():
        chosen: List[Tuple[int, Fraction]] = []
        for index in members:
            size = quotient_diameter(t.piece_atoms[index], p, qm)
            if size < eps:
                continue
            if all(not joined(index, other) for other, _ in chosen):
                chosen.append((index, size))
        if len(chosen) >= k:
            witness = chosen[:k]
            violations.append(
                FSViolation(
                    name,
                    tuple(t.pieces[i].label for i, _ in witness),
                    tuple(size for _, size in witness),
                )
            )
    nondegenerate = tuple(
        members[0]
        for members in merged
        if p.geometry(members[0]).bounds.diameter > 0
    )
    report = QuotientReport(
        p.name,
        len(p),
        tuple(members[0] for members in merged),
        nondegenerate,
        eps,
        k,
        tuple(violations),
    )
    _LOGGER.debug(
        "FS check of %s at eps %s, k %d: %s",
        p.name,
        eps,
        k,
        "pass" if report.passed else "violation",
    )
    return report


def check_fs_grid(
    t: TruncatedCompactum,
    p: Partition,
    qm: QuotientMetric,
    eps_grid: Iterable[Fraction],
    k: int,
) -> List[QuotientReport]:
    return [check_fs_at_scale(t, p, qm, eps, k) for eps in eps_grid]


def is_top_model(
    t: TruncatedCompactum,
    p: Partition,
    candidates: Iterable[Partition],
    eps_grid: Sequence[Fraction],
    k: int,
) -> bool:
    """p passes the FS check and no strictly finer candidate does."""

    def passes(q: Partition) -> bool:
        qm = quotient_metric(t, q)
        return all(r.passed for r in check_fs_grid(t, q, qm, eps_grid, k))

    if not passes(p):
        return False
    return not any(
        refines(q, p) and q != p and passes(q) for q in candidates
    )
