"""Finitely Suslinian monotone models of planar compacta."""

from __future__ import annotations

from .analysis import (
    CellLabel,
    LimitContinuum,
    RasterDecomposition,
    ThetaWitness,
    check_unshielded,
    declared_limits,
    detect_theta,
    irreducible_chain,
    numeric_limit_scan,
    raster_hull,
)
from .cdl import (
    CompactumSpec,
    Depth,
    MapSpec,
    TruncatedCompactum,
    load_compactum,
    load_map,
    parse_compactum,
    parse_map,
    truncate,
)
from .errors import FSModelError
from .relations import (
    ClosureRules,
    Partition,
    QuotientMetric,
    QuotientReport,
    check_fs_at_scale,
    comp_relation,
    finest_relation,
    fs_relation,
    named_relation,
    quotient_metric,
    refines,
)

__version__ = "0.1.0"

__all__ = [
    "CellLabel",
    "ClosureRules",
    "CompactumSpec",
    "Depth",
    "FSModelError",
    "LimitContinuum",
    "MapSpec",
    "Partition",
    "QuotientMetric",
    "QuotientReport",
    "RasterDecomposition",
    "ThetaWitness",
    "TruncatedCompactum",
    "check_fs_at_scale",
    "check_unshielded",
    "comp_relation",
    "declared_limits",
    "detect_theta",
    "finest_relation",
    "fs_relation",
    "irreducible_chain",
    "load_compactum",
    "load_map",
    "named_relation",
    "numeric_limit_scan",
    "parse_compactum",
    "parse_map",
    "quotient_metric",
    "raster_hull",
    "refines",
    "truncate",
]
