"""Deterministic JSON, SVG and PGM output."""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import tempfile
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from .analysis import LimitContinuum, RasterDecomposition, ThetaWitness
from .cdl import TruncatedCompactum
from .errors import FSModelError
from .geometry import bounding_box, format_scalar
from .relations import Partition, QuotientReport

_LOGGER = logging.getLogger(__name__)

SVG_SIZE = 512
SVG_MARGIN = 16
SVG_PANEL = 160
STROKE = 2

PALETTE = (
    "#1f77b4",
    "#ff7f0e",
    "#2ca02c",
    "#d62728",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#17becf",
    "#bcbd22",
)
SINGLETON_COLOR = "#7f7f7f"


# ---------------------------
# JSON
# ---------------------------


def to_jsonable(value: Any) -> Any:
    """Convert results to JSON types; rationals print as "p/q"."""
    if isinstance(value, Fraction):
        return format_scalar(value)
    if isinstance(value, Enum):
        return value.name
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = [to_jsonable(v) for v in value]
        return sorted(items) if isinstance(value, (set, frozenset)) else items
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: to_jsonable(getattr(value, f.name)) for f in dataclasses.fields(value)}
    return value


def dumps(value: Any) -> str:
    return json.dumps(to_jsonable(value), sort_keys=True, indent=2) + "\n"


def write_atomic(path: Union[str, Path], text: str) -> None:
    """Write through a temporary file in the target directory."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
                handle.write(text)
            os.replace(tmp, path)
        except BaseException:
            os.unlink(tmp)
            raise
    except OSError as err:
        raise FSModelError(f"Cannot write {path}: {err}") from err
    _LOGGER.debug("Wrote %s (%d bytes)", path, len(text))


def save_partition(path: Union[str, Path], p: Partition) -> None:
    write_atomic(path, dumps(p.to_json()))


def load_partition(path: Union[str, Path], t: TruncatedCompactum) -> Partition:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as err:
        raise FSModelError(f"Cannot load partition {path}: {err}") from err
    if not isinstance(data, dict):
        raise FSModelError(f"Partition file {path} does not hold an object")
    partition = Partition.from_json(data, t.universe)
    partition.truncation = t
    return partition.freeze()


def limit_to_json(t: TruncatedCompactum, limit: LimitContinuum) -> Dict[str, Any]:
    return {
        "label": limit.label,
        "kind": limit.kind,
        "family": limit.family,
        "nondegenerate": limit.nondegenerate,
        "geometry": str(limit.geometry),
        "witness": [t.pieces[m].label for m in limit.members],
        "distances": list(limit.distances),
        "monotone": limit.monotone,
    }


def theta_to_json(
    t: TruncatedCompactum, witness: Optional[ThetaWitness]
) -> Optional[Dict[str, Any]]:
    if witness is None:
        return None
    return {
        "pieces": witness.labels(t),
        "atoms": {role: sorted(atoms) for role, atoms in witness.atoms(t).items()},
    }


def report_to_json(
    t: TruncatedCompactum, p: Partition, report: QuotientReport
) -> Dict[str, Any]:
    data = to_jsonable(report)
    data["passed"] = report.passed
    data["collapsed_pieces"] = _collapsed_pieces(t, p, report.nondegenerate)
    return data


def _collapsed_pieces(
    t: TruncatedCompactum, p: Partition, class_ids: Any
) -> Dict[str, List[str]]:
    labels = p.labels()
    found: Dict[str, List[str]] = {}
    for class_id in class_ids:
        found[str(class_id)] = [
            piece.label
            for piece in t.pieces
            if all(labels[a] == class_id for a in t.piece_atoms[piece.index])
        ]
    return found


# ---------------------------
# SVG
# ---------------------------


def render_svg(t: TruncatedCompactum, p: Partition, title: str = "") -> str:
    """Draw the truncation with one group per class.

    Merged classes get palette colors and a contracted node in the side panel.
    """
    box = bounding_box(t.universe)
    span = max(box.width, box.height) or Fraction(1)
    inner = SVG_SIZE - 2 * SVG_MARGIN

    def sx(x: Fraction) -> str:
        return f"{SVG_MARGIN + float((x - box.x0) / span) * inner:.3f}"

    def sy(y: Fraction) -> str:
        return f"{SVG_SIZE - SVG_MARGIN - float((y - box.y0) / span) * inner:.3f}"

    merged = {members[0]: i for i, members in enumerate(p.merged_classes())}
    width = SVG_SIZE + SVG_PANEL
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{SVG_SIZE}" '
        f'viewBox="0 0 {width} {SVG_SIZE}">',
        f"  <title>{_escape(title or t.spec.name)} / {_escape(p.name)}</title>",
        f'  <rect x="0" y="0" width="{width}" height="{SVG_SIZE}" fill="white"/>',
    ]
    for members in p.classes():
        rep = members[0]
        color = (
            PALETTE[merged[rep] % len(PALETTE)] if rep in merged else SINGLETON_COLOR
        )
        out.append(f'  <g id="class-{rep}" stroke="{color}" fill="{color}">')
        for atom in members:
            part = t.atoms[atom].part
            if part.width > 0 and part.height > 0:
                out.append(
                    f'    <rect x="{sx(part.x0)}" y="{sy(part.y1)}" '
                    f'width="{float(part.width / span) * inner:.3f}" '
                    f'height="{float(part.height / span) * inner:.3f}"/>'
                )
            else:
                out.append(
                    f'    <line x1="{sx(part.x0)}" y1="{sy(part.y0)}" '
                    f'x2="{sx(part.x1)}" y2="{sy(part.y1)}" stroke-width="{STROKE}"/>'
                )
        out.append("  </g>")

    out.append(f'  <g id="quotient" transform="translate({SVG_SIZE} 0)">')
    for rep, i in merged.items():
        color = PALETTE[i % len(PALETTE)]
        cy = SVG_MARGIN + 24 * i + 8
        out.append(
            f'    <circle id="node-{rep}" cx="24" cy="{cy}" r="6" fill="{color}"/>'
        )
        out.append(
            f'    <text x="40" y="{cy + 4}" font-size="12">class {rep} '
            f"({len(p.members(rep))} atoms)</text>"
        )
    out.append("  </g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


# ---------------------------
# PGM
# ---------------------------


def render_pgm(raster: RasterDecomposition) -> str:
    """Plain PGM of cell labels, top row first."""
    rows, cols = raster.shape
    lines = ["P2", f"# delta {format_scalar(raster.delta)}", f"{cols} {rows}", "2"]
    for row in raster.labels[::-1]:
        lines.append(" ".join(str(int(v)) for v in row))
    return "\n".join(lines) + "\n"
