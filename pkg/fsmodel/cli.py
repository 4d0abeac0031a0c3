"""Command-line front end for fsmodel."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence

from . import __version__
from .analysis import (
    check_unshielded,
    declared_limits,
    detect_theta,
    numeric_limit_scan,
    raster_hull,
)
from .cdl import TruncatedCompactum, format_compactum, load_map
from .config import RunConfig, build_run_config
from .const import (
    CONF_ALLOW_EMPTY,
    CONF_ATOM_DELTA,
    CONF_COLLAPSE,
    CONF_COUNT,
    CONF_DEPTH,
    CONF_EPS,
    CONF_FS,
    CONF_INPUTS,
    CONF_JSON,
    CONF_LEFT,
    CONF_MAP,
    CONF_MAX_PIECES,
    CONF_PGM,
    CONF_PIECES,
    CONF_RASTER_DELTA,
    CONF_RELATION,
    CONF_RIGHT,
    CONF_SUBCOMMAND,
    CONF_SVG,
    CONF_WORKERS,
    DOMAIN,
    EXIT_INPUT_ERROR,
    EXIT_OK,
    EXIT_VIOLATION,
    NAME,
    SUBCOMMAND_CHECK,
    SUBCOMMAND_COMPARE,
    SUBCOMMAND_DYNAMICS,
    SUBCOMMAND_HULL,
    SUBCOMMAND_LIMITS,
    SUBCOMMAND_PARSE,
    SUBCOMMAND_QUOTIENT,
    SUBCOMMAND_RENDER,
    SUBCOMMAND_THETA,
    SUBCOMMAND_UNSHIELDED,
)
from .coordinator import run_jobs
from .dynamics import (
    build_system,
    induced_map,
    induced_map_to_json,
    verify_equivariance,
    verify_semiconjugacy,
)
from .errors import ConfigError, FSModelError
from .geometry import format_scalar
from .relations import (
    Partition,
    check_fs_grid,
    compare,
    named_relation,
    quotient_metric,
    verify_collapse,
)
from .render import (
    dumps,
    limit_to_json,
    load_partition,
    render_pgm,
    render_svg,
    report_to_json,
    theta_to_json,
    write_atomic,
)

_LOGGER = logging.getLogger(__name__)


class Outcome(NamedTuple):
    payload: Dict[str, Any]
    lines: List[str]
    violation: bool = False


Job = Callable[[RunConfig, int, str, TruncatedCompactum], Outcome]


def resolve_relation(t: TruncatedCompactum, name: str) -> Partition:
    """Named relation, or a partition saved as JSON."""
    if name.endswith(".json"):
        return load_partition(name, t)
    return named_relation(t, name)


def _output_path(path: str, index: int, total: int) -> Path:
    target = Path(path)
    if total == 1:
        return target
    return target.with_name(f"{target.stem}-{index}{target.suffix}")


# ---------------------------
# Subcommand jobs
# ---------------------------


def _parse(config: RunConfig, index: int, ref: str, t: TruncatedCompactum) -> Outcome:
    families = {name: len(members) for name, members in t.families.items()}
    text = format_compactum(t.spec)
    payload = {
        "name": t.spec.name,
        "depth": str(t.depth),
        "pieces": len(t.pieces),
        "atoms": len(t.atoms),
        "adjacencies": t.graph.number_of_edges(),
        "families": families,
        "source": text,
    }
    summary = f"{ref}: {t.spec.name}, {len(t.pieces)} pieces, {len(t.atoms)} atoms"
    return Outcome(payload, [summary, text.rstrip()])


def _limits(config: RunConfig, index: int, ref: str, t: TruncatedCompactum) -> Outcome:
    declared = [limit_to_json(t, limit) for limit in declared_limits(t)]
    scans = {
        format_scalar(eps): [
            limit_to_json(t, limit) for limit in numeric_limit_scan(t, eps, config.count)
        ]
        for eps in config.eps
    }
    lines = [
        f"{ref}: {entry['label']} ({entry['kind']}, "
        f"{'nondegenerate' if entry['nondegenerate'] else 'degenerate'}) "
        f"witness of {len(entry['witness'])}"
        for entry in declared
    ]
    for eps, found in scans.items():
        lines.extend(
            f"{ref}: scan eps {eps} suggests {entry['label']}" for entry in found
        )
    return Outcome({"declared": declared, "scan": scans}, lines)


def _theta(config: RunConfig, index: int, ref: str, t: TruncatedCompactum) -> Outcome:
    witness = detect_theta(t, config.max_pieces)
    payload = {"max_pieces": config.max_pieces, "witness": theta_to_json(t, witness)}
    if witness is None:
        return Outcome(payload, [f"{ref}: no theta configuration"])
    roles = ", ".join(
        f"{role}={'+'.join(labels)}" for role, labels in witness.labels(t).items()
    )
    return Outcome(payload, [f"{ref}: theta {roles}"], violation=True)


def _unshielded(
    config: RunConfig, index: int, ref: str, t: TruncatedCompactum
) -> Outcome:
    verdict = check_unshielded(t, config.raster_delta)
    if config.pgm:
        write_atomic(
            _output_path(config.pgm, index, len(config.inputs)),
            render_pgm(verdict.raster),
        )
    payload = {
        "delta": config.raster_delta,
        "unshielded": verdict.unshielded,
        "witness": list(verdict.witness) if verdict.witness else None,
        "cells": verdict.raster.counts(),
    }
    word = "unshielded" if verdict.unshielded else f"shielded at cell {verdict.witness}"
    line = f"{ref}: {word} at delta {format_scalar(config.raster_delta)}"
    return Outcome(payload, [line], violation=not verdict.unshielded)


def _hull(config: RunConfig, index: int, ref: str, t: TruncatedCompactum) -> Outcome:
    if not config.pieces:
        raise ConfigError("hull needs --pieces LABEL[,LABEL...]")
    atoms = t.atoms_of(t.piece(label).index for label in config.pieces)
    cells = raster_hull(t, atoms, config.raster_delta)
    payload = {
        "pieces": list(config.pieces),
        "delta": config.raster_delta,
        "count": len(cells),
        "cells": sorted(list(c) for c in cells),
    }
    return Outcome(payload, [f"{ref}: hull of {len(cells)} cells"])


def _quotient(
    config: RunConfig, index: int, ref: str, t: TruncatedCompactum
) -> Outcome:
    p = resolve_relation(t, config.relation)
    qm = quotient_metric(t, p)
    reports = check_fs_grid(t, p, qm, config.eps, config.count)
    if config.svg:
        write_atomic(
            _output_path(config.svg, index, len(config.inputs)), render_svg(t, p)
        )
    payload = {
        "relation": p.name,
        "classes": len(p),
        "merged": len(p.merged_classes()),
        "nondegenerate": reports[0].nondegenerate if reports else [],
        "reports": [report_to_json(t, p, r) for r in reports],
        "partition": p.to_json(),
    }
    lines = [
        f"{ref}: {p.name} has {len(p)} classes, "
        f"{len(p.merged_classes())} merged"
    ]
    failed = [r for r in reports if not r.passed]
    lines.extend(
        f"{ref}: fs violation at eps {format_scalar(r.eps)}: {', '.join(v.members)}"
        for r in failed
        for v in r.violations
    )
    return Outcome(payload, lines, violation=bool(failed))


def _compare(config: RunConfig, index: int, ref: str, t: TruncatedCompactum) -> Outcome:
    left = resolve_relation(t, config.left)
    right = resolve_relation(t, config.right)
    relation = compare(left, right)
    payload = {"left": left.name, "right": right.name, "relation": relation}
    return Outcome(payload, [relation])


def _check(config: RunConfig, index: int, ref: str, t: TruncatedCompactum) -> Outcome:
    run_fs = config.fs or not config.collapse
    run_collapse = config.collapse or not config.fs
    p = resolve_relation(t, config.relation)
    payload: Dict[str, Any] = {
        "relation": p.name,
        "classes": len(p),
        "merged": len(p.merged_classes()),
    }
    lines = [f"{ref}: {p.name} has {len(p)} classes, {len(p.merged_classes())} merged"]
    violation = False
    if run_fs:
        qm = quotient_metric(t, p)
        reports = check_fs_grid(t, p, qm, config.eps, config.count)
        payload["fs"] = [report_to_json(t, p, r) for r in reports]
        for report in reports:
            if report.passed:
                lines.append(
                    f"{ref}: fs pass at eps {format_scalar(report.eps)}, k {report.k}"
                )
                continue
            violation = True
            for v in report.violations:
                lines.append(
                    f"{ref}: fs violation at eps {format_scalar(report.eps)}: "
                    f"{', '.join(v.members)}"
                )
    if run_collapse:
        verdict = verify_collapse(t, p)
        payload["collapse"] = verdict._asdict()
        if verdict.passed:
            lines.append(f"{ref}: every limit continuum collapses")
        else:
            violation = True
            lines.append(f"{ref}: {verdict.limit} splits into {len(verdict.classes)} classes")
    return Outcome(payload, lines, violation)


def _dynamics(
    config: RunConfig, index: int, ref: str, t: TruncatedCompactum
) -> Outcome:
    if not config.map:
        raise ConfigError("dynamics needs --map FILE")
    map_spec = load_map(config.map, t.spec)
    s = build_system(t.spec, map_spec, t.depth, config.atom_delta, domain=t)
    p_dom = resolve_relation(s.domain, config.relation)
    p_cod = None if s.same_depth else resolve_relation(s.codomain, config.relation)
    verdict = verify_equivariance(s, p_dom, p_cod)
    payload: Dict[str, Any] = {
        "map": map_spec.name,
        "domain_depth": str(s.domain.depth),
        "codomain_depth": str(s.codomain.depth),
        "fully_invariant": s.fully_invariant,
        "equivariance": verdict._asdict(),
    }
    if not verdict.passed:
        line = (
            f"{ref}: {p_dom.name} is not equivariant under {map_spec.name} "
            f"(class {verdict.domain_class} against {list(verdict.codomain_classes)})"
        )
        return Outcome(payload, [line], violation=True)
    im = induced_map(s, p_dom, p_cod)
    semi = verify_semiconjugacy(s, im)
    payload["induced"] = induced_map_to_json(im)
    payload["semiconjugacy"] = semi._asdict()
    status = "holds" if semi.passed else f"fails at atom {semi.atom}"
    line = (
        f"{ref}: {map_spec.name} induces a map on {len(im.table)} classes, "
        f"semiconjugacy {status}"
    )
    return Outcome(payload, [line], violation=not semi.passed)


def _render(config: RunConfig, index: int, ref: str, t: TruncatedCompactum) -> Outcome:
    p = resolve_relation(t, config.relation)
    svg = render_svg(t, p)
    payload: Dict[str, Any] = {"relation": p.name, "classes": len(p)}
    if config.svg:
        path = _output_path(config.svg, index, len(config.inputs))
        write_atomic(path, svg)
        payload["svg"] = str(path)
        return Outcome(payload, [f"{ref}: wrote {path}"])
    return Outcome(payload, [svg.rstrip()])


JOBS: Dict[str, Job] = {
    SUBCOMMAND_PARSE: _parse,
    SUBCOMMAND_LIMITS: _limits,
    SUBCOMMAND_THETA: _theta,
    SUBCOMMAND_UNSHIELDED: _unshielded,
    SUBCOMMAND_HULL: _hull,
    SUBCOMMAND_QUOTIENT: _quotient,
    SUBCOMMAND_COMPARE: _compare,
    SUBCOMMAND_CHECK: _check,
    SUBCOMMAND_DYNAMICS: _dynamics,
    SUBCOMMAND_RENDER: _render,
}


# ---------------------------
# Argument parsing
# ---------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(CONF_INPUTS, nargs="+", metavar="FILE",
                        help="CDL file or fixture:NAME")
    common.add_argument("--depth", dest=CONF_DEPTH, metavar="N,K[,k]")
    common.add_argument("--atom-delta", dest=CONF_ATOM_DELTA, metavar="p/q")
    common.add_argument("--raster-delta", dest=CONF_RASTER_DELTA, metavar="p/q")
    common.add_argument("--eps", dest=CONF_EPS, metavar="p/q[,p/q...]")
    common.add_argument("--count", dest=CONF_COUNT, metavar="k")
    common.add_argument("--relation", dest=CONF_RELATION,
                        metavar="fs|comp|h|phi:N|identity|file.json")
    common.add_argument("--left", dest=CONF_LEFT, metavar="RELATION")
    common.add_argument("--right", dest=CONF_RIGHT, metavar="RELATION")
    common.add_argument("--map", dest=CONF_MAP, metavar="file.mdl")
    common.add_argument("--pieces", dest=CONF_PIECES, metavar="LABEL[,LABEL...]")
    common.add_argument("--max-pieces", dest=CONF_MAX_PIECES, metavar="P")
    common.add_argument("--allow-empty", dest=CONF_ALLOW_EMPTY, action="store_true")
    common.add_argument("--workers", dest=CONF_WORKERS, metavar="n")
    common.add_argument("--json", dest=CONF_JSON, metavar="path")
    common.add_argument("--svg", dest=CONF_SVG, metavar="path")
    common.add_argument("--pgm", dest=CONF_PGM, metavar="path")
    common.add_argument("--fs", dest=CONF_FS, action="store_true",
                        help="check the finitely Suslinian property")
    common.add_argument("--collapse", dest=CONF_COLLAPSE, action="store_true",
                        help="check that limit continua collapse")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog=DOMAIN, description=NAME)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest=CONF_SUBCOMMAND, required=True)
    for name in JOBS:
        sub.add_parser(name, parents=[common])
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = vars(parser.parse_args(argv))
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT_ERROR

    logging.basicConfig(
        level=logging.DEBUG if args.pop("verbose") else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = build_run_config(args)
        job = JOBS[config.subcommand]
        outcomes = run_jobs(
            config, lambda index, ref, t: job(config, index, ref, t)
        )
        if config.json:
            if len(config.inputs) == 1:
                document: Any = outcomes[0].payload
            else:
                document = {
                    ref: outcome.payload for ref, outcome in zip(config.inputs, outcomes)
                }
            write_atomic(config.json, dumps(document))
    except FSModelError as err:
        print(f"{DOMAIN}: error: {err}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    for outcome in outcomes:
        for line in outcome.lines:
            print(line)
    return EXIT_VIOLATION if any(o.violation for o in outcomes) else EXIT_OK


def main() -> None:
    sys.exit(run())
