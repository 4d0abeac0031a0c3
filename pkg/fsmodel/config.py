"""Run configuration for fsmodel."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Optional, Tuple

import voluptuous as vol

from .cdl import Depth
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
    DEFAULT_ATOM_DELTA,
    DEFAULT_COUNT,
    DEFAULT_DEPTH,
    DEFAULT_EPS,
    DEFAULT_MAX_PIECES,
    DEFAULT_RASTER_DELTA,
    DEFAULT_WORKERS,
    RELATION_FS,
    RELATION_IDENTITY,
    SUBCOMMANDS,
)
from .errors import ConfigError, FSModelError
from .geometry import as_scalar

_LOGGER = logging.getLogger(__name__)

_POSITIVE = vol.Range(min=0, min_included=False)


def parse_rational(value: Any) -> Fraction:
    """Exact rational from "p/q", an integer or a Fraction."""
    if isinstance(value, bool):
        raise vol.Invalid(f"expected a rational, got {value!r}")
    try:
        return as_scalar(value.strip() if isinstance(value, str) else value)
    except (TypeError, ValueError, ZeroDivisionError) as err:
        raise vol.Invalid(f"expected a rational like 1/16, got {value!r}") from err


def parse_rational_list(value: Any) -> Tuple[Fraction, ...]:
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    if not value:
        raise vol.Invalid("expected at least one rational")
    return tuple(parse_rational(v) for v in value)


def parse_depth(value: Any) -> Depth:
    if isinstance(value, Depth):
        return value
    try:
        return Depth.parse(str(value))
    except FSModelError as err:
        raise vol.Invalid(str(err)) from err


def parse_labels(value: Any) -> Tuple[str, ...]:
    if isinstance(value, str):
        value = value.split(",")
    return tuple(v.strip() for v in value if v.strip())


def _all_positive(values: Tuple[Fraction, ...]) -> Tuple[Fraction, ...]:
    for v in values:
        _POSITIVE(v)
    return values


RUN_CONFIG_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_SUBCOMMAND): vol.In(SUBCOMMANDS),
        vol.Required(CONF_INPUTS): vol.All(
            [vol.Coerce(str)], vol.Length(min=1), vol.Coerce(tuple)
        ),
        vol.Optional(CONF_DEPTH, default=DEFAULT_DEPTH): parse_depth,
        vol.Optional(CONF_ATOM_DELTA, default=DEFAULT_ATOM_DELTA): vol.All(
            parse_rational, _POSITIVE
        ),
        vol.Optional(CONF_RASTER_DELTA, default=DEFAULT_RASTER_DELTA): vol.All(
            parse_rational, _POSITIVE
        ),
        vol.Optional(CONF_EPS, default=list(DEFAULT_EPS)): vol.All(
            parse_rational_list, _all_positive
        ),
        vol.Optional(CONF_COUNT, default=DEFAULT_COUNT): vol.All(
            vol.Coerce(int), vol.Range(min=3)
        ),
        vol.Optional(CONF_RELATION, default=RELATION_FS): str,
        vol.Optional(CONF_LEFT, default=RELATION_FS): str,
        vol.Optional(CONF_RIGHT, default=RELATION_IDENTITY): str,
        vol.Optional(CONF_MAP, default=None): vol.Any(None, str),
        vol.Optional(CONF_PIECES, default=()): parse_labels,
        vol.Optional(CONF_MAX_PIECES, default=DEFAULT_MAX_PIECES): vol.All(
            vol.Coerce(int), vol.Range(min=1)
        ),
        vol.Optional(CONF_ALLOW_EMPTY, default=False): bool,
        vol.Optional(CONF_WORKERS, default=DEFAULT_WORKERS): vol.All(
            vol.Coerce(int), vol.Range(min=1)
        ),
        vol.Optional(CONF_JSON, default=None): vol.Any(None, str),
        vol.Optional(CONF_SVG, default=None): vol.Any(None, str),
        vol.Optional(CONF_PGM, default=None): vol.Any(None, str),
        vol.Optional(CONF_FS, default=False): bool,
        vol.Optional(CONF_COLLAPSE, default=False): bool,
    }
)


@dataclass(frozen=True)
class RunConfig:
    """Validated settings for one CLI invocation."""

    subcommand: str
    inputs: Tuple[str, ...]
    depth: Depth
    atom_delta: Fraction
    raster_delta: Fraction
    eps: Tuple[Fraction, ...]
    count: int
    relation: str
    left: str
    right: str
    map: Optional[str]
    pieces: Tuple[str, ...]
    max_pieces: int
    allow_empty: bool
    workers: int
    json: Optional[str]
    svg: Optional[str]
    pgm: Optional[str]
    fs: bool
    collapse: bool


def build_run_config(raw: Dict[str, Any]) -> RunConfig:
    """Validate raw values (CLI or dict) into a RunConfig."""
    cleaned = {k: v for k, v in raw.items() if v is not None}
    try:
        data = RUN_CONFIG_SCHEMA(cleaned)
    except vol.Invalid as err:
        raise ConfigError(f"Invalid configuration: {err}") from err
    _LOGGER.debug("Run configuration: %s", data)
    return RunConfig(**data)
