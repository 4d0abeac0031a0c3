"""Constants for fsmodel."""

from fractions import Fraction

DOMAIN = "fsmodel"
NAME = "Finitely Suslinian models"

CONF_SUBCOMMAND = "subcommand"
CONF_INPUTS = "inputs"
CONF_DEPTH = "depth"
CONF_ATOM_DELTA = "atom_delta"
CONF_RASTER_DELTA = "raster_delta"
CONF_EPS = "eps"
CONF_COUNT = "count"
CONF_RELATION = "relation"
CONF_LEFT = "left"
CONF_RIGHT = "right"
CONF_MAP = "map"
CONF_PIECES = "pieces"
CONF_MAX_PIECES = "max_pieces"
CONF_ALLOW_EMPTY = "allow_empty"
CONF_WORKERS = "workers"
CONF_JSON = "json"
CONF_SVG = "svg"
CONF_PGM = "pgm"
CONF_FS = "fs"
CONF_COLLAPSE = "collapse"

DEFAULT_DEPTH = "8,8,8"
DEFAULT_ATOM_DELTA = Fraction(1, 16)
DEFAULT_RASTER_DELTA = Fraction(1, 64)
DEFAULT_EPS = (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8))
DEFAULT_COUNT = 8
DEFAULT_MAX_PIECES = 3
DEFAULT_TAIL_FRACTION = Fraction(1, 2)
DEFAULT_MIN_TAIL = 2
DEFAULT_WORKERS = 1
DEFAULT_RASTER_PADDING = 2

RELATION_IDENTITY = "identity"
RELATION_FS = "fs"
RELATION_COMP = "comp"
RELATION_H = "h"
RELATION_PHI = "phi"

SUBCOMMAND_PARSE = "parse"
SUBCOMMAND_LIMITS = "limits"
SUBCOMMAND_THETA = "theta"
SUBCOMMAND_UNSHIELDED = "unshielded"
SUBCOMMAND_HULL = "hull"
SUBCOMMAND_QUOTIENT = "quotient"
SUBCOMMAND_COMPARE = "compare"
SUBCOMMAND_CHECK = "check"
SUBCOMMAND_DYNAMICS = "dynamics"
SUBCOMMAND_RENDER = "render"

SUBCOMMANDS = (
    SUBCOMMAND_PARSE,
    SUBCOMMAND_LIMITS,
    SUBCOMMAND_THETA,
    SUBCOMMAND_UNSHIELDED,
    SUBCOMMAND_HULL,
    SUBCOMMAND_QUOTIENT,
    SUBCOMMAND_COMPARE,
    SUBCOMMAND_CHECK,
    SUBCOMMAND_DYNAMICS,
    SUBCOMMAND_RENDER,
)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT_ERROR = 2

FIXTURE_PREFIX = "fixture:"
