"""Compactum (CDL) and map (MDL) description languages and truncation."""

from __future__ import annotations

import itertools
import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple, Union

import networkx as nx

from .const import FIXTURE_PREFIX
from .errors import (
    CDLSyntaxError,
    EmptyCompactum,
    FSModelError,
    InvalidAction,
    InvalidDepth,
    InvalidPiece,
    InvalidScale,
    MissingLimit,
    UnknownFamily,
)
from .geometry import (
    BOX,
    SEG,
    Atom,
    Part,
    PieceGeometry,
    Point,
    as_scalar,
    format_scalar,
    subdivide,
    touching_pairs,
)

_LOGGER = logging.getLogger(__name__)

PARAM_INTEGER = "integer"
PARAM_DYADIC = "dyadic"
PARAM_WORD = "word"

LIMIT_CONTINUUM = "continuum"
LIMIT_POINT = "point"
LIMIT_SELF = "self"

ACTION_SHIFT = "shift"
ACTION_IDENTITY = "identity"
ACTION_AFFINE = "affine"

ParamValue = Union[int, Fraction, str]


# ---------------------------
# Tokenizer
# ---------------------------

_TOKEN_SPEC = (
    ("newline", r"\n"),
    ("skip", r"[ \t\r]+"),
    ("comment", r"#[^\n]*"),
    ("dotdot", r"\.\."),
    ("number", r"[0-9]+"),
    ("ident", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("punct", r"[{}(),:/*+\-^.=]"),
    ("error", r"."),
)
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{rx})" for name, rx in _TOKEN_SPEC))


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(source: str) -> Tuple[List[Token], Tuple[str, ...]]:
    """Split source into tokens.

    Comment lines before the first token are returned separately as notes.
    """
    tokens: List[Token] = []
    notes: List[str] = []
    line, line_start = 1, 0
    for match in _TOKEN_RE.finditer(source):
        kind = match.lastgroup
        text = match.group()
        column = match.start() - line_start + 1
        if kind == "newline":
            line += 1
            line_start = match.end()
            continue
        if kind == "skip":
            continue
        if kind == "comment":
            if not tokens:
                notes.append(text[1:].strip())
            continue
        if kind == "error":
            raise CDLSyntaxError(f"Unexpected character {text!r}", line, column)
        tokens.append(Token(kind, text, line, column))
    tokens.append(Token("eof", "", line, len(source) - line_start + 1))
    return tokens, tuple(notes)


# ---------------------------
# Symbolic values
# ---------------------------


def _normalized(coeffs: Dict[str, Fraction]) -> Tuple[Tuple[str, Fraction], ...]:
    return tuple(sorted((name, Fraction(c)) for name, c in coeffs.items() if c != 0))


@dataclass(frozen=True)
class Affine:
    """Constant plus a rational combination of decay variables."""

    const: Fraction = Fraction(0)
    terms: Tuple[Tuple[str, Fraction], ...] = ()

    @classmethod
    def constant(cls, value: Union[int, Fraction]) -> Affine:
        return cls(Fraction(value))

    @classmethod
    def variable(cls, name: str) -> Affine:
        return cls(Fraction(0), ((name, Fraction(1)),))

    @property
    def is_constant(self) -> bool:
        return not self.terms

    @property
    def variables(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.terms)

    def _combine(self, other: Affine, sign: int) -> Affine:
        coeffs = dict(self.terms)
        for name, coef in other.terms:
            coeffs[name] = coeffs.get(name, Fraction(0)) + sign * coef
        return Affine(self.const + sign * other.const, _normalized(coeffs))

    def __add__(self, other: Affine) -> Affine:
        return self._combine(other, 1)

    def __sub__(self, other: Affine) -> Affine:
        return self._combine(other, -1)

    def __neg__(self) -> Affine:
        return Affine(-self.const, tuple((name, -coef) for name, coef in self.terms))

    def scale(self, factor: Fraction) -> Affine:
        return Affine(
            self.const * factor,
            _normalized({name: coef * factor for name, coef in self.terms}),
        )

    def evaluate(self, binding: Dict[str, Fraction]) -> Fraction:
        return self.const + sum(
            (coef * binding[name] for name, coef in self.terms), Fraction(0)
        )

    def __str__(self) -> str:
        out: List[str] = []
        for name, coef in self.terms:
            body = name if abs(coef) == 1 else f"{format_scalar(abs(coef))}*{name}"
            if not out:
                out.append(body if coef > 0 else f"-{body}")
            else:
                out.append(f" + {body}" if coef > 0 else f" - {body}")
        if not out:
            return format_scalar(self.const)
        if self.const > 0:
            out.append(f" + {format_scalar(self.const)}")
        elif self.const < 0:
            out.append(f" - {format_scalar(-self.const)}")
        return "".join(out)


@dataclass(frozen=True)
class PointExpr:
    x: Affine
    y: Affine

    def evaluate(self, binding: Dict[str, Fraction]) -> Point:
        return Point(self.x.evaluate(binding), self.y.evaluate(binding))

    @property
    def is_constant(self) -> bool:
        return self.x.is_constant and self.y.is_constant

    def __str__(self) -> str:
        return f"({self.x}, {self.y})"


@dataclass(frozen=True)
class GeoTemplate:
    kind: str
    a: PointExpr
    b: PointExpr

    def instantiate(self, binding: Dict[str, Fraction]) -> Part:
        a, b = self.a.evaluate(binding), self.b.evaluate(binding)
        if self.kind == SEG:
            return Part.segment(a, b)
        return Part.box(a, b)

    def __str__(self) -> str:
        return f"{self.kind} {self.a} {self.b}"


@dataclass(frozen=True)
class LimitClause:
    kind: str
    name: Optional[str] = None
    point: Optional[PointExpr] = None

    @property
    def parametric(self) -> bool:
        return self.point is not None and not self.point.is_constant

    def __str__(self) -> str:
        if self.kind == LIMIT_POINT:
            return f"limit point {self.point}"
        if self.kind == LIMIT_SELF:
            return "limit self"
        return f"limit {self.name}"


@dataclass(frozen=True)
class Param:
    name: str
    kind: str

    def __str__(self) -> str:
        domain = {
            PARAM_INTEGER: "1..",
            PARAM_DYADIC: "dyadic (0,1)",
            PARAM_WORD: "word {0,1}",
        }[self.kind]
        return f"{self.name}: {domain}"


@dataclass(frozen=True)
class ContinuumDecl:
    name: str
    geometry: Tuple[GeoTemplate, ...]


@dataclass(frozen=True)
class FamilyDecl:
    name: str
    param: Param
    geometry: Tuple[GeoTemplate, ...]
    limit: LimitClause
    accumulates_self: bool = False


@dataclass(frozen=True)
class CompactumSpec:
    name: str
    continua: Tuple[ContinuumDecl, ...] = ()
    families: Tuple[FamilyDecl, ...] = ()
    notes: Tuple[str, ...] = ()

    def family(self, name: str) -> FamilyDecl:
        for fam in self.families:
            if fam.name == name:
                return fam
        raise UnknownFamily(f"Compactum {self.name!r} has no family {name!r}")


@dataclass(frozen=True)
class MapAction:
    target: str
    kind: str
    matrix: Tuple[Fraction, ...] = ()

    def apply(self, point: Point) -> Point:
        a, b, c, d, e, f = self.matrix
        return Point(a * point.x + b * point.y + e, c * point.x + d * point.y + f)

    def __str__(self) -> str:
        if self.kind == ACTION_AFFINE:
            entries = ", ".join(format_scalar(v) for v in self.matrix)
            return f"on {self.target}: affine ({entries})"
        return f"on {self.target}: {self.kind}"


@dataclass(frozen=True)
class MapSpec:
    name: str
    actions: Tuple[MapAction, ...] = ()
    params: Tuple[Tuple[str, Fraction], ...] = ()

    def action_for(self, target: str) -> MapAction:
        for action in self.actions:
            if action.target == target:
                return action
        return MapAction(target, ACTION_IDENTITY)


# ---------------------------
# Parser
# ---------------------------


class _Parser:
    def __init__(self, source: str) -> None:
        self._tokens, self.notes = tokenize(source)
        self._pos = 0
        self._scope: Dict[str, str] = {}

    def peek(self) -> Token:
        return self._tokens[self._pos]

    def next(self) -> Token:
        tok = self._tokens[self._pos]
        if tok.kind != "eof":
            self._pos += 1
        return tok

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind != "eof" and tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.next()
            return True
        return False

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if not self.at(text):
            raise self.error(f"Expected {text!r}, found {_describe(tok)}", tok)
        return self.next()

    def expect_kind(self, kind: str, what: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise self.error(f"Expected {what}, found {_describe(tok)}", tok)
        return self.next()

    def error(self, message: str, tok: Optional[Token] = None) -> CDLSyntaxError:
        tok = tok or self.peek()
        return CDLSyntaxError(message, tok.line, tok.column)

    # --------- compactum ----------

    def compactum(self) -> CompactumSpec:
        self.expect("compactum")
        name = self.expect_kind("ident", "compactum name").text
        self.expect("{")
        continua: List[ContinuumDecl] = []
        families: List[FamilyDecl] = []
        limit_refs: List[Tuple[str, Token]] = []
        seen: set[str] = set()
        while not self.at("}"):
            tok = self.peek()
            if tok.text == "continuum" and tok.kind == "ident":
                decl: Union[ContinuumDecl, FamilyDecl] = self.continuum()
                continua.append(decl)
            elif tok.text == "family" and tok.kind == "ident":
                decl, ref = self.family()
                families.append(decl)
                if decl.limit.kind == LIMIT_CONTINUUM:
                    limit_refs.append((decl.limit.name, ref))
            else:
                raise self.error(
                    f"Expected 'continuum' or 'family', found {_describe(tok)}", tok
                )
            if decl.name in seen:
                raise self.error(f"Duplicate name {decl.name!r}", tok)
            seen.add(decl.name)
        close = self.expect("}")
        self.expect_kind("eof", "end of input")
        if not continua and not families:
            raise EmptyCompactum(
                f"Compactum {name!r} declares no continuum or family",
                close.line,
                close.column,
            )
        declared = {c.name for c in continua}
        for target, ref in limit_refs:
            if target not in declared:
                raise self.error(f"Limit {target!r} is not a declared continuum", ref)
        return CompactumSpec(name, tuple(continua), tuple(families), self.notes)

    def continuum(self) -> ContinuumDecl:
        self.expect("continuum")
        name = self.expect_kind("ident", "continuum name").text
        self.expect("{")
        self._scope = {}
        templates = self.geometry()
        self.expect("}")
        return ContinuumDecl(name, templates)

    def family(self) -> Tuple[FamilyDecl, Token]:
        self.expect("family")
        name = self.expect_kind("ident", "family name").text
        self.expect("(")
        param = self.param()
        self.expect(")")
        accumulates = False
        if self.accept("accumulates"):
            self.expect("self")
            accumulates = True
        self.expect("{")
        self._scope = {param.name: param.kind}
        templates = self.geometry()
        tok = self.peek()
        if not self.at("limit"):
            raise MissingLimit(
                f"Family {name!r} has no limit clause", tok.line, tok.column
            )
        self.next()
        ref = self.peek()
        limit = self.limit(accumulates)
        self.expect("}")
        self._scope = {}
        return FamilyDecl(name, param, templates, limit, accumulates), ref

    def param(self) -> Param:
        name = self.expect_kind("ident", "parameter name").text
        self.expect(":")
        if self.accept("1"):
            self.expect("..")
            return Param(name, PARAM_INTEGER)
        if self.accept("dyadic"):
            for text in ("(", "0", ",", "1", ")"):
                self.expect(text)
            return Param(name, PARAM_DYADIC)
        if self.accept("word"):
            for text in ("{", "0", ",", "1", "}"):
                self.expect(text)
            return Param(name, PARAM_WORD)
        raise self.error("Expected '1..', 'dyadic (0,1)' or 'word {0,1}'")

    def geometry(self) -> Tuple[GeoTemplate, ...]:
        templates = [self.geo()]
        while self.at(SEG) or self.at(BOX):
            templates.append(self.geo())
        return tuple(templates)

    def geo(self) -> GeoTemplate:
        tok = self.peek()
        if not (self.at(SEG) or self.at(BOX)):
            raise self.error(f"Expected 'seg' or 'box', found {_describe(tok)}", tok)
        kind = self.next().text
        return GeoTemplate(kind, self.point(), self.point())

    def point(self) -> PointExpr:
        self.expect("(")
        x = self.expr()
        self.expect(",")
        y = self.expr()
        self.expect(")")
        return PointExpr(x, y)

    def limit(self, accumulates: bool) -> LimitClause:
        if self.accept("point"):
            return LimitClause(LIMIT_POINT, point=self.point())
        tok = self.expect_kind("ident", "limit continuum name")
        if tok.text == "self":
            if not accumulates:
                raise self.error("'limit self' requires 'accumulates self'", tok)
            return LimitClause(LIMIT_SELF)
        return LimitClause(LIMIT_CONTINUUM, name=tok.text)

    # --------- expressions ----------

    def expr(self) -> Affine:
        negate = self.accept("-")
        value = self.term()
        if negate:
            value = -value
        while self.at("+") or self.at("-"):
            op = self.next().text
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> Affine:
        start = self.peek()
        value = self.factor()
        while self.accept("*"):
            rhs = self.factor()
            if value.is_constant:
                value = rhs.scale(value.const)
            elif rhs.is_constant:
                value = value.scale(rhs.const)
            else:
                raise self.error("Expression is not affine in the parameter", start)
        return value

    def factor(self) -> Affine:
        tok = self.peek()
        if tok.kind == "number":
            self.next()
            value = int(tok.text)
            if self.at("^"):
                if value != 2:
                    raise self.error("Only negative powers of 2 are supported", tok)
                self.next()
                self.expect("-")
                var = self.expect_kind("ident", "integer parameter")
                self._require(var, PARAM_INTEGER)
                return Affine.variable(f"2^-{var.text}")
            if self.accept("/"):
                den = self.peek()
                if den.kind == "number":
                    self.next()
                    if int(den.text) == 0:
                        raise self.error("Division by zero", den)
                    return Affine.constant(Fraction(value, int(den.text)))
                var = self.expect_kind("ident", "denominator")
                self._require(var, PARAM_DYADIC)
                self.expect(".")
                attr = self.expect_kind("ident", "'q'")
                if attr.text != "q":
                    raise self.error(f"Unknown attribute {attr.text!r}", attr)
                return Affine.variable(f"1/{var.text}.q").scale(Fraction(value))
            return Affine.constant(value)
        if tok.kind == "ident":
            self.next()
            if self.accept("."):
                attr = self.expect_kind("ident", "'lo' or 'hi'")
                if attr.text not in ("lo", "hi"):
                    raise self.error(f"Unknown attribute {attr.text!r}", attr)
                self._require(tok, PARAM_WORD)
                return Affine.variable(f"{tok.text}.{attr.text}")
            self._require(tok, PARAM_DYADIC)
            return Affine.variable(tok.text)
        if self.accept("("):
            value = self.expr()
            self.expect(")")
            return value
        raise self.error(f"Expected a coordinate, found {_describe(tok)}", tok)

    def _require(self, tok: Token, kind: str) -> None:
        found = self._scope.get(tok.text)
        if found is None:
            raise self.error(f"Unknown parameter {tok.text!r}", tok)
        if found != kind:
            raise self.error(f"Parameter {tok.text!r} is {found}, not {kind}", tok)

    # --------- maps ----------

    def map_spec(self) -> MapSpec:
        self.expect("map")
        name = self.expect_kind("ident", "map name").text
        self.expect("{")
        actions: List[MapAction] = []
        params: List[Tuple[str, Fraction]] = []
        while not self.at("}"):
            tok = self.peek()
            if self.accept("on"):
                target = self.expect_kind("ident", "family or continuum name")
                self.expect(":")
                if any(a.target == target.text for a in actions):
                    raise self.error(f"Duplicate action on {target.text!r}", target)
                actions.append(self.action(target.text))
            elif self.accept("param"):
                pname = self.expect_kind("ident", "parameter name").text
                self.expect("=")
                params.append((pname, self.rational()))
            else:
                raise self.error(f"Expected 'on' or 'param', found {_describe(tok)}", tok)
        self.expect("}")
        self.expect_kind("eof", "end of input")
        return MapSpec(name, tuple(actions), tuple(params))

    def action(self, target: str) -> MapAction:
        tok = self.expect_kind("ident", "map action")
        if tok.text in (ACTION_SHIFT, ACTION_IDENTITY):
            return MapAction(target, tok.text)
        if tok.text == ACTION_AFFINE:
            self.expect("(")
            values = [self.rational()]
            for _ in range(5):
                self.expect(",")
                values.append(self.rational())
            self.expect(")")
            return MapAction(target, ACTION_AFFINE, tuple(values))
        raise self.error(f"Unknown map action {tok.text!r}", tok)

    def rational(self) -> Fraction:
        negative = self.accept("-")
        num = self.expect_kind("number", "number")
        value = Fraction(int(num.text))
        if self.accept("/"):
            den = self.expect_kind("number", "denominator")
            if int(den.text) == 0:
                raise self.error("Division by zero", den)
            value /= int(den.text)
        return -value if negative else value


def _describe(tok: Token) -> str:
    return "end of input" if tok.kind == "eof" else repr(tok.text)


def parse_compactum(source: str) -> CompactumSpec:
    return _Parser(source).compactum()


def parse_map(source: str, compactum: Optional[CompactumSpec] = None) -> MapSpec:
    map_spec = _Parser(source).map_spec()
    if compactum is not None:
        validate_map(map_spec, compactum)
    return map_spec


def validate_map(map_spec: MapSpec, compactum: CompactumSpec) -> None:
    """Check every action against the declarations of its compactum."""
    families = {fam.name: fam for fam in compactum.families}
    continua = {decl.name for decl in compactum.continua}
    for action in map_spec.actions:
        if action.target not in families and action.target not in continua:
            raise UnknownFamily(
                f"Map {map_spec.name!r} acts on undeclared {action.target!r}"
            )
        if action.kind == ACTION_SHIFT:
            fam = families.get(action.target)
            if fam is None or fam.param.kind not in (PARAM_WORD, PARAM_INTEGER):
                raise InvalidAction(
                    f"Shift needs a word or integer family, not {action.target!r}"
                )
        elif action.kind == ACTION_AFFINE:
            if action.target not in continua:
                raise InvalidAction(
                    f"Affine actions apply to continua, not {action.target!r}"
                )
            a, b, c, d = action.matrix[:4]
            if a * d - b * c == 0 or not ((b == 0 and c == 0) or (a == 0 and d == 0)):
                raise InvalidAction(
                    f"Affine action on {action.target!r} must be invertible and "
                    "preserve the coordinate axes"
                )


# ---------------------------
# Formatting
# ---------------------------


def format_compactum(spec: CompactumSpec) -> str:
    lines = [f"# {note}".rstrip() for note in spec.notes]
    lines.append(f"compactum {spec.name} {{")
    for decl in spec.continua:
        lines.append(f"  continuum {decl.name} {{")
        lines.extend(f"    {tmpl}" for tmpl in decl.geometry)
        lines.append("  }")
    for fam in spec.families:
        flag = " accumulates self" if fam.accumulates_self else ""
        lines.append(f"  family {fam.name}({fam.param}){flag} {{")
        lines.extend(f"    {tmpl}" for tmpl in fam.geometry)
        lines.append(f"    {fam.limit}")
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def format_map(map_spec: MapSpec) -> str:
    lines = [f"map {map_spec.name} {{"]
    lines.extend(
        f"  param {name} = {format_scalar(value)}" for name, value in map_spec.params
    )
    lines.extend(f"  {action}" for action in map_spec.actions)
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------
# Sources
# ---------------------------


def read_source(ref: Union[str, Path], suffix: str = ".cdl") -> str:
    """Read a description file; ``fixture:NAME`` addresses a bundled fixture."""
    text = str(ref)
    try:
        if text.startswith(FIXTURE_PREFIX):
            name = text[len(FIXTURE_PREFIX) :]
            resource = resources.files("fsmodel").joinpath("fixtures", f"{name}{suffix}")
            return resource.read_text(encoding="utf-8")
        return Path(text).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as err:
        raise FSModelError(f"Cannot read {text}: {err}") from err


def load_compactum(ref: Union[str, Path]) -> CompactumSpec:
    return parse_compactum(read_source(ref, ".cdl"))


def load_map(ref: Union[str, Path], compactum: Optional[CompactumSpec] = None) -> MapSpec:
    return parse_map(read_source(ref, ".mdl"), compactum)


# ---------------------------
# Parameters and depth
# ---------------------------


@dataclass(frozen=True)
class Depth:
    """Truncation depth: integer bound N, dyadic exponent K, word length k."""

    integer: int
    dyadic: int
    word: int

    @classmethod
    def parse(cls, text: str) -> Depth:
        try:
            values = [int(v) for v in str(text).split(",")]
        except ValueError as err:
            raise InvalidDepth(f"Malformed depth {text!r}: {err}") from err
        if len(values) == 1:
            values *= 3
        elif len(values) == 2:
            values.append(values[0])
        elif len(values) != 3:
            raise InvalidDepth(f"Depth takes one to three values, got {text!r}")
        return cls(*values)

    @classmethod
    def uniform(cls, value: int) -> Depth:
        return cls(value, value, value)

    def __str__(self) -> str:
        return f"{self.integer},{self.dyadic},{self.word}"


def word_interval(word: str) -> Tuple[Fraction, Fraction]:
    """Middle-thirds interval coded by a binary word."""
    lo = sum(
        (Fraction(2 * int(bit), 3 ** (i + 1)) for i, bit in enumerate(word)),
        Fraction(0),
    )
    return lo, lo + Fraction(1, 3 ** len(word))


def parameter_values(param: Param, depth: Depth) -> List[ParamValue]:
    """Parameter values within depth, in declared order."""
    if param.kind == PARAM_INTEGER:
        return list(range(1, depth.integer + 1))
    if param.kind == PARAM_DYADIC:
        return [
            Fraction(p, 2**j)
            for j in range(1, depth.dyadic + 1)
            for p in range(1, 2**j, 2)
        ]
    if depth.word == 0:
        return []
    return ["".join(bits) for bits in itertools.product("01", repeat=depth.word)]


def parameter_binding(param: Param, value: ParamValue) -> Dict[str, Fraction]:
    if param.kind == PARAM_INTEGER:
        return {f"2^-{param.name}": Fraction(1, 2**value)}
    if param.kind == PARAM_DYADIC:
        return {param.name: value, f"1/{param.name}.q": Fraction(1, value.denominator)}
    lo, hi = word_interval(value)
    return {f"{param.name}.lo": lo, f"{param.name}.hi": hi}


def format_param(value: ParamValue) -> str:
    if isinstance(value, Fraction):
        return format_scalar(value)
    return str(value)


def member_label(family: str, value: ParamValue) -> str:
    return f"{family}[{format_param(value)}]"


def expected_piece_count(spec: CompactumSpec, depth: Depth) -> int:
    return len(spec.continua) + sum(
        len(parameter_values(fam.param, depth)) for fam in spec.families
    )


# ---------------------------
# Truncation
# ---------------------------


@dataclass(frozen=True)
class Piece:
    index: int
    label: str
    geometry: PieceGeometry
    family: Optional[str] = None
    param: Optional[ParamValue] = None
    limit: Optional[PieceGeometry] = None


@dataclass(frozen=True, eq=False)
class TruncatedCompactum:
    """Finite atomized instance of a compactum at a fixed depth."""

    spec: CompactumSpec
    depth: Depth
    delta: Fraction
    pieces: Tuple[Piece, ...]
    atoms: Tuple[Atom, ...]
    piece_atoms: Tuple[Tuple[int, ...], ...]
    graph: nx.Graph = field(repr=False)

    @cached_property
    def universe(self) -> Tuple[Part, ...]:
        return tuple(atom.part for atom in self.atoms)

    @cached_property
    def families(self) -> Dict[str, Tuple[int, ...]]:
        members: Dict[str, List[int]] = {fam.name: [] for fam in self.spec.families}
        for piece in self.pieces:
            if piece.family is not None:
                members[piece.family].append(piece.index)
        return {name: tuple(indices) for name, indices in members.items()}

    def family_members(self, name: str) -> Tuple[int, ...]:
        try:
            return self.families[name]
        except KeyError as err:
            raise UnknownFamily(f"No family {name!r} in {self.spec.name!r}") from err

    @cached_property
    def _by_label(self) -> Dict[str, Piece]:
        return {piece.label: piece for piece in self.pieces}

    def piece(self, label: str) -> Piece:
        try:
            return self._by_label[label]
        except KeyError as err:
            raise FSModelError(f"No piece labelled {label!r}") from err

    def atoms_of(self, pieces: Iterable[int]) -> FrozenSet[int]:
        return frozenset(a for index in pieces for a in self.piece_atoms[index])

    def atoms_within(self, geometry: PieceGeometry) -> Tuple[int, ...]:
        """Atoms contained in some part of geometry."""
        return tuple(
            atom.id
            for atom in self.atoms
            if any(part.contains(atom.part) for part in geometry.parts)
        )

    @cached_property
    def components(self) -> Tuple[FrozenSet[int], ...]:
        comps = (frozenset(c) for c in nx.connected_components(self.graph))
        return tuple(sorted(comps, key=min))

    @cached_property
    def piece_graph(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(len(self.pieces)))
        owner = [atom.parent_piece for atom in self.atoms]
        for a, b in self.graph.edges:
            if owner[a] != owner[b]:
                graph.add_edge(owner[a], owner[b])
        return graph


def truncate(
    spec: CompactumSpec,
    depth: Depth,
    delta: Union[Fraction, int, str],
    *,
    allow_empty: bool = False,
) -> TruncatedCompactum:
    delta = as_scalar(delta)
    if delta <= 0:
        raise InvalidScale(f"Atom granularity must be positive, got {delta}")
    least = 0 if allow_empty else 1
    for name, value in (
        ("integer", depth.integer),
        ("dyadic", depth.dyadic),
        ("word", depth.word),
    ):
        if value < least:
            raise InvalidDepth(f"{name} depth must be at least {least}, got {value}")

    pieces: List[Piece] = []
    named: Dict[str, PieceGeometry] = {}
    for decl in spec.continua:
        geometry = _instantiate(decl.name, decl.geometry, {})
        named[decl.name] = geometry
        pieces.append(Piece(len(pieces), decl.name, geometry))
    for fam in spec.families:
        for value in parameter_values(fam.param, depth):
            binding = parameter_binding(fam.param, value)
            label = member_label(fam.name, value)
            pieces.append(
                Piece(
                    len(pieces),
                    label,
                    _instantiate(label, fam.geometry, binding),
                    fam.name,
                    value,
                    _limit_geometry(fam.limit, named, binding),
                )
            )
    if not pieces:
        raise InvalidDepth(f"Truncation of {spec.name!r} at {depth} has no pieces")

    markers = _intersection_markers(pieces)
    atoms: List[Atom] = []
    piece_atoms: List[Tuple[int, ...]] = []
    for piece in pieces:
        cut = subdivide(
            piece.geometry,
            delta,
            markers[piece.index],
            start_id=len(atoms),
            piece=piece.index,
        )
        piece_atoms.append(tuple(atom.id for atom in cut))
        atoms.extend(cut)

    graph = nx.Graph()
    graph.add_nodes_from(range(len(atoms)))
    graph.add_edges_from(touching_pairs([atom.part for atom in atoms]))
    for piece, ids in zip(pieces, piece_atoms):
        if not nx.is_connected(graph.subgraph(ids)):
            raise InvalidPiece(f"Atoms of {piece.label} are not connected")

    _LOGGER.debug(
        "Truncated %s at depth %s, delta %s: %d pieces, %d atoms, %d adjacencies",
        spec.name,
        depth,
        delta,
        len(pieces),
        len(atoms),
        graph.number_of_edges(),
    )
    return TruncatedCompactum(
        spec, depth, delta, tuple(pieces), tuple(atoms), tuple(piece_atoms), graph
    )


def _instantiate(
    label: str, templates: Tuple[GeoTemplate, ...], binding: Dict[str, Fraction]
) -> PieceGeometry:
    try:
        geometry = PieceGeometry(tuple(t.instantiate(binding) for t in templates))
    except InvalidPiece as err:
        raise InvalidPiece(f"{label}: {err}") from err
    if not geometry.connected:
        raise InvalidPiece(f"{label} is not connected")
    return geometry


def _limit_geometry(
    limit: LimitClause, named: Dict[str, PieceGeometry], binding: Dict[str, Fraction]
) -> Optional[PieceGeometry]:
    if limit.kind == LIMIT_CONTINUUM:
        return named[limit.name]
    if limit.kind == LIMIT_POINT:
        return PieceGeometry.of(Part.point(limit.point.evaluate(binding)))
    return None


def _intersection_markers(pieces: List[Piece]) -> Dict[int, Tuple[Point, ...]]:
    owners: List[int] = []
    parts: List[Part] = []
    for piece in pieces:
        for part in piece.geometry.parts:
            owners.append(piece.index)
            parts.append(part)
    found: Dict[int, set[Point]] = {piece.index: set() for piece in pieces}
    for i, j in touching_pairs(parts):
        common = parts[i].intersection(parts[j])
        if common is None:
            continue
        for corner in common.corners:
            found[owners[i]].add(corner)
            found[owners[j]].add(corner)
    return {index: tuple(sorted(points)) for index, points in found.items()}
