"""Reader and writer for ``.dfzn``, a small FlatZinc subset.

Grammar::

    model      := item* solveItem
    item       := varDecl | constraint
    varDecl    := "var" domain ":" ident ";"
    domain     := int ".." int | "{" int ("," int)* "}"
    constraint := "constraint" call ";"
    call       := ("int_lin_eq" | "int_lin_le" | "int_lin_ne")
                      "(" intArray "," varArray "," int ")"
                | "all_different" "(" varArray ")"
    solveItem  := "solve" ("satisfy" | "minimize" ident | "maximize" ident) ";"

``%`` starts a comment running to the end of the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from .model import (
    ALL_DIFFERENT,
    LINEAR_KINDS,
    Constraint,
    Model,
    Objective,
    Sense,
    VariableDecl,
    validate_model,
)

__all__ = ["ModelSource", "ParseError", "parse", "parse_file", "parse_text", "serialize"]


@dataclass(frozen=True)
class ModelSource:
    text: str
    origin: str = "<memory>"

    @classmethod
    def from_path(cls, path: Union[str, Path]) -> "ModelSource":
        path = Path(path)
        return cls(path.read_bytes().decode("utf-8"), str(path))


class ParseError(Exception):
    """Lexical, syntax or semantic error with a 1-based location."""

    def __init__(self, kind: str, message: str, line: int, column: int, origin: str = "<memory>"):
        self.kind = kind
        self.message = message
        self.line = line
        self.column = column
        self.origin = origin
        super().__init__(str(self))

    def __str__(self) -> str:
        return f"{self.origin}:{self.line}:{self.column}: {self.kind} error: {self.message}"


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>%[^\n]*)
  | (?P<range>\.\.)
  | (?P<int>-?[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[;:,(){}\[\]])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # "int", "ident", "punct", "range", "eof"
    text: str
    line: int
    col: int

    def describe(self) -> str:
        return "end of input" if self.kind == "eof" else repr(self.text)


def _tokenize(src: ModelSource) -> list[_Tok]:
    toks: list[_Tok] = []
    text = src.text
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError("lexical", f"unexpected character {text[pos]!r}", line, col, src.origin)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), line, col))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, src: ModelSource):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0
        # locations used to attach semantic diagnostics
        self.var_locs: list[_Tok] = []
        self.con_locs: list[_Tok] = []
        self.obj_loc: Optional[_Tok] = None

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, message: str, tok: Optional[_Tok] = None, kind: str = "syntax") -> ParseError:
        tok = tok or self.tok
        return ParseError(kind, message, tok.line, tok.col, self.src.origin)

    def next(self) -> _Tok:
        tok = self.tok
        self.i += 1
        return tok

    def expect(self, text: str) -> _Tok:
        if self.tok.text != text or self.tok.kind == "eof":
            raise self.error(f"expected {text!r}, found {self.tok.describe()}")
        return self.next()

    def expect_int(self) -> int:
        if self.tok.kind != "int":
            raise self.error(f"expected integer, found {self.tok.describe()}")
        return int(self.next().text)

    def expect_ident(self) -> _Tok:
        if self.tok.kind != "ident":
            raise self.error(f"expected identifier, found {self.tok.describe()}")
        return self.next()

    def list_of(self, open_: str, close: str, item):
        self.expect(open_)
        items = [item()]
        while self.tok.text == ",":
            self.next()
            items.append(item())
        self.expect(close)
        return items

    def model(self) -> Model:
        decls: list[VariableDecl] = []
        cons: list[Constraint] = []
        while True:
            tok = self.tok
            if tok.kind == "ident" and tok.text == "var":
                decls.append(self.var_decl())
            elif tok.kind == "ident" and tok.text == "constraint":
                cons.append(self.constraint())
            elif tok.kind == "ident" and tok.text == "solve":
                objective = self.solve_item()
                break
            else:
                raise self.error(f"expected 'var', 'constraint' or 'solve', found {tok.describe()}")
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.describe()} after solve item")
        return Model(tuple(decls), tuple(cons), objective)

    def var_decl(self) -> VariableDecl:
        self.expect("var")
        dom_tok = self.tok
        if self.tok.text == "{":
            values = self.list_of("{", "}", self.expect_int)
            domain = tuple(sorted(set(values)))
        else:
            lo = self.expect_int()
            if self.tok.kind != "range":
                raise self.error(f"expected '..', found {self.tok.describe()}")
            self.next()
            hi = self.expect_int()
            domain = tuple(range(lo, hi + 1))
        self.expect(":")
        name = self.expect_ident()
        self.expect(";")
        self.var_locs.append(dom_tok)
        return VariableDecl(name.text, domain)

    def constraint(self) -> Constraint:
        self.expect("constraint")
        call = self.expect_ident()
        self.expect("(")
        if call.text in LINEAR_KINDS:
            coeffs = self.list_of("[", "]", self.expect_int)
            self.expect(",")
            names = self.list_of("[", "]", lambda: self.expect_ident().text)
            self.expect(",")
            rhs = self.expect_int()
            con = Constraint(call.text, tuple(names), tuple(coeffs), rhs)
        elif call.text == ALL_DIFFERENT:
            names = self.list_of("[", "]", lambda: self.expect_ident().text)
            con = Constraint.all_different(names)
        else:
            raise self.error(f"unknown constraint {call.text!r}", call)
        self.expect(")")
        self.expect(";")
        self.con_locs.append(call)
        return con

    def solve_item(self) -> Objective:
        self.expect("solve")
        kw = self.expect_ident()
        if kw.text == "satisfy":
            objective = Objective()
        elif kw.text in ("minimize", "maximize"):
            self.obj_loc = self.tok
            objective = Objective(Sense(kw.text), self.expect_ident().text)
        else:
            raise self.error(f"expected 'satisfy', 'minimize' or 'maximize', found {kw.describe()}", kw)
        self.expect(";")
        return objective

    def check(self, model: Model) -> None:
        diags = validate_model(model)
        if not diags:
            return
        d = diags[0]
        if d.var is not None:
            tok = self.var_locs[d.var]
        elif d.constraint is not None:
            tok = self.con_locs[d.constraint]
        else:
            tok = self.obj_loc or self.toks[-1]
        raise self.error(d.message, tok, kind="semantic")


def parse(src: Union[ModelSource, str]) -> Model:
    """Parse ``src`` into a validated :class:`Model` or raise :class:`ParseError`."""
    if isinstance(src, str):
        src = ModelSource(src)
    p = _Parser(src)
    model = p.model()
    p.check(model)
    return model


def parse_text(text: str, origin: str = "<memory>") -> Model:
    return parse(ModelSource(text, origin))


def parse_file(path: Union[str, Path]) -> Model:
    return parse(ModelSource.from_path(path))


def _format_domain(domain: tuple[int, ...]) -> str:
    if len(domain) > 1 and domain == tuple(range(domain[0], domain[-1] + 1)):
        return f"{domain[0]}..{domain[-1]}"
    if len(domain) == 1:
        return f"{domain[0]}..{domain[0]}"
    return "{" + ", ".join(map(str, domain)) + "}"


def serialize(m: Model) -> str:
    lines = [f"var {_format_domain(d.domain)}: {d.name};" for d in m.vars]
    for c in m.constraints:
        names = ", ".join(c.vars)
        if c.kind == ALL_DIFFERENT:
            lines.append(f"constraint {c.kind}([{names}]);")
        else:
            coeffs = ", ".join(map(str, c.coeffs))
            lines.append(f"constraint {c.kind}([{coeffs}], [{names}], {c.rhs});")
    if m.objective.sense is Sense.SATISFY:
        lines.append("solve satisfy;")
    else:
        lines.append(f"solve {m.objective.sense.value} {m.objective.var};")
    return "\n".join(lines) + "\n"
