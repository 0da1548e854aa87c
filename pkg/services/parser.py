"""
Parser for `.shapes` source text.

Tokenizer plus recursive descent over the grammar documented in
docs/GRAMMAR.md. Errors are reported as E001 diagnostics; after an error
the parser skips to the next top-level declaration and keeps going.
"""
from __future__ import annotations

import logging
import re
from typing import List, NamedTuple, Optional, Union

from models import (
    KEYWORDS,
    NONE,
    Assign,
    Call,
    ClassDecl,
    ClassType,
    Expr,
    FieldDecl,
    FieldRead,
    FieldWrite,
    LayoutDecl,
    LocalPool,
    LocalVar,
    MethodDecl,
    New,
    Null,
    PoolArg,
    PoolBound,
    PoolParam,
    PoolType,
    Pos,
    Program,
    This,
    Var,
    seq_of,
)
from schemas import Diagnostic, diagnostic

logger = logging.getLogger(__name__)

_TOKEN_RE = re.compile(
    r"""
     (?P<ws>[ \t\r\f]+)
    |(?P<nl>\n)
    |(?P<comment>//[^\n]*)
    |(?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    |(?P<punct><<|>>|[\[\]{}():,;=+.])
    """,
    re.VERBOSE,
)

ID = "id"
KW = "kw"
PUNCT = "punct"
EOF = "eof"


class Token(NamedTuple):
    kind: str
    text: str
    line: int
    column: int

    @property
    def pos(self) -> Pos:
        return Pos(self.line, self.column)

    def describe(self) -> str:
        return "end of input" if self.kind == EOF else f"'{self.text}'"


class _Reject(Exception):
    def __init__(self, diag: Diagnostic):
        self.diag = diag
        super().__init__(diag.message)


def tokenize(source: str) -> List[Token]:
    tokens: List[Token] = []
    line, line_start, i, n = 1, 0, 0, len(source)
    while i < n:
        m = _TOKEN_RE.match(source, i)
        if m is None:
            raise _Reject(diagnostic(
                "E001", f"unexpected character {source[i]!r}", Pos(line, i - line_start + 1)
            ))
        kind = m.lastgroup
        text = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "ident":
            tokens.append(Token(KW if text in KEYWORDS else ID, text, line, i - line_start + 1))
        elif kind == "punct":
            tokens.append(Token(PUNCT, text, line, i - line_start + 1))
        i = m.end()
    tokens.append(Token(EOF, "", line, n - line_start + 1))
    return tokens


class Parser:
    """Recursive-descent parser over a token list"""

    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.i = 0

    # ---- token plumbing ----

    def peek(self, k: int = 0) -> Token:
        j = min(self.i + k, len(self.tokens) - 1)
        return self.tokens[j]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != EOF:
            self.i += 1
        return tok

    def at(self, text: str, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok.kind in (PUNCT, KW) and tok.text == text

    def fail(self, message: str, tok: Optional[Token] = None) -> _Reject:
        tok = tok or self.peek()
        return _Reject(diagnostic("E001", message, tok.pos))

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.fail(f"expected '{text}', found {self.peek().describe()}")
        return self.advance()

    def expect_ident(self, what: str) -> Token:
        tok = self.peek()
        if tok.kind == ID:
            return self.advance()
        if tok.kind == KW and tok.text == "none":
            raise self.fail(f"'none' cannot be used as a {what} name")
        raise self.fail(f"expected {what} name, found {tok.describe()}")

    # ---- program ----

    def parse_program(self) -> tuple[Program, List[Diagnostic]]:
        classes: List[ClassDecl] = []
        layouts: List[LayoutDecl] = []
        diags: List[Diagnostic] = []
        while self.peek().kind != EOF:
            try:
                if self.at("class"):
                    classes.append(self.parse_class())
                elif self.at("layout"):
                    layouts.append(self.parse_layout())
                else:
                    raise self.fail(
                        f"expected 'class' or 'layout', found {self.peek().describe()}"
                    )
            except _Reject as rej:
                diags.append(rej.diag)
                self._skip_to_declaration()
        return Program(tuple(classes), tuple(layouts)), diags

    def _skip_to_declaration(self) -> None:
        self.advance()
        while self.peek().kind != EOF and not (self.at("class") or self.at("layout")):
            self.advance()

    # ---- types ----

    def parse_pool_arg(self) -> PoolArg:
        if self.at("none"):
            self.advance()
            return NONE
        return self.expect_ident("pool").text

    def parse_args(self) -> tuple:
        self.expect("<<")
        args = [self.parse_pool_arg()]
        while self.at(","):
            self.advance()
            args.append(self.parse_pool_arg())
        self.expect(">>")
        return tuple(args)

    def parse_class_type(self) -> ClassType:
        name = self.expect_ident("class")
        return ClassType(name.text, self.parse_args(), pos=name.pos)

    def parse_bound(self) -> PoolBound:
        start = self.expect("[")
        name = self.expect_ident("class")
        args = self.parse_args()
        self.expect("]")
        return PoolBound(name.text, args, pos=start.pos)

    def parse_pool_type(self) -> PoolType:
        name = self.expect_ident("layout")
        return PoolType(name.text, self.parse_args(), pos=name.pos)

    # ---- declarations ----

    def parse_class(self) -> ClassDecl:
        start = self.expect("class")
        name = self.expect_ident("class")
        self.expect("<<")
        params = [self.parse_pool_param()]
        while self.at(","):
            self.advance()
            params.append(self.parse_pool_param())
        self.expect(">>")
        self.expect("{")
        fields: List[FieldDecl] = []
        while self.peek().kind == ID or self.at("none"):
            fname = self.expect_ident("field")
            self.expect(":")
            ftype = self.parse_class_type()
            self.expect(";")
            fields.append(FieldDecl(fname.text, ftype, pos=fname.pos))
        methods: List[MethodDecl] = []
        while self.at("def"):
            methods.append(self.parse_method())
        self.expect("}")
        return ClassDecl(name.text, tuple(params), tuple(fields), tuple(methods), pos=start.pos)

    def parse_pool_param(self) -> PoolParam:
        name = self.expect_ident("pool parameter")
        self.expect(":")
        return PoolParam(name.text, self.parse_bound(), pos=name.pos)

    def parse_method(self) -> MethodDecl:
        start = self.expect("def")
        name = self.expect_ident("method")
        self.expect("(")
        param = self.expect_ident("parameter")
        self.expect(":")
        param_type = self.parse_class_type()
        self.expect(")")
        self.expect(":")
        return_type = self.parse_class_type()
        self.expect("{")
        self.expect("pools")
        pools: List[LocalPool] = []
        while self.peek().kind == ID or self.at("none"):
            pname = self.expect_ident("pool")
            self.expect(":")
            pools.append(LocalPool(pname.text, self.parse_pool_type(), pos=pname.pos))
        self.expect("locals")
        local_vars: List[LocalVar] = []
        while self.peek().kind == ID or self.at("none"):
            vname = self.expect_ident("local")
            self.expect(":")
            local_vars.append(LocalVar(vname.text, self.parse_class_type(), pos=vname.pos))
        self.expect(";")
        body = self.parse_expr()
        self.expect("}")
        return MethodDecl(
            name.text,
            param.text,
            param_type,
            return_type,
            tuple(pools),
            tuple(local_vars),
            body,
            pos=start.pos,
        )

    def parse_layout(self) -> LayoutDecl:
        start = self.expect("layout")
        name = self.expect_ident("layout")
        self.expect(":")
        self.expect("[")
        cls = self.expect_ident("class")
        self.expect("]")
        self.expect("=")
        clusters = [self.parse_rec()]
        while self.at("+"):
            self.advance()
            clusters.append(self.parse_rec())
        self.expect(";")
        return LayoutDecl(name.text, cls.text, tuple(clusters), pos=start.pos)

    def parse_rec(self) -> tuple:
        self.expect("rec")
        self.expect("{")
        names = [self.expect_ident("field").text]
        while self.at(","):
            self.advance()
            names.append(self.expect_ident("field").text)
        self.expect("}")
        return tuple(names)

    # ---- expressions ----

    def parse_expr(self) -> Expr:
        items = [self.parse_assign()]
        while self.at(";"):
            self.advance()
            if self.at("}"):
                # trailing ';' before the closing brace
                break
            items.append(self.parse_assign())
        return seq_of(items)

    def parse_assign(self) -> Expr:
        targets: List[Token] = []
        while self.peek().kind == ID and self.at("=", 1):
            targets.append(self.advance())
            self.advance()
        e = self.parse_primary()
        # `x = y = e` associates to the right
        for tok in reversed(targets):
            e = Assign(tok.text, e, pos=tok.pos)
        return e

    def _receiver_or_arg(self, what: str) -> str:
        if self.at("this"):
            return self.advance().text
        return self.expect_ident(what).text

    def parse_primary(self) -> Expr:
        tok = self.peek()
        if tok.kind == KW:
            if tok.text == "null":
                self.advance()
                return Null(pos=tok.pos)
            if tok.text == "new":
                self.advance()
                return New(self.parse_class_type(), pos=tok.pos)
            if tok.text == "this" and not self.at(".", 1):
                self.advance()
                return This(pos=tok.pos)
            if tok.text != "this":
                raise self.fail(f"expected an expression, found {tok.describe()}")
        elif tok.kind != ID:
            raise self.fail(f"expected an expression, found {tok.describe()}")
        receiver = self._receiver_or_arg("variable")
        if not self.at("."):
            return Var(receiver, pos=tok.pos)
        self.advance()
        member = self.expect_ident("member").text
        if self.at("("):
            self.advance()
            arg = self._receiver_or_arg("argument")
            self.expect(")")
            return Call(receiver, member, arg, pos=tok.pos)
        if self.at("="):
            self.advance()
            source = self._receiver_or_arg("source")
            return FieldWrite(receiver, member, source, pos=tok.pos)
        return FieldRead(receiver, member, pos=tok.pos)


def parse_program(source: str) -> Union[Program, List[Diagnostic]]:
    """Parse SHAPES source text: a Program, or the E001 diagnostics."""
    try:
        tokens = tokenize(source)
    except _Reject as rej:
        return [rej.diag]
    program, diags = Parser(tokens).parse_program()
    if diags:
        logger.debug(f"parse failed with {len(diags)} diagnostic(s)")
        return diags
    logger.debug(
        f"parsed {len(program.classes)} class(es), {len(program.layouts)} layout(s) "
        f"from {len(tokens)} tokens"
    )
    return program
