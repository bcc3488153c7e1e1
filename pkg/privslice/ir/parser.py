"""µIR text to Program."""

import json
from dataclasses import replace
from functools import cache
from typing import Any

import structlog
from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, VisitError
from lark.tree import Meta

from privslice.errors import IrSyntaxError, IrValidationError, PrivsliceError
from privslice.ir.model import (
    Assign,
    BinOp,
    CallExpr,
    CallStmt,
    ClassDecl,
    Const,
    Copy,
    Goto,
    If,
    Label,
    MethodDecl,
    Param,
    Program,
    Return,
    Rhs,
    Sig,
    UiField,
    UiRead,
    VCallExpr,
    VCallStmt,
)
from privslice.ir.validate import validate

logger = structlog.get_logger(__name__)


@cache
def _grammar() -> Lark:
    return Lark.open_from_package(
        "privslice.ir",
        "air.lark",
        parser="lalr",
        propagate_positions=True,
        maybe_placeholders=True,
    )


def _string(token: Token) -> str:
    try:
        value = json.loads(token)
    except json.JSONDecodeError as err:
        msg = f"invalid string literal {token}"
        raise IrSyntaxError(msg, token.line or 0, token.column or 0) from err
    return str(value)


def _sig(token: Token) -> Sig:
    try:
        return Sig.parse(token)
    except ValueError as err:
        raise IrSyntaxError(str(err), token.line or 0, token.column or 0) from err


def _args(args: list[Token] | None) -> tuple[str, ...]:
    return tuple(str(arg) for arg in args or ())


class _ToProgram(Transformer[Token, Program]):
    """Turn the parse tree into model objects."""

    def start(self, children: list[Any]) -> Program:
        app_id, *decls = children
        classes = tuple(d for d in decls if isinstance(d, ClassDecl))
        layout = tuple(f for d in decls if isinstance(d, tuple) for f in d)
        return Program(_string(app_id), classes, layout)

    def layout(self, children: list[UiField]) -> tuple[UiField, ...]:
        return tuple(children)

    @v_args(meta=True)
    def ui_field(self, meta: Meta, children: list[Token]) -> UiField:
        field_id, hint, input_type = (_string(token) for token in children)
        return UiField(field_id, hint, input_type, meta.line)

    @v_args(meta=True)
    def klass(self, meta: Meta, children: list[Any]) -> ClassDecl:
        qname, superclass, *methods = children
        return ClassDecl(
            str(qname),
            str(superclass) if superclass is not None else None,
            tuple(methods),
            meta.line,
        )

    @v_args(meta=True)
    def method(self, meta: Meta, children: list[Any]) -> MethodDecl:
        name, param_count, *body = children
        stmts = tuple(replace(stmt, index=i) for i, stmt in enumerate(body))
        return MethodDecl(str(name), int(str(param_count)), stmts, meta.line)

    @v_args(meta=True)
    def label(self, meta: Meta, children: list[Token]) -> Label:
        return Label(name=str(children[0]), line=meta.line)

    @v_args(meta=True)
    def assign(self, meta: Meta, children: list[Any]) -> Assign:
        dest, rhs = children
        return Assign(dest=str(dest), rhs=rhs, line=meta.line)

    @v_args(meta=True)
    def call_stmt(self, meta: Meta, children: list[Any]) -> CallStmt:
        callee, args = children
        return CallStmt(callee=_sig(callee), args=_args(args), line=meta.line)

    @v_args(meta=True)
    def vcall_stmt(self, meta: Meta, children: list[Any]) -> VCallStmt:
        receiver, method, args = children
        return VCallStmt(
            receiver=str(receiver),
            method=str(method),
            args=_args(args),
            line=meta.line,
        )

    @v_args(meta=True)
    def if_stmt(self, meta: Meta, children: list[Any]) -> If:
        lhs, relop, rhs, target = children
        operand = rhs if isinstance(rhs, Const) else str(rhs)
        return If(lhs=str(lhs), relop=str(relop), rhs=operand, target=str(target), line=meta.line)

    @v_args(meta=True)
    def goto_stmt(self, meta: Meta, children: list[Token]) -> Goto:
        return Goto(target=str(children[0]), line=meta.line)

    @v_args(meta=True)
    def return_stmt(self, meta: Meta, children: list[Any]) -> Return:
        var = children[1]
        return Return(var=str(var) if var is not None else None, line=meta.line)

    def const(self, children: list[Token]) -> Const:
        (token,) = children
        if token.type == "STRING":
            return Const(_string(token))
        return Const(int(token))

    def copy(self, children: list[Token]) -> Rhs:
        return Copy(str(children[0]))

    def binop(self, children: list[Token]) -> Rhs:
        left, op, right = children
        return BinOp(str(op), str(left), str(right))

    def call_expr(self, children: list[Any]) -> Rhs:
        callee, args = children
        return CallExpr(_sig(callee), _args(args))

    def vcall_expr(self, children: list[Any]) -> Rhs:
        receiver, method, args = children
        return VCallExpr(str(receiver), str(method), _args(args))

    def uiread(self, children: list[Token]) -> Rhs:
        return UiRead(_string(children[0]))

    def param(self, children: list[Token]) -> Rhs:
        return Param(int(children[0]))

    def args(self, children: list[Token]) -> list[Token]:
        return children


def _expected(parser: Lark, names: set[str] | list[str] | None) -> list[str]:
    expected = []
    for name in names or ():
        try:
            term = parser.get_terminal(name)
        except KeyError:
            expected.append(name)
            continue
        is_literal = term.pattern.type == "str"
        expected.append(repr(term.pattern.value) if is_literal else name)
    return expected


def _syntax_error(parser: Lark, source: str, err: UnexpectedInput) -> IrSyntaxError:
    line = err.line if err.line > 0 else source.count("\n")
    column = err.column if err.column > 0 else 1
    match err:
        case UnexpectedCharacters():
            char = source[err.pos_in_stream] if err.pos_in_stream < len(source) else ""
            expected = _expected(parser, err.allowed)
            return IrSyntaxError(f"unexpected character {char!r}", line, column, expected)
        case UnexpectedEOF():
            expected = _expected(parser, err.expected)
            return IrSyntaxError("unexpected end of input", line, column, expected)
    token = getattr(err, "token", None)
    if token is None or token.type == "$END":
        found = "end of input"
    elif token.type == "_NL":
        found = "end of line"
    else:
        found = repr(str(token))
    expected = _expected(parser, getattr(err, "expected", None))
    return IrSyntaxError(f"unexpected {found}", line, column, expected)


def parse_text(source: str) -> Program:
    """Parse µIR text without validating program invariants."""
    parser = _grammar()
    text = source if source.endswith("\n") else source + "\n"
    try:
        tree = parser.parse(text)
    except UnexpectedInput as err:
        raise _syntax_error(parser, text, err) from err
    try:
        return _ToProgram().transform(tree)
    except VisitError as err:
        if isinstance(err.orig_exc, PrivsliceError):
            raise err.orig_exc from err
        raise


def parse_program(source: str) -> Program:
    """Parse and validate µIR text.

    Statement indices are assigned per method in textual order, labels included.
    Raises IrSyntaxError for grammar violations and IrValidationError when the
    program breaks an invariant that validation reports as an error.
    """
    program = parse_text(source)
    diagnostics = validate(program)
    errors = [d for d in diagnostics if d.is_error]
    if errors:
        raise IrValidationError(errors)
    for warning in diagnostics:
        logger.warning("ir_validation", app_id=program.app_id, diagnostic=str(warning))
    logger.debug(
        "ir_parsed",
        app_id=program.app_id,
        classes=len(program.classes),
        methods=len(program.methods),
    )
    return program
