"""µIR front end: program model, parser and validation."""

from privslice.ir.model import External, MethodRef, Program, Sig, resolve_callee
from privslice.ir.parser import parse_program, parse_text
from privslice.ir.validate import validate

__all__ = [
    "External",
    "MethodRef",
    "Program",
    "Sig",
    "parse_program",
    "parse_text",
    "resolve_callee",
    "validate",
]
