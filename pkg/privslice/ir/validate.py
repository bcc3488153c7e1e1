"""Program invariant checks."""

from collections import Counter

import networkx as nx

from privslice.ir.model import Assign, Goto, If, Label, MethodDecl, Param, Program, UiRead, uses
from privslice.models import Diagnostic, Severity


def _error(code: str, message: str, line: int | None = None) -> Diagnostic:
    return Diagnostic(Severity.ERROR, code, message, line)


def _warning(code: str, message: str, line: int | None = None) -> Diagnostic:
    return Diagnostic(Severity.WARNING, code, message, line)


def _duplicates(names: list[str]) -> list[str]:
    return [name for name, count in Counter(names).items() if count > 1]


def _check_extends(program: Program) -> list[Diagnostic]:
    graph: nx.DiGraph[str] = nx.DiGraph()
    for cls in program.classes:
        if cls.superclass and program.find_class(cls.superclass):
            graph.add_edge(cls.qname, cls.superclass)
    diagnostics = []
    for cycle in sorted(nx.simple_cycles(graph)):
        start = cycle.index(min(cycle))
        ordered = [*cycle[start:], *cycle[:start]]
        path = " -> ".join([*ordered, ordered[0]])
        first = program.find_class(ordered[0])
        diagnostics.append(
            _error("extends-cycle", f"cyclic inheritance {path}", first.line if first else None)
        )
    return diagnostics


def _check_method(program: Program, owner: str, method: MethodDecl) -> list[Diagnostic]:
    where = f"{owner}.{method.name}"
    diagnostics = []

    labels = [stmt for stmt in method.body if isinstance(stmt, Label)]
    for name in _duplicates([label.name for label in labels]):
        line = next(label.line for label in labels if label.name == name)
        msg = f"label {name} declared twice in {where}"
        diagnostics.append(_error("duplicate-label", msg, line))
    declared = {label.name for label in labels}

    defined: set[str] = set()
    reported: set[str] = set()
    for stmt in method.body:
        if isinstance(stmt, If | Goto) and stmt.target not in declared:
            diagnostics.append(
                _error("undefined-label", f"undefined label {stmt.target} in {where}", stmt.line)
            )
        if isinstance(stmt, Assign) and isinstance(stmt.rhs, Param):
            index = stmt.rhs.index
            if index >= method.param_count:
                msg = f"param {index} out of range for {where} with {method.param_count} params"
                diagnostics.append(_error("param-index", msg, stmt.line))
        if isinstance(stmt, Assign) and isinstance(stmt.rhs, UiRead):
            field_id = stmt.rhs.field_id
            if program.ui_field(field_id) is None:
                msg = f"uiread of unknown layout field {field_id!r} in {where}"
                diagnostics.append(_warning("unresolved-uiread", msg, stmt.line))
        for var in uses(stmt):
            if var not in defined and var not in reported:
                reported.add(var)
                msg = f"{var} read before written in {where}"
                diagnostics.append(_warning("read-before-write", msg, stmt.line))
        if isinstance(stmt, Assign):
            defined.add(stmt.dest)
    return diagnostics


def validate(program: Program) -> list[Diagnostic]:
    """Check a parsed program against its invariants.

    Returns an empty list when every invariant holds. Reading a variable before
    any textual write and reading an undeclared layout field are warnings; all
    other findings are errors.
    """
    diagnostics: list[Diagnostic] = []

    for qname in _duplicates([cls.qname for cls in program.classes]):
        line = next(cls.line for cls in program.classes if cls.qname == qname)
        diagnostics.append(_error("duplicate-class", f"class {qname} declared twice", line))

    for field_id in _duplicates([f.id for f in program.layout]):
        line = next(f.line for f in program.layout if f.id == field_id)
        msg = f"layout field {field_id!r} declared twice"
        diagnostics.append(_error("duplicate-field", msg, line))

    diagnostics.extend(_check_extends(program))

    for cls in program.classes:
        for name in _duplicates([method.name for method in cls.methods]):
            line = next(method.line for method in cls.methods if method.name == name)
            diagnostics.append(
                _error("duplicate-method", f"method {name} declared twice in {cls.qname}", line)
            )
        for method in cls.methods:
            diagnostics.extend(_check_method(program, cls.qname, method))

    return diagnostics
