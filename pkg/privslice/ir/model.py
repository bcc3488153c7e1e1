"""In-memory model of a µIR program."""

import json
from dataclasses import dataclass, field
from functools import cached_property

from privslice.models import Site


@dataclass(frozen=True, slots=True)
class Sig:
    """A method signature: qualified owner plus method name."""

    owner: str
    name: str

    @classmethod
    def parse(cls, text: str) -> "Sig":
        """Split a dotted path like 'a.b.C.m' into owner 'a.b.C' and name 'm'."""
        owner, sep, name = text.rpartition(".")
        if not sep or not owner or not name:
            msg = f"signature needs at least two dotted segments: {text!r}"
            raise ValueError(msg)
        return cls(owner, name)

    def __str__(self) -> str:
        return f"{self.owner}.{self.name}"


# Right-hand sides


@dataclass(frozen=True, slots=True)
class Const:
    value: str | int


@dataclass(frozen=True, slots=True)
class Copy:
    var: str


@dataclass(frozen=True, slots=True)
class BinOp:
    op: str
    left: str
    right: str


@dataclass(frozen=True, slots=True)
class CallExpr:
    callee: Sig
    args: tuple[str, ...]


@dataclass(frozen=True, slots=True)
class VCallExpr:
    receiver: str
    method: str
    args: tuple[str, ...]


@dataclass(frozen=True, slots=True)
class UiRead:
    field_id: str


@dataclass(frozen=True, slots=True)
class Param:
    index: int


type Rhs = Const | Copy | BinOp | CallExpr | VCallExpr | UiRead | Param


# Statements. `index` is the method-local position, `line` the source line.


@dataclass(frozen=True, slots=True, kw_only=True)
class Assign:
    dest: str
    rhs: Rhs
    index: int = 0
    line: int = 0


@dataclass(frozen=True, slots=True, kw_only=True)
class CallStmt:
    callee: Sig
    args: tuple[str, ...]
    index: int = 0
    line: int = 0


@dataclass(frozen=True, slots=True, kw_only=True)
class VCallStmt:
    receiver: str
    method: str
    args: tuple[str, ...]
    index: int = 0
    line: int = 0


@dataclass(frozen=True, slots=True, kw_only=True)
class If:
    lhs: str
    relop: str
    rhs: str | Const  # variable name or constant
    target: str
    index: int = 0
    line: int = 0


@dataclass(frozen=True, slots=True, kw_only=True)
class Goto:
    target: str
    index: int = 0
    line: int = 0


@dataclass(frozen=True, slots=True, kw_only=True)
class Label:
    name: str
    index: int = 0
    line: int = 0


@dataclass(frozen=True, slots=True, kw_only=True)
class Return:
    var: str | None = None
    index: int = 0
    line: int = 0


type Stmt = Assign | CallStmt | VCallStmt | If | Goto | Label | Return


def uses(stmt: Stmt) -> tuple[str, ...]:
    """Variables read by a statement, in operand order (receiver first)."""
    match stmt:
        case Assign(rhs=Copy(var=var)):
            return (var,)
        case Assign(rhs=BinOp(left=left, right=right)):
            return (left, right)
        case Assign(rhs=CallExpr(args=args)) | CallStmt(args=args):
            return args
        case Assign(rhs=VCallExpr(receiver=receiver, args=args)) | VCallStmt(
            receiver=receiver, args=args
        ):
            return (receiver, *args)
        case If(lhs=lhs, rhs=str() as rhs):
            return (lhs, rhs)
        case If(lhs=lhs):
            return (lhs,)
        case Return(var=str() as var):
            return (var,)
    return ()


def defined_var(stmt: Stmt) -> str | None:
    """The variable written by a statement, if any."""
    return stmt.dest if isinstance(stmt, Assign) else None


def updated_receiver(stmt: Stmt) -> str | None:
    """Receiver of a virtual call that passes arguments, which the call may store.

    This is a weak definition: the receiver keeps its earlier value as well.
    """
    match stmt:
        case VCallStmt(receiver=receiver, args=args) | Assign(
            rhs=VCallExpr(receiver=receiver, args=args)
        ) if args:
            return receiver
    return None


def is_call(stmt: Stmt) -> bool:
    """Whether a statement is a call site (with or without a destination)."""
    return isinstance(stmt, CallStmt | VCallStmt) or (
        isinstance(stmt, Assign) and isinstance(stmt.rhs, CallExpr | VCallExpr)
    )


def call_target(stmt: Stmt) -> Sig | str | None:
    """The static signature or the virtual method name of a call site."""
    match stmt:
        case CallStmt(callee=callee) | Assign(rhs=CallExpr(callee=callee)):
            return callee
        case VCallStmt(method=method) | Assign(rhs=VCallExpr(method=method)):
            return method
    return None


def call_receiver(stmt: Stmt) -> str | None:
    """Receiver variable of a virtual call site."""
    match stmt:
        case VCallStmt(receiver=receiver) | Assign(rhs=VCallExpr(receiver=receiver)):
            return receiver
    return None


def call_args(stmt: Stmt) -> tuple[str, ...]:
    """Arguments of a call site, excluding a virtual call's receiver."""
    match stmt:
        case CallStmt(args=args) | VCallStmt(args=args):
            return args
        case Assign(rhs=CallExpr(args=args) | VCallExpr(args=args)):
            return args
    return ()


@dataclass(frozen=True, slots=True)
class MethodDecl:
    """A method with its statement body."""

    name: str
    param_count: int
    body: tuple[Stmt, ...]
    line: int = 0

    @property
    def labels(self) -> dict[str, int]:
        """Label name to the body index of its Label statement."""
        return {stmt.name: stmt.index for stmt in self.body if isinstance(stmt, Label)}

    @property
    def statements(self) -> tuple[Stmt, ...]:
        """Body without labels: the statements that become graph nodes."""
        return tuple(stmt for stmt in self.body if not isinstance(stmt, Label))


@dataclass(frozen=True, slots=True)
class ClassDecl:
    """A class with its declared methods."""

    qname: str
    superclass: str | None
    methods: tuple[MethodDecl, ...]
    line: int = 0


@dataclass(frozen=True, slots=True)
class UiField:
    """A UI layout input field."""

    id: str
    hint: str
    input_type: str
    line: int = 0


@dataclass(frozen=True, slots=True)
class MethodRef:
    """A method located in the program: its ordinal, owning class and declaration."""

    ordinal: int
    owner: ClassDecl
    decl: MethodDecl

    @property
    def sig(self) -> Sig:
        """The method's own signature."""
        return Sig(self.owner.qname, self.decl.name)


@dataclass(frozen=True, slots=True)
class External:
    """A callee that is not declared in the program."""

    sig: Sig


@dataclass(frozen=True)
class Program:
    """A parsed µIR app."""

    app_id: str
    classes: tuple[ClassDecl, ...] = ()
    layout: tuple[UiField, ...] = ()
    _index: dict[str, ClassDecl] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_index", {cls.qname: cls for cls in self.classes})

    @cached_property
    def methods(self) -> tuple[MethodRef, ...]:
        """All methods in program order; a method's position is its ordinal."""
        refs = [(cls, method) for cls in self.classes for method in cls.methods]
        return tuple(MethodRef(i, cls, method) for i, (cls, method) in enumerate(refs))

    def find_class(self, qname: str) -> ClassDecl | None:
        """Get a declared class by qualified name."""
        return self._index.get(qname)

    def find_method(self, sig: Sig) -> MethodRef | None:
        """Get the method declared under exactly this signature."""
        return next((ref for ref in self.methods if ref.sig == sig), None)

    def method(self, ordinal: int) -> MethodRef:
        """Get a method by ordinal."""
        return self.methods[ordinal]

    def stmt_at(self, site: Site) -> Stmt:
        """Get the statement at an ADG site."""
        return self.methods[site.method].decl.body[site.stmt]

    def ui_field(self, field_id: str) -> UiField | None:
        """Get a layout field by id."""
        return next((f for f in self.layout if f.id == field_id), None)


def resolve_callee(program: Program, sig: Sig) -> MethodRef | External:
    """Internal iff the owner class is declared and declares the method name."""
    return program.find_method(sig) or External(sig)


def _format_rhs(rhs: Rhs) -> str:
    match rhs:
        case Const(value=str() as value):
            return json.dumps(value)
        case Const(value=value):
            return str(value)
        case Copy(var=var):
            return var
        case BinOp(op=op, left=left, right=right):
            return f"{left} {op} {right}"
        case CallExpr(callee=callee, args=args):
            return f"call {callee}({', '.join(args)})"
        case VCallExpr(receiver=receiver, method=method, args=args):
            return f"vcall {receiver}.{method}({', '.join(args)})"
        case UiRead(field_id=field_id):
            return f"uiread {json.dumps(field_id)}"
        case Param(index=index):
            return f"param {index}"


def format_stmt(stmt: Stmt) -> str:
    """µIR text of a statement."""
    match stmt:
        case Assign(dest=dest, rhs=rhs):
            return f"{dest} = {_format_rhs(rhs)}"
        case CallStmt(callee=callee, args=args):
            return f"call {callee}({', '.join(args)})"
        case VCallStmt(receiver=receiver, method=method, args=args):
            return f"vcall {receiver}.{method}({', '.join(args)})"
        case If(lhs=lhs, relop=relop, rhs=rhs, target=target):
            operand = rhs if isinstance(rhs, str) else _format_rhs(rhs)
            return f"if {lhs} {relop} {operand} goto {target}"
        case Goto(target=target):
            return f"goto {target}"
        case Label(name=name):
            return f"{name}:"
        case Return(var=None):
            return "return"
        case Return(var=var):
            return f"return {var}"
