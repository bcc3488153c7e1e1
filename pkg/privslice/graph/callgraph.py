"""Class-hierarchy call graph."""

from collections.abc import Iterator
from dataclasses import dataclass, field
from functools import lru_cache

import structlog

from privslice.graph.dependences import method_artifacts
from privslice.ir.model import (
    Assign,
    CallExpr,
    External,
    MethodRef,
    Program,
    Sig,
    call_receiver,
    call_target,
    defined_var,
    is_call,
    resolve_callee,
    updated_receiver,
)
from privslice.models import Site

logger = structlog.get_logger(__name__)


@dataclass(frozen=True, order=True, slots=True)
class InternalCallee:
    """A callee declared in the program."""

    ordinal: int


@dataclass(frozen=True, slots=True)
class ExternalCallee:
    """A callee outside the program; `sig` is None when a virtual call cannot be resolved."""

    sig: Sig | None


type Callee = InternalCallee | ExternalCallee


@dataclass(frozen=True)
class CallGraph:
    """Callees of every call site, keyed by site."""

    edges: dict[Site, tuple[Callee, ...]]
    callers: dict[int, tuple[Site, ...]] = field(default_factory=dict)

    def callees(self, site: Site) -> tuple[Callee, ...]:
        """Callees of a call site; empty for non-call statements."""
        return self.edges.get(site, ())

    def internal_edges(self) -> Iterator[tuple[Site, int]]:
        """(call site, callee ordinal) pairs in site order."""
        for site in sorted(self.edges):
            for callee in self.edges[site]:
                if isinstance(callee, InternalCallee):
                    yield site, callee.ordinal

    def external_signature(self, site: Site) -> Sig | None:
        """Signature of a call site that only reaches code outside the program."""
        match self.callees(site):
            case (ExternalCallee(sig=sig),):
                return sig
        return None


def _receiver_owner(program: Program, ref: MethodRef, index: int, receiver: str) -> str | None:
    # The receiver's class is known when every reaching definition is a static
    # external call on one owner, e.g. `r3 = call java.security.MessageDigest.getInstance(r2)`.
    artifacts = method_artifacts(ref.decl)
    owners = set()
    for d in artifacts.defs_reaching(index, receiver):
        stmt = ref.decl.body[d]
        if updated_receiver(stmt) == receiver and defined_var(stmt) != receiver:
            continue
        if not (isinstance(stmt, Assign) and isinstance(stmt.rhs, CallExpr)):
            return None
        if not isinstance(resolve_callee(program, stmt.rhs.callee), External):
            return None
        owners.add(stmt.rhs.callee.owner)
    return owners.pop() if len(owners) == 1 else None


def _virtual_callees(
    program: Program, ref: MethodRef, index: int, receiver: str, method: str
) -> tuple[Callee, ...]:
    targets = tuple(InternalCallee(m.ordinal) for m in program.methods if m.decl.name == method)
    if targets:
        return targets
    owner = _receiver_owner(program, ref, index, receiver)
    return (ExternalCallee(Sig(owner, method) if owner else None),)


@lru_cache(maxsize=32)
def build_call_graph(program: Program) -> CallGraph:
    """Resolve every call site of a program.

    Static calls resolve through `resolve_callee`. Virtual calls resolve by
    class hierarchy analysis: the receiver's class is unknown, so every
    declared method of that name is a possible callee. A virtual call with no
    declared target is external; its signature is inferred from the receiver's
    defining call when that is unambiguous.
    """
    edges: dict[Site, tuple[Callee, ...]] = {}
    callers: dict[int, list[Site]] = {}
    for ref in program.methods:
        for stmt in ref.decl.statements:
            if not is_call(stmt):
                continue
            site = Site(ref.ordinal, stmt.index)
            target = call_target(stmt)
            if isinstance(target, Sig):
                resolved = resolve_callee(program, target)
                callees: tuple[Callee, ...] = (
                    (ExternalCallee(resolved.sig),)
                    if isinstance(resolved, External)
                    else (InternalCallee(resolved.ordinal),)
                )
            else:
                receiver = call_receiver(stmt) or ""
                callees = _virtual_callees(program, ref, stmt.index, receiver, str(target))
            edges[site] = callees
            for callee in callees:
                if isinstance(callee, InternalCallee):
                    callers.setdefault(callee.ordinal, []).append(site)

    logger.debug(
        "call_graph_built",
        app_id=program.app_id,
        call_sites=len(edges),
        internal_edges=sum(len(sites) for sites in callers.values()),
    )
    return CallGraph(edges, {m: tuple(sites) for m, sites in callers.items()})
