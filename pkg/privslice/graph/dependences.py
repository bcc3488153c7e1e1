"""Intraprocedural control and data dependences."""

from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import networkx as nx

from privslice.graph.cfg import EXIT, Cfg, build_cfg
from privslice.ir.model import MethodDecl, defined_var, updated_receiver, uses

type Definition = tuple[int, str]  # (defining statement, variable)


def postdominators(cfg: Cfg) -> dict[int, int]:
    """Immediate postdominator of every node except EXIT."""
    idom = nx.immediate_dominators(cfg.graph.reverse(copy=False), EXIT)
    return {node: parent for node, parent in idom.items() if node != EXIT}


def control_deps(cfg: Cfg, pdom: dict[int, int]) -> set[tuple[int, int]]:
    """(controller, dependent) pairs between statements.

    For every edge a -> s, the nodes on the postdominator tree path from s up to
    (excluding) ipdom(a) are control-dependent on a.
    """
    deps = set()
    for a, s in cfg.graph.edges:
        if a < 0:
            continue
        stop = pdom[a]
        runner = s
        while runner not in (stop, EXIT):
            if runner >= 0:
                deps.add((a, runner))
            runner = pdom[runner]
    return deps


def reaching_definitions(cfg: Cfg) -> dict[int, frozenset[Definition]]:
    """Definitions reaching the entry of every node."""
    body = cfg.method.body
    defs_of: dict[str, set[Definition]] = {}
    for stmt in cfg.method.statements:
        for var in (defined_var(stmt), updated_receiver(stmt)):
            if var is not None:
                defs_of.setdefault(var, set()).add((stmt.index, var))

    out: dict[int, frozenset[Definition]] = {n: frozenset() for n in cfg.graph}
    reach_in: dict[int, frozenset[Definition]] = dict(out)
    worklist = deque(cfg.statement_nodes)
    queued = set(worklist)
    while worklist:
        node = worklist.popleft()
        queued.discard(node)
        incoming = frozenset().union(*(out[p] for p in cfg.graph.predecessors(node)))
        reach_in[node] = incoming
        new_out = incoming
        if (var := defined_var(body[node])) is not None:
            new_out = (new_out - defs_of[var]) | {(node, var)}
        if (receiver := updated_receiver(body[node])) is not None:
            new_out = new_out | {(node, receiver)}
        if new_out != out[node]:
            out[node] = new_out
            for succ in cfg.graph.successors(node):
                if succ >= 0 and succ not in queued:
                    worklist.append(succ)
                    queued.add(succ)
    reach_in[EXIT] = frozenset().union(*(out[p] for p in cfg.graph.predecessors(EXIT)))
    return reach_in


def data_deps(cfg: Cfg, method: MethodDecl) -> set[tuple[int, int, str]]:
    """(definition, use, variable) triples for every definition reaching a use."""
    reach_in = reaching_definitions(cfg)
    deps = set()
    for stmt in method.statements:
        for var in uses(stmt):
            deps.update((d, stmt.index, var) for d, v in reach_in[stmt.index] if v == var)
    return deps


@dataclass(frozen=True)
class MethodArtifacts:
    """Everything computed once per method declaration."""

    cfg: Cfg
    pdom: dict[int, int]
    ctrl: frozenset[tuple[int, int]]
    data: frozenset[tuple[int, int, str]]
    reaching: dict[int, frozenset[Definition]]

    def defs_reaching(self, index: int, var: str) -> list[int]:
        """Statements whose definition of `var` reaches statement `index`, in body order."""
        return sorted(d for d, v in self.reaching[index] if v == var)


@lru_cache(maxsize=256)
def method_artifacts(method: MethodDecl) -> MethodArtifacts:
    """CFG, postdominators and dependences of a method."""
    cfg = build_cfg(method)
    pdom = postdominators(cfg)
    return MethodArtifacts(
        cfg=cfg,
        pdom=pdom,
        ctrl=frozenset(control_deps(cfg, pdom)),
        data=frozenset(data_deps(cfg, method)),
        reaching=reaching_definitions(cfg),
    )

