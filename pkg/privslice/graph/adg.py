"""App dependence graph: per-method dependences joined by call and parameter edges."""

from collections.abc import Iterable
from dataclasses import dataclass

import networkx as nx
import structlog

from privslice.graph.callgraph import CallGraph
from privslice.graph.dependences import method_artifacts
from privslice.ir.model import Assign, Param, Program, Return, call_args, defined_var
from privslice.models import ENTRY_STMT, EdgeKind, Site

logger = structlog.get_logger(__name__)


@dataclass(frozen=True, order=True, slots=True)
class AdgEdge:
    """A typed dependence between two ADG nodes; `var` names the carried variable."""

    kind: EdgeKind
    src: Site
    dst: Site
    var: str = ""


@dataclass(frozen=True)
class Adg:
    """Nodes and edges in deterministic order."""

    program: Program
    call_graph: CallGraph
    nodes: tuple[Site, ...]
    edges: tuple[AdgEdge, ...]

    def graph(self, kinds: Iterable[EdgeKind]) -> nx.DiGraph:
        """Directed graph over all nodes restricted to the given edge kinds."""
        allowed = set(kinds)
        graph = nx.DiGraph()
        graph.add_nodes_from(self.nodes)
        graph.add_edges_from((e.src, e.dst) for e in self.edges if e.kind in allowed)
        return graph


def build_adg(program: Program, call_graph: CallGraph) -> Adg:
    """Assemble the ADG of a program.

    External call sites stay ordinary nodes; only internal call-graph edges
    add CALL, PARAM_IN and PARAM_OUT edges.
    """
    nodes: list[Site] = []
    edges: set[AdgEdge] = set()

    for ref in program.methods:
        artifacts = method_artifacts(ref.decl)
        nodes.append(Site(ref.ordinal, ENTRY_STMT))
        nodes.extend(Site(ref.ordinal, stmt.index) for stmt in ref.decl.statements)
        edges.update(
            AdgEdge(EdgeKind.CTRL, Site(ref.ordinal, a), Site(ref.ordinal, b))
            for a, b in artifacts.ctrl
        )
        edges.update(
            AdgEdge(EdgeKind.DATA, Site(ref.ordinal, d), Site(ref.ordinal, u), var)
            for d, u, var in artifacts.data
        )

    for site, ordinal in call_graph.internal_edges():
        caller = program.method(site.method)
        callee = program.method(ordinal)
        stmt = caller.decl.body[site.stmt]
        edges.add(AdgEdge(EdgeKind.CALL, site, Site(ordinal, ENTRY_STMT)))

        caller_artifacts = method_artifacts(caller.decl)
        for i, arg in enumerate(call_args(stmt)[: callee.decl.param_count]):
            params = [
                s.index
                for s in callee.decl.statements
                if isinstance(s, Assign) and isinstance(s.rhs, Param) and s.rhs.index == i
            ]
            for d in caller_artifacts.defs_reaching(site.stmt, arg):
                edges.update(
                    AdgEdge(EdgeKind.PARAM_IN, Site(site.method, d), Site(ordinal, p), arg)
                    for p in params
                )

        if (dest := defined_var(stmt)) is not None:
            edges.update(
                AdgEdge(EdgeKind.PARAM_OUT, Site(ordinal, s.index), site, dest)
                for s in callee.decl.statements
                if isinstance(s, Return) and s.var is not None
            )

    adg = Adg(program, call_graph, tuple(sorted(nodes)), tuple(sorted(edges)))
    logger.debug("adg_built", app_id=program.app_id, nodes=len(adg.nodes), edges=len(adg.edges))
    return adg
