"""Per-method control flow graphs."""

from dataclasses import dataclass

import networkx as nx

from privslice.ir.model import Goto, If, Label, MethodDecl, Return

ENTRY = -1
EXIT = -2


@dataclass(frozen=True)
class Cfg:
    """Control flow graph over body indices of one method.

    Labels are not nodes. ENTRY and EXIT are synthetic; every node reaches EXIT.
    """

    method: MethodDecl
    graph: nx.DiGraph

    @property
    def statement_nodes(self) -> list[int]:
        """Statement nodes in body order."""
        return sorted(n for n in self.graph if n >= 0)

    def successors(self, node: int) -> list[int]:
        """Successors of a node, statements in body order before EXIT."""
        return sorted(self.graph.successors(node), key=_node_order)

    def predecessors(self, node: int) -> list[int]:
        """Predecessors of a node, ENTRY first."""
        return sorted(self.graph.predecessors(node), key=_node_order)

    def reachable(self) -> list[int]:
        """Statement nodes reachable from ENTRY, in body order."""
        return sorted(n for n in nx.descendants(self.graph, ENTRY) if n >= 0)


def _node_order(node: int) -> tuple[int, int]:
    return (1, 0) if node == EXIT else (0, node)


def build_cfg(method: MethodDecl) -> Cfg:
    """Build the augmented control flow graph of a method."""
    body = method.body

    def next_node(index: int) -> int:
        # first non-label statement at or after `index`; labels fall through
        while index < len(body) and isinstance(body[index], Label):
            index += 1
        return index if index < len(body) else EXIT

    labels = method.labels
    graph = nx.DiGraph()
    graph.add_nodes_from([ENTRY, EXIT])
    graph.add_edge(ENTRY, next_node(0))

    for stmt in method.statements:
        graph.add_node(stmt.index)
        fallthrough = next_node(stmt.index + 1)
        match stmt:
            case Return():
                graph.add_edge(stmt.index, EXIT)
            case Goto(target=target):
                graph.add_edge(stmt.index, next_node(labels[target]))
            case If(target=target):
                graph.add_edge(stmt.index, fallthrough)
                graph.add_edge(stmt.index, next_node(labels[target]))
            case _:
                graph.add_edge(stmt.index, fallthrough)

    # connect nodes trapped in non-terminating loops
    for node in [*(stmt.index for stmt in method.statements), ENTRY]:
        if not nx.has_path(graph, node, EXIT):
            graph.add_edge(node, EXIT)

    return Cfg(method, graph)
