"""Forward slicing of the ADG from personal-data sources."""

from collections.abc import Iterable
from dataclasses import dataclass

import networkx as nx

from privslice.graph.adg import Adg, AdgEdge
from privslice.models import EdgeKind, Site, SourceLabel

FLOW_EDGE_KINDS = (EdgeKind.DATA, EdgeKind.CALL, EdgeKind.PARAM_IN, EdgeKind.PARAM_OUT)


def slice_edge_kinds(*, include_ctrl: bool) -> tuple[EdgeKind, ...]:
    """Edge kinds a slice follows."""
    return (*FLOW_EDGE_KINDS, EdgeKind.CTRL) if include_ctrl else FLOW_EDGE_KINDS


@dataclass(frozen=True)
class Slice:
    """Nodes reachable from the seed sources, with the edges among them."""

    seeds: tuple[int, ...]
    nodes: tuple[Site, ...]
    edges: tuple[AdgEdge, ...]

    def __contains__(self, site: object) -> bool:
        return site in self.nodes

    @property
    def is_empty(self) -> bool:
        """Whether the slice has no nodes."""
        return not self.nodes


def forward_slice(adg: Adg, inventory: Iterable[SourceLabel], *, include_ctrl: bool) -> Slice:
    """Slice the ADG forward from every label in `inventory`."""
    labels = list(inventory)
    kinds = slice_edge_kinds(include_ctrl=include_ctrl)
    graph = adg.graph(kinds)
    members: set[Site] = set()
    for label in labels:
        if label.site in members:
            continue
        members.add(label.site)
        members |= nx.descendants(graph, label.site)
    edges = tuple(e for e in adg.edges if e.kind in kinds and e.src in members)
    return Slice(tuple(sorted(label.id for label in labels)), tuple(sorted(members)), edges)
