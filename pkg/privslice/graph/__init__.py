"""Control flow, call graph, dependences and the app dependence graph."""

from privslice.graph.adg import Adg, AdgEdge, build_adg
from privslice.graph.callgraph import CallGraph, ExternalCallee, InternalCallee, build_call_graph
from privslice.graph.cfg import ENTRY, EXIT, Cfg, build_cfg
from privslice.graph.dependences import control_deps, data_deps, postdominators

__all__ = [
    "ENTRY",
    "EXIT",
    "Adg",
    "AdgEdge",
    "CallGraph",
    "Cfg",
    "ExternalCallee",
    "InternalCallee",
    "build_adg",
    "build_call_graph",
    "build_cfg",
    "control_deps",
    "data_deps",
    "postdominators",
]
