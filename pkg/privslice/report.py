"""Analysis results and their renderings: the JSON report and DOT slices."""

import json
import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from enum import Enum

import pydot

from privslice.classifier import SourceInventory, classify_site
from privslice.dataset import Dataset, SinkRule
from privslice.errors import OutputError
from privslice.findings import PseudonymizerSite
from privslice.graph.adg import Adg
from privslice.ir.model import Program, format_stmt
from privslice.models import EdgeKind, Finding, ManipulationProfile, Site
from privslice.slicer import Slice

SCHEMA_VERSION = "1.0"
MERGED = "merged"
_UNSAFE_NAME = re.compile(r"[^A-Za-z0-9._-]")


@dataclass(frozen=True)
class AnalysisResult:
    """Everything one analysis of an app produced."""

    program: Program
    dataset: Dataset
    adg: Adg
    inventory: SourceInventory
    pseudonymizers: tuple[PseudonymizerSite, ...]
    slices: Mapping[str, Slice]  # source id as text, plus MERGED
    findings: tuple[Finding, ...]
    profile: ManipulationProfile
    timings: Mapping[str, float] | None = None

    @property
    def app_id(self) -> str:
        """Id of the analyzed app."""
        return self.program.app_id

    @property
    def has_risk(self) -> bool:
        """Whether any finding signals a data protection risk."""
        return any(finding.kind.is_risk for finding in self.findings)


def site_json(program: Program, site: Site) -> dict[str, object]:
    """A site as it appears in reports; ENTRY nodes have statement -1."""
    ref = program.method(site.method)
    return {"class": ref.owner.qname, "method": ref.decl.name, "stmt": site.stmt}


def report_document(result: AnalysisResult) -> dict[str, object]:
    """The report of one app as a JSON-compatible document."""
    program = result.program
    document: dict[str, object] = {
        "schema_version": SCHEMA_VERSION,
        "app_id": result.app_id,
        "sources": [
            {
                "id": label.id,
                "kind": label.kind.value,
                "category": label.category,
                "identifiability": label.identifiability.value,
                "signature": label.signature_or_field,
                "site": site_json(program, label.site),
            }
            for label in result.inventory
        ],
        "pseudonymizers": [
            {
                "signature": p.signature,
                "rule": p.rule,
                "grade": p.grade.value,
                "site": site_json(program, p.site),
            }
            for p in result.pseudonymizers
        ],
        "findings": [
            {
                "kind": finding.kind.value,
                "site": site_json(program, finding.site),
                "sources": list(finding.sources),
                "detail": dict(finding.detail),
            }
            for finding in result.findings
        ],
        "manipulation_profile": {
            kind.value: [site_json(program, site) for site in sites]
            for kind, sites in result.profile.kinds.items()
        },
        "slices": {
            key: [site_json(program, site) for site in slice_.nodes]
            for key, slice_ in result.slices.items()
        },
    }
    if result.timings is not None:
        document["timings"] = dict(result.timings)
    return document


def render_report(result: AnalysisResult) -> str:
    """Canonical JSON report: sorted keys, two-space indent, trailing newline."""
    return json.dumps(report_document(result), indent=2, sort_keys=True) + "\n"


def render_reports(results: list[AnalysisResult]) -> str:
    """Canonical JSON array of several reports, in the given order."""
    return json.dumps([report_document(r) for r in results], indent=2, sort_keys=True) + "\n"


class NodeRole(str, Enum):
    """How a slice node is drawn."""

    SOURCE = "source"
    PSEUDONYMIZER = "pseudonymizer"
    SINK = "sink"
    OTHER = "other"

    @property
    def shape(self) -> str:
        """Graphviz node shape."""
        return _SHAPES[self]

    @property
    def color(self) -> str:
        """Graphviz fill color."""
        return _COLORS[self]


_SHAPES = {
    NodeRole.SOURCE: "doubleoctagon",
    NodeRole.PSEUDONYMIZER: "hexagon",
    NodeRole.SINK: "box",
    NodeRole.OTHER: "ellipse",
}
_COLORS = {
    NodeRole.SOURCE: "#f4a6a6",
    NodeRole.PSEUDONYMIZER: "#a6d4f4",
    NodeRole.SINK: "#f4d6a6",
    NodeRole.OTHER: "#ffffff",
}
_EDGE_STYLES = {
    EdgeKind.DATA: "solid",
    EdgeKind.CTRL: "dashed",
    EdgeKind.CALL: "dotted",
    EdgeKind.PARAM_IN: "dotted",
    EdgeKind.PARAM_OUT: "dotted",
}


@dataclass(frozen=True, slots=True)
class NodeLabel:
    """Text and role of a DOT node."""

    text: str
    role: NodeRole


def dot_id(site: Site) -> str:
    """Stable DOT node id of a site."""
    if site.is_entry:
        return f"m{site.method}_entry"
    return f"m{site.method}_s{site.stmt}"


def node_labels(result: AnalysisResult) -> dict[Site, NodeLabel]:
    """Text and role of every ADG node."""
    program = result.program
    call_graph = result.adg.call_graph
    sources = {label.site for label in result.inventory}
    pseudonymizers = {p.site for p in result.pseudonymizers}
    labels = {}
    for site in result.adg.nodes:
        ref = program.method(site.method)
        if site.is_entry:
            labels[site] = NodeLabel(f"ENTRY {ref.sig}", NodeRole.OTHER)
            continue
        text = format_stmt(ref.decl.body[site.stmt]).replace('"', "'")
        if site in sources:
            role = NodeRole.SOURCE
        elif site in pseudonymizers:
            role = NodeRole.PSEUDONYMIZER
        elif isinstance(classify_site(call_graph, result.dataset, site), SinkRule):
            role = NodeRole.SINK
        else:
            role = NodeRole.OTHER
        labels[site] = NodeLabel(f"{ref.decl.name}:{site.stmt} {text}", role)
    return labels


def render_dot(slice_: Slice, labels: Mapping[Site, NodeLabel]) -> str:
    """DOT digraph of a slice, nodes and edges in ADG order."""
    graph = pydot.Dot("slice", graph_type="digraph")
    for site in slice_.nodes:
        label = labels[site]
        graph.add_node(
            pydot.Node(
                dot_id(site),
                label=label.text,
                shape=label.role.shape,
                style="filled",
                fillcolor=label.role.color,
            )
        )
    for edge in slice_.edges:
        graph.add_edge(
            pydot.Edge(dot_id(edge.src), dot_id(edge.dst), style=_EDGE_STYLES[edge.kind])
        )
    return graph.to_string()


def dot_stem(app_id: str) -> str:
    """File name stem for an app id: only letters, digits, `.`, `_` and `-`, never a leading dot."""
    stem = _UNSAFE_NAME.sub("_", app_id)
    return stem if stem and not stem.startswith(".") else f"_{stem}"


def render_dots(result: AnalysisResult) -> dict[str, str]:
    """DOT text per file name: one per source and one merged."""
    labels = node_labels(result)
    stem = dot_stem(result.app_id)
    dots = {}
    for key, slice_ in result.slices.items():
        name = key if key == MERGED else f"source{key}"
        dots[f"{stem}.{name}.dot"] = render_dot(slice_, labels)
    return dots


def render_all_dots(results: Iterable[AnalysisResult]) -> dict[str, str]:
    """DOT files of several apps; two apps mapping to one file name is an error."""
    dots: dict[str, str] = {}
    owners: dict[str, str] = {}
    for result in results:
        for name, text in render_dots(result).items():
            if name in owners:
                msg = f"apps {owners[name]!r} and {result.app_id!r} both write {name}"
                raise OutputError(msg)
            owners[name] = result.app_id
            dots[name] = text
    return dots
