"""Input classification: which statements bring personal data into the app."""

from dataclasses import replace

import structlog

from privslice.dataset import (
    ApiClassification,
    Dataset,
    SourceRule,
    UnknownApi,
    classify_signature,
    match_ui_field,
)
from privslice.graph.callgraph import CallGraph, ExternalCallee, build_call_graph
from privslice.ir.model import Assign, Program, Sig, UiRead
from privslice.models import Origin, Site, SourceLabel

logger = structlog.get_logger(__name__)

type SourceInventory = tuple[SourceLabel, ...]


def classify_site(call_graph: CallGraph, dataset: Dataset, site: Site) -> ApiClassification | None:
    """Dataset classification of an external call site; None for anything else."""
    match call_graph.callees(site):
        case (ExternalCallee(sig=None),):
            return UnknownApi()
        case (ExternalCallee(sig=Sig() as sig),):
            return classify_signature(dataset, sig)
    return None


def find_system_sources(program: Program, dataset: Dataset) -> list[SourceLabel]:
    """One label per external call site whose signature classifies as a source.

    Ids are provisional (0..n-1 in site order); classify_inputs renumbers.
    """
    call_graph = build_call_graph(program)
    labels = []
    for site in sorted(call_graph.edges):
        rule = classify_site(call_graph, dataset, site)
        if not isinstance(rule, SourceRule):
            continue
        sig = call_graph.external_signature(site)
        labels.append(
            SourceLabel(
                id=len(labels),
                site=site,
                kind=Origin.SYSTEM,
                category=rule.category,
                identifiability=rule.identifiability,
                signature_or_field=str(sig),
            )
        )
    return labels


def find_ui_sources(program: Program, dataset: Dataset) -> list[SourceLabel]:
    """One label per `uiread` whose layout field matches a UI keyword."""
    labels = []
    for ref in program.methods:
        for stmt in ref.decl.statements:
            if not (isinstance(stmt, Assign) and isinstance(stmt.rhs, UiRead)):
                continue
            ui_field = program.ui_field(stmt.rhs.field_id)
            if ui_field is None:
                logger.info(
                    "unresolved_uiread",
                    app_id=program.app_id,
                    field_id=stmt.rhs.field_id,
                    site=str(Site(ref.ordinal, stmt.index)),
                )
                continue
            hit = match_ui_field(dataset, ui_field)
            if hit is None:
                continue
            category, identifiability = hit
            labels.append(
                SourceLabel(
                    id=len(labels),
                    site=Site(ref.ordinal, stmt.index),
                    kind=Origin.USER,
                    category=category,
                    identifiability=identifiability,
                    signature_or_field=ui_field.id,
                )
            )
    return labels


def classify_inputs(program: Program, dataset: Dataset) -> SourceInventory:
    """System sources then user sources, with dense ids in that order."""
    labels = [*find_system_sources(program, dataset), *find_ui_sources(program, dataset)]
    inventory = tuple(replace(label, id=i) for i, label in enumerate(labels))
    logger.info(
        "inputs_classified",
        app_id=program.app_id,
        system=sum(label.kind == Origin.SYSTEM for label in inventory),
        user=sum(label.kind == Origin.USER for label in inventory),
    )
    return inventory
