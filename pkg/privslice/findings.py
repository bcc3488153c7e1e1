"""Data protection findings: pseudonymization checks, combination, derivation and manipulation."""

from collections.abc import Iterable
from dataclasses import dataclass
from itertools import combinations
from typing import TYPE_CHECKING

from privslice.classifier import SourceInventory, classify_site
from privslice.dataset import Dataset, ManipRule, PseudoRule, SinkRule
from privslice.graph.callgraph import ExternalCallee, build_call_graph
from privslice.graph.dependences import method_artifacts
from privslice.ir.model import Assign, BinOp, Const, Copy, Program, Sig, call_target, uses
from privslice.models import (
    Channel,
    Finding,
    FindingKind,
    Grade,
    Identifiability,
    ManipulationKind,
    ManipulationProfile,
    Site,
    Status,
)

if TYPE_CHECKING:
    from privslice.slicer import Slice
    from privslice.taint import SinkFacts, TaintState

WEAK_ALGORITHMS = frozenset({"MD5", "SHA-1"})
FACTORY_METHOD = "getInstance"


@dataclass(frozen=True, slots=True)
class PseudonymizerSite:
    """A call site labeled as a pseudonymization method."""

    site: Site
    signature: str
    rule: str
    grade: Grade


def _names_weak_algorithm(program: Program, site: Site) -> bool:
    ref = program.method(site.method)
    artifacts = method_artifacts(ref.decl)
    pending = [site.stmt]
    seen = {site.stmt}
    while pending:
        index = pending.pop()
        for var in uses(ref.decl.body[index]):
            for d in artifacts.defs_reaching(index, var):
                definition = ref.decl.body[d]
                if not isinstance(definition, Assign):
                    continue
                match definition.rhs:
                    case Const(value=str() as value) if value in WEAK_ALGORITHMS:
                        return True
                target = call_target(definition)
                name = target.name if isinstance(target, Sig) else target
                # factory calls are followed to their own arguments, once each
                if name == FACTORY_METHOD and d not in seen:
                    seen.add(d)
                    pending.append(d)
    return False


def grade_pseudonymizer_call(program: Program, dataset: Dataset, site: Site) -> Grade:
    """Grade of a pseudonymizer call: weak when it is configured with MD5 or SHA-1.

    The algorithm constant may reach the call directly or reach the
    `getInstance` call that defines one of its operands (its receiver, typically).
    Otherwise the rule's grade applies.
    """
    rule = classify_site(build_call_graph(program), dataset, site)
    if not isinstance(rule, PseudoRule):
        msg = f"{site} is not a pseudonymizer call"
        raise ValueError(msg)
    return Grade.WEAK if _names_weak_algorithm(program, site) else rule.grade


def label_pseudonymizers(program: Program, dataset: Dataset) -> list[PseudonymizerSite]:
    """Every call site matching a pseudonymizer rule, graded, in site order."""
    call_graph = build_call_graph(program)
    labeled = []
    for site in sorted(call_graph.edges):
        rule = classify_site(call_graph, dataset, site)
        if isinstance(rule, PseudoRule):
            labeled.append(
                PseudonymizerSite(
                    site=site,
                    signature=str(call_graph.external_signature(site)),
                    rule=rule.signature_prefix,
                    grade=grade_pseudonymizer_call(program, dataset, site),
                )
            )
    return labeled


def inventory_findings(inventory: SourceInventory) -> list[Finding]:
    """One SOURCE_INVENTORY finding per label."""
    return [
        Finding(
            FindingKind.SOURCE_INVENTORY,
            label.site,
            (label.id,),
            {"category": label.category, "identifiability": label.identifiability.value},
        )
        for label in inventory
    ]


def check_pseudonymization(state: "TaintState", sinks: Iterable["SinkFacts"]) -> list[Finding]:
    """Per (sink, source): shared raw, raw on some paths, or only weakly pseudonymized?"""
    findings = []
    for sink in sinks:
        grouped = sink.by_source()
        for source in (label.id for label in state.inventory if label.id in grouped):
            facts = grouped[source]
            raw = any(fact.status == Status.RAW for fact in facts)
            pseudonymized = any(fact.status == Status.PSEUDONYMIZED for fact in facts)
            # a robust path next to a weak one is not reported
            weak = all(fact.grade == Grade.WEAK for fact in facts)
            detail: dict[str, object] = {"channel": sink.channel.value}
            if raw and not pseudonymized:
                kind = FindingKind.SHARED_BEFORE_PSEUDONYMIZED
            elif raw:
                kind = FindingKind.NOT_PSEUDONYMIZED_ALL_PATHS
            elif weak:
                kind = FindingKind.WEAK_PSEUDONYMIZATION
                detail["grade"] = Grade.WEAK.value
            else:
                continue
            findings.append(Finding(kind, sink.site, (source,), detail))
    return findings


def _combining_site(program: Program, site: Site) -> bool:
    stmt = program.stmt_at(site)
    if isinstance(stmt, Assign) and isinstance(stmt.rhs, BinOp):
        return True
    callees = build_call_graph(program).callees(site)
    return bool(callees) and all(isinstance(c, ExternalCallee) for c in callees)


def detect_combination(state: "TaintState") -> list[Finding]:
    """Statements where two operands carry different indirect identifiers."""
    program = state.program
    findings = []
    for site in sorted(state.env_in):
        if not _combining_site(program, site):
            continue
        operands = dict.fromkeys(uses(program.stmt_at(site)))
        indirect = []
        for var in operands:
            sources = frozenset(
                fact.source
                for fact in state.facts_in(site, var)
                if state.label(fact.source).identifiability == Identifiability.INDIRECT
            )
            if sources:
                indirect.append(sources)
        if not any(len(a | b) >= 2 for a, b in combinations(indirect, 2)):
            continue
        involved = sorted(frozenset[int]().union(*indirect))
        categories = sorted({state.label(source).category for source in involved})
        findings.append(
            Finding(
                FindingKind.COMBINATION_OF_INDIRECT_IDENTIFIERS,
                site,
                tuple(involved),
                {"categories": categories},
            )
        )
    return findings


def detect_derived_sharing(state: "TaintState", sinks: Iterable["SinkFacts"]) -> list[Finding]:
    """Per (sink, source) whose shared facts were derived from personal data."""
    known = [label.id for label in state.inventory]
    return [
        Finding(
            FindingKind.DERIVED_DATA_SHARED,
            sink.site,
            (source,),
            {"channel": sink.channel.value},
        )
        for sink in sinks
        for source in known
        if any(fact.derived for fact in sink.by_source().get(source, ()))
    ]


def classify_manipulations(
    program: Program, slice_: "Slice", state: "TaintState", dataset: Dataset
) -> ManipulationProfile:
    """Group the nodes of a slice by the manipulation they apply to personal data."""
    call_graph = build_call_graph(program)
    source_sites = {label.site for label in state.inventory}
    kinds: dict[ManipulationKind, list[Site]] = {kind: [] for kind in ManipulationKind}
    for site in slice_.nodes:
        if site.is_entry:
            continue
        if site in source_sites:
            kinds[ManipulationKind.GENERATION].append(site)
            continue
        stmt = program.stmt_at(site)
        tainted = bool(state.inputs(site))
        if not tainted:
            continue
        match stmt:
            case Assign(rhs=BinOp()):
                kinds[ManipulationKind.DERIVATION].append(site)
            case Assign(rhs=Copy()):
                kinds[ManipulationKind.REPLICATION].append(site)
        match classify_site(call_graph, dataset, site):
            case ManipRule(kind=kind):
                kinds[kind].append(site)
            case SinkRule(channel=channel):
                kinds[ManipulationKind.SHARING].append(site)
                if channel == Channel.STORAGE:
                    kinds[ManipulationKind.RETENTION].append(site)
    return ManipulationProfile({kind: tuple(sites) for kind, sites in kinds.items()})


def profile_finding(label_id: int, site: Site, profile: ManipulationProfile) -> Finding:
    """MANIPULATION_PROFILE finding of one source's slice."""
    counts = {kind.value: count for kind, count in profile.counts().items()}
    return Finding(FindingKind.MANIPULATION_PROFILE, site, (label_id,), {"counts": counts})


def sort_findings(findings: Iterable[Finding]) -> list[Finding]:
    """Report order: kind, method, statement, sources; duplicates dropped."""
    unique = {finding.key: finding for finding in findings}
    return sorted(unique.values(), key=lambda finding: finding.sort_key)
