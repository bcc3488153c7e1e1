"""Per-source taint propagation with disguise status and derivation flag."""

from collections import deque
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

import structlog

from privslice.classifier import SourceInventory, classify_site
from privslice.dataset import (
    ApiClassification,
    Dataset,
    PseudoRule,
    SinkRule,
    SourceRule,
    UnknownApi,
)
from privslice.errors import AnalysisError
from privslice.findings import grade_pseudonymizer_call
from privslice.graph.adg import Adg
from privslice.graph.callgraph import CallGraph, InternalCallee, build_call_graph
from privslice.graph.dependences import method_artifacts
from privslice.ir.model import (
    Assign,
    BinOp,
    CallExpr,
    Const,
    Copy,
    Param,
    Program,
    Return,
    Rhs,
    Stmt,
    UiRead,
    VCallExpr,
    call_args,
    defined_var,
    updated_receiver,
    uses,
)
from privslice.models import Channel, Grade, Site, SourceLabel, TaintFact

logger = structlog.get_logger(__name__)

type Facts = frozenset[TaintFact]
type Env = Mapping[str, Facts]

NO_FACTS: Facts = frozenset()
FACTS_PER_SOURCE = 6  # {raw, weak, robust} x {underived, derived}


def derived(facts: Iterable[TaintFact]) -> Facts:
    """Facts of a value computed from the given facts."""
    return frozenset(fact.as_derived() for fact in facts)


def join(envs: Iterable[Env]) -> dict[str, Facts]:
    """Pointwise union of environments."""
    joined: dict[str, Facts] = {}
    for env in envs:
        for var, facts in env.items():
            joined[var] = joined.get(var, NO_FACTS) | facts
    return joined


@dataclass
class Effects:
    """Interprocedural contributions of one statement."""

    params: list[tuple[int, int, Facts]] = field(default_factory=list)
    returned: Facts = NO_FACTS


class TaintTransfer:
    """Transfer functions of the taint analysis, one statement at a time."""

    def __init__(
        self, program: Program, call_graph: CallGraph, dataset: Dataset, inventory: SourceInventory
    ) -> None:
        self.program = program
        self.call_graph = call_graph
        self.labels: dict[Site, SourceLabel] = {label.site: label for label in inventory}
        self.classes: dict[Site, ApiClassification] = {}
        # How a call treats its inputs. A source call adds its own fact on top of
        # whatever the API does to its inputs when no source rule claims it.
        self.input_classes: dict[Site, ApiClassification] = {}
        self.grades: dict[Site, Grade] = {}
        without_sources = dataset.model_copy(update={"sources": ()})
        for site in call_graph.edges:
            classification = classify_site(call_graph, dataset, site)
            if classification is None:
                continue
            self.classes[site] = classification
            rules = without_sources if isinstance(classification, SourceRule) else dataset
            input_class = classify_site(call_graph, rules, site) or UnknownApi()
            self.input_classes[site] = input_class
            if isinstance(input_class, PseudoRule):
                self.grades[site] = grade_pseudonymizer_call(program, rules, site)

    def apply(
        self,
        site: Site,
        env: Env,
        param_facts: Mapping[tuple[int, int], Facts],
        return_facts: Mapping[int, Facts],
    ) -> tuple[dict[str, Facts], Effects]:
        """Out-environment and interprocedural effects of the statement at `site`."""
        stmt = self.program.stmt_at(site)
        out = dict(env)
        effects = Effects()
        match stmt:
            case Assign(dest=dest, rhs=rhs):
                facts = self._rhs(site, rhs, stmt, env, param_facts, return_facts, effects)
                if facts:
                    out[dest] = facts
                else:
                    out.pop(dest, None)
            case Return(var=str() as var):
                effects.returned = env.get(var, NO_FACTS)
            case _ if site in self.call_graph.edges:
                self._call(site, stmt, env, return_facts, effects)
        self._store_in_receiver(site, stmt, env, out)
        return out, effects

    def _rhs(
        self,
        site: Site,
        rhs: Rhs,
        stmt: Assign,
        env: Env,
        param_facts: Mapping[tuple[int, int], Facts],
        return_facts: Mapping[int, Facts],
        effects: Effects,
    ) -> Facts:
        match rhs:
            case Const():
                return NO_FACTS
            case Copy(var=var):
                return env.get(var, NO_FACTS)
            case BinOp(left=left, right=right):
                return derived(env.get(left, NO_FACTS) | env.get(right, NO_FACTS))
            case UiRead():
                label = self.labels.get(site)
                return frozenset({TaintFact(label.id)}) if label else NO_FACTS
            case Param(index=index):
                return param_facts.get((site.method, index), NO_FACTS)
            case CallExpr() | VCallExpr():
                return self._call(site, stmt, env, return_facts, effects)
        return NO_FACTS

    def _internal_callees(self, site: Site) -> list[InternalCallee]:
        return [c for c in self.call_graph.callees(site) if isinstance(c, InternalCallee)]

    def _external(self, site: Site, inputs: Facts) -> Facts:
        match self.input_classes.get(site):
            case PseudoRule():
                grade = self.grades[site]
                return frozenset(fact.pseudonymized(grade) for fact in inputs)
        return derived(inputs)

    def _call(
        self,
        site: Site,
        stmt: Stmt,
        env: Env,
        return_facts: Mapping[int, Facts],
        effects: Effects,
    ) -> Facts:
        if callees := self._internal_callees(site):
            result = NO_FACTS
            args = call_args(stmt)
            for callee in callees:
                count = self.program.method(callee.ordinal).decl.param_count
                for i, arg in enumerate(args[:count]):
                    if facts := env.get(arg, NO_FACTS):
                        effects.params.append((callee.ordinal, i, facts))
                result |= return_facts.get(callee.ordinal, NO_FACTS)
            return result

        inputs = frozenset().union(*(env.get(var, NO_FACTS) for var in uses(stmt)))
        own = NO_FACTS
        if isinstance(self.classes.get(site), SourceRule) and (label := self.labels.get(site)):
            own = frozenset({TaintFact(label.id)})
        return own | self._external(site, inputs)

    def _store_in_receiver(self, site: Site, stmt: Stmt, env: Env, out: dict[str, Facts]) -> None:
        """An external virtual call may keep its arguments in its receiver.

        The receiver gains the arguments' facts, transformed as the call's
        result would be, and keeps the facts it had. Sinks send their
        arguments out instead.
        """
        receiver = updated_receiver(stmt)
        if receiver is None or receiver == defined_var(stmt) or self._internal_callees(site):
            return
        if isinstance(self.input_classes.get(site), SinkRule):
            return
        stored = frozenset().union(*(env.get(arg, NO_FACTS) for arg in call_args(stmt)))
        if stored:
            out[receiver] = out.get(receiver, NO_FACTS) | self._external(site, stored)


@dataclass(frozen=True)
class TaintState:
    """Facts per variable before and after every reachable statement."""

    program: Program
    inventory: SourceInventory
    env_in: Mapping[Site, Env]
    env_out: Mapping[Site, Env]
    iterations: int = 0
    iteration_bound: int = 0

    def facts_in(self, site: Site, var: str) -> Facts:
        """Facts of `var` on entry to `site`."""
        return self.env_in.get(site, {}).get(var, NO_FACTS)

    def facts_out(self, site: Site, var: str) -> Facts:
        """Facts of `var` after `site`."""
        return self.env_out.get(site, {}).get(var, NO_FACTS)

    def inputs(self, site: Site) -> Facts:
        """Union of the facts of every variable `site` reads."""
        stmt = self.program.stmt_at(site)
        return frozenset().union(*(self.facts_in(site, var) for var in uses(stmt)))

    def label(self, source: int) -> SourceLabel:
        """The inventory label of a source id."""
        return self.inventory[source]

    def all_facts(self) -> set[tuple[Site, str, TaintFact]]:
        """Every (site, variable, fact) triple after a statement."""
        return {
            (site, var, fact)
            for site, env in self.env_out.items()
            for var, facts in env.items()
            for fact in facts
        }


def _variables(program: Program) -> set[str]:
    return {
        var
        for ref in program.methods
        for stmt in ref.decl.statements
        for var in (*uses(stmt), *([stmt.dest] if isinstance(stmt, Assign) else []))
    }


def propagate_taint(
    program: Program, adg: Adg, inventory: SourceInventory, dataset: Dataset
) -> TaintState:
    """Flow-sensitive, context-insensitive fixpoint over all reachable statements.

    Parameters and return values are summarized per method: facts of every
    actual argument flow into the callee's `param` statements, and facts of
    every returned variable flow back to every caller.
    """
    call_graph = adg.call_graph
    transfer = TaintTransfer(program, call_graph, dataset, inventory)

    order: list[Site] = []
    param_sites: dict[int, list[Site]] = {}
    for ref in program.methods:
        for index in method_artifacts(ref.decl).cfg.reachable():
            site = Site(ref.ordinal, index)
            order.append(site)
            stmt = ref.decl.body[index]
            if isinstance(stmt, Assign) and isinstance(stmt.rhs, Param):
                param_sites.setdefault(ref.ordinal, []).append(site)
    reachable = set(order)

    iteration_bound = (
        max(1, len(order))
        * max(1, len(_variables(program)))
        * max(1, FACTS_PER_SOURCE * len(inventory))
    )

    env_in: dict[Site, dict[str, Facts]] = {}
    env_out: dict[Site, dict[str, Facts]] = {}
    param_facts: dict[tuple[int, int], Facts] = {}
    return_facts: dict[int, Facts] = {}
    worklist = deque(order)
    queued = set(order)
    iterations = 0

    def push(sites: Iterable[Site]) -> None:
        for site in sites:
            if site in reachable and site not in queued:
                worklist.append(site)
                queued.add(site)

    while worklist:
        site = worklist.popleft()
        queued.discard(site)
        cfg = method_artifacts(program.method(site.method).decl).cfg
        preds = [Site(site.method, p) for p in cfg.predecessors(site.stmt) if p >= 0]
        incoming = join(env_out.get(p, {}) for p in preds)
        env_in[site] = incoming
        out, effects = transfer.apply(site, incoming, param_facts, return_facts)

        for callee, index, facts in effects.params:
            old = param_facts.get((callee, index), NO_FACTS)
            if not facts <= old:
                param_facts[(callee, index)] = old | facts
                push(param_sites.get(callee, ()))
        if effects.returned:
            old = return_facts.get(site.method, NO_FACTS)
            if not effects.returned <= old:
                return_facts[site.method] = old | effects.returned
                push(call_graph.callers.get(site.method, ()))

        previous = env_out.get(site, {})
        env_out[site] = out
        if out != previous:
            iterations += 1
            if iterations > iteration_bound:
                msg = f"taint fixpoint exceeded {iteration_bound} iterations"
                raise AnalysisError(msg)
            push(Site(site.method, s) for s in cfg.successors(site.stmt) if s >= 0)

    logger.info(
        "taint_fixpoint",
        app_id=program.app_id,
        nodes=len(order),
        iterations=iterations,
        iteration_bound=iteration_bound,
    )
    return TaintState(program, inventory, env_in, env_out, iterations, iteration_bound)


@dataclass(frozen=True)
class SinkFacts:
    """Facts reaching one sink call."""

    site: Site
    channel: Channel
    facts: Facts

    def by_source(self) -> dict[int, Facts]:
        """Facts grouped by source id, in id order."""
        grouped: dict[int, set[TaintFact]] = {}
        for fact in self.facts:
            grouped.setdefault(fact.source, set()).add(fact)
        return {source: frozenset(grouped[source]) for source in sorted(grouped)}


def facts_at_sinks(state: TaintState, program: Program, dataset: Dataset) -> list[SinkFacts]:
    """One entry per sink call site with a tainted argument or receiver, in site order."""
    call_graph = build_call_graph(program)
    sinks = []
    for site in sorted(call_graph.edges):
        rule = classify_site(call_graph, dataset, site)
        if not isinstance(rule, SinkRule):
            continue
        if facts := state.inputs(site):
            sinks.append(SinkFacts(site, rule.channel, facts))
    return sinks
