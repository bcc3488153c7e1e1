"""Brute-force reference implementations the analyses are checked against."""

from collections.abc import Iterator
from dataclasses import dataclass, field

from privslice.classifier import SourceInventory
from privslice.dataset import (
    ApiClassification,
    Dataset,
    PseudoRule,
    SinkRule,
    SourceRule,
    UnknownApi,
    classify_signature,
)
from privslice.findings import grade_pseudonymizer_call
from privslice.graph.callgraph import ExternalCallee, InternalCallee, build_call_graph
from privslice.graph.cfg import ENTRY, EXIT, Cfg, build_cfg
from privslice.ir.model import (
    Assign,
    BinOp,
    Copy,
    MethodDecl,
    Param,
    Program,
    Return,
    Sig,
    Stmt,
    UiRead,
    call_args,
    call_receiver,
    defined_var,
    is_call,
    updated_receiver,
    uses,
)
from privslice.models import Site, Status, TaintFact
from privslice.taint import NO_FACTS, Facts, TaintState

LOOP_BOUND = 2


# Dependences


def _reaches_exit(cfg: Cfg, start: int, removed: int) -> bool:
    seen = {start}
    stack = [start]
    while stack:
        node = stack.pop()
        if node == EXIT:
            return True
        for succ in cfg.graph.successors(node):
            if succ != removed and succ not in seen:
                seen.add(succ)
                stack.append(succ)
    return False


def postdominator_sets(cfg: Cfg) -> dict[int, set[int]]:
    """All postdominators of every node (reflexive).

    d postdominates n when removing d from the graph cuts every path from n to EXIT.
    """
    nodes = set(cfg.graph)
    return {
        n: {d for d in nodes if d == n or not _reaches_exit(cfg, n, removed=d)} for n in nodes
    }


def immediate_postdominators(cfg: Cfg) -> dict[int, int]:
    """The closest strict postdominator of every node except EXIT."""
    pdom = postdominator_sets(cfg)
    ipdom = {}
    for n in pdom:
        if n == EXIT:
            continue
        strict = pdom[n] - {n}
        # the strict postdominator that every other strict postdominator postdominates
        ipdom[n] = next(d for d in strict if pdom[d] == strict)
    return ipdom


def control_dependences(cfg: Cfg) -> set[tuple[int, int]]:
    """(a, b): some successor of a is postdominated by b, and b does not strictly postdominate a."""
    pdom = postdominator_sets(cfg)
    deps = set()
    for a in cfg.graph:
        if a < 0:
            continue
        for s in cfg.graph.successors(a):
            for b in pdom[s]:
                if b >= 0 and not (b in pdom[a] and b != a):
                    deps.add((a, b))
    return deps


def def_use_pairs(cfg: Cfg, method: MethodDecl) -> set[tuple[int, int, str]]:
    """(def, use, var) by searching definition-clear paths from every definition.

    A virtual call passing arguments also defines its receiver, without clearing it.
    """
    body = method.body
    pairs = set()
    for stmt in method.statements:
        defined = {v for v in (defined_var(stmt), updated_receiver(stmt)) if v is not None}
        for var in sorted(defined):
            seen: set[int] = set()
            stack = [s for s in cfg.graph.successors(stmt.index) if s >= 0]
            while stack:
                node = stack.pop()
                if node in seen:
                    continue
                seen.add(node)
                if var in uses(body[node]):
                    pairs.add((stmt.index, node, var))
                if defined_var(body[node]) == var:
                    continue
                stack.extend(s for s in cfg.graph.successors(node) if s >= 0)
    return pairs


# Taint


def cfg_paths(cfg: Cfg, loop_bound: int = LOOP_BOUND) -> Iterator[list[int]]:
    """Statement sequences of every ENTRY path using each edge at most `loop_bound` times."""
    used: dict[tuple[int, int], int] = {}

    def walk(node: int, path: list[int]) -> Iterator[list[int]]:
        extended = False
        for succ in cfg.successors(node):
            if succ == EXIT:
                yield path
                extended = True
                continue
            edge = (node, succ)
            if used.get(edge, 0) >= loop_bound:
                continue
            used[edge] = used.get(edge, 0) + 1
            extended = True
            yield from walk(succ, [*path, succ])
            used[edge] -= 1
        if not extended:
            yield path

    yield from walk(ENTRY, [])


def _derived(facts: Facts) -> Facts:
    return frozenset(TaintFact(f.source, f.status, f.grade, derived=True) for f in facts)


@dataclass
class _Summaries:
    """Parameter and return facts read in one round and collected for the next."""

    params_in: dict[tuple[int, int], Facts]
    returns: dict[int, Facts]
    params_out: dict[tuple[int, int], Facts] = field(default_factory=dict)
    returns_out: dict[int, Facts] = field(default_factory=dict)

    def add_param(self, ordinal: int, index: int, facts: Facts) -> None:
        key = (ordinal, index)
        self.params_out[key] = self.params_out.get(key, NO_FACTS) | facts

    def add_return(self, ordinal: int, facts: Facts) -> None:
        self.returns_out[ordinal] = self.returns_out.get(ordinal, NO_FACTS) | facts


class _Interpreter:
    """Statement semantics spelled out case by case, for running along concrete paths."""

    def __init__(self, program: Program, dataset: Dataset, inventory: SourceInventory) -> None:
        self.program = program
        self.dataset = dataset
        self.call_graph = build_call_graph(program)
        self.labels = {label.site: label.id for label in inventory}

    def _input_rule(self, sig: Sig | None) -> tuple[ApiClassification, Dataset]:
        # a source rule is set aside; the API's other rule decides what happens to inputs
        if sig is None:
            return UnknownApi(), self.dataset
        rules = self.dataset
        if isinstance(classify_signature(rules, sig), SourceRule):
            rules = Dataset(
                pseudonymizers=rules.pseudonymizers,
                sinks=rules.sinks,
                manipulations=rules.manipulations,
            )
        return classify_signature(rules, sig), rules

    def _through_api(self, site: Site, sig: Sig | None, facts: Facts) -> Facts:
        rule, rules = self._input_rule(sig)
        if not isinstance(rule, PseudoRule):
            return _derived(facts)
        grade = grade_pseudonymizer_call(self.program, rules, site)
        return frozenset(
            TaintFact(f.source, Status.PSEUDONYMIZED, grade, f.derived) for f in facts
        )

    def _call(
        self,
        site: Site,
        stmt: Stmt,
        env: dict[str, Facts],
        summaries: _Summaries,
    ) -> Facts:
        callees = self.call_graph.callees(site)
        args = call_args(stmt)
        internal = [c.ordinal for c in callees if isinstance(c, InternalCallee)]
        result = NO_FACTS
        for ordinal in internal:
            count = self.program.method(ordinal).decl.param_count
            for i, arg in enumerate(args[:count]):
                if env.get(arg):
                    summaries.add_param(ordinal, i, env[arg])
            result |= summaries.returns.get(ordinal, NO_FACTS)
        if internal:
            return result

        sig = next((c.sig for c in callees if isinstance(c, ExternalCallee)), None)
        inputs = frozenset().union(*(env.get(var, NO_FACTS) for var in uses(stmt)))
        result = self._through_api(site, sig, inputs)
        is_source = sig is not None and isinstance(
            classify_signature(self.dataset, sig), SourceRule
        )
        if is_source and site in self.labels:
            result |= {TaintFact(self.labels[site])}
        receiver = call_receiver(stmt)
        keeps = not isinstance(self._input_rule(sig)[0], SinkRule)
        if receiver is not None and args and receiver != defined_var(stmt) and keeps:
            stored = frozenset().union(*(env.get(arg, NO_FACTS) for arg in args))
            if stored:
                kept = env.get(receiver, NO_FACTS)
                env[receiver] = kept | self._through_api(site, sig, stored)
        return result

    def step(self, site: Site, env: dict[str, Facts], summaries: _Summaries) -> dict[str, Facts]:
        """Environment after the statement at `site`."""
        stmt = self.program.stmt_at(site)
        before = env
        env = dict(env)
        result = self._call(site, stmt, env, summaries) if is_call(stmt) else NO_FACTS
        match stmt:
            case Assign(rhs=Copy(var=var)):
                result = before.get(var, NO_FACTS)
            case Assign(rhs=BinOp(left=left, right=right)):
                result = _derived(before.get(left, NO_FACTS) | before.get(right, NO_FACTS))
            case Assign(rhs=UiRead()) if site in self.labels:
                result = frozenset({TaintFact(self.labels[site])})
            case Assign(rhs=Param(index=index)):
                result = summaries.params_in.get((site.method, index), NO_FACTS)
            case Return(var=str() as var) if before.get(var):
                summaries.add_return(site.method, before[var])
        if isinstance(stmt, Assign):
            if result:
                env[stmt.dest] = result
            else:
                env.pop(stmt.dest, None)
        return env


def _add(env: dict[Site, dict[str, Facts]], site: Site, facts: dict[str, Facts]) -> None:
    target = env.setdefault(site, {})
    for var, value in facts.items():
        target[var] = target.get(var, NO_FACTS) | value


def enumerate_taint(
    program: Program,
    dataset: Dataset,
    inventory: SourceInventory,
    loop_bound: int = LOOP_BOUND,
) -> TaintState:
    """Facts along every bounded path of every method.

    Parameter and return summaries are recomputed from scratch until they
    stop changing.
    """
    interpreter = _Interpreter(program, dataset, inventory)
    cfgs = {ref.ordinal: build_cfg(ref.decl) for ref in program.methods}
    params: dict[tuple[int, int], Facts] = {}
    returns: dict[int, Facts] = {}
    while True:
        env_in: dict[Site, dict[str, Facts]] = {}
        env_out: dict[Site, dict[str, Facts]] = {}
        summaries = _Summaries(params, returns, dict(params), dict(returns))
        for ordinal, cfg in cfgs.items():
            for path in cfg_paths(cfg, loop_bound):
                env: dict[str, Facts] = {}
                for index in path:
                    site = Site(ordinal, index)
                    _add(env_in, site, env)
                    env = interpreter.step(site, env, summaries)
                    _add(env_out, site, env)
        if summaries.params_out == params and summaries.returns_out == returns:
            return TaintState(program, inventory, env_in, env_out)
        params, returns = summaries.params_out, summaries.returns_out
