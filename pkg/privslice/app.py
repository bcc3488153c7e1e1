"""The analysis pipeline: from a parsed program and a dataset to an AnalysisResult."""

import time
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path

import structlog

from privslice.classifier import classify_inputs
from privslice.dataset import Dataset
from privslice.files import read_input
from privslice.findings import (
    check_pseudonymization,
    classify_manipulations,
    detect_combination,
    detect_derived_sharing,
    inventory_findings,
    label_pseudonymizers,
    profile_finding,
    sort_findings,
)
from privslice.graph.adg import build_adg
from privslice.graph.callgraph import build_call_graph
from privslice.ir.model import Program
from privslice.ir.parser import parse_program
from privslice.models import ManipulationKind
from privslice.report import MERGED, AnalysisResult
from privslice.slicer import Slice, forward_slice
from privslice.taint import facts_at_sinks, propagate_taint

logger = structlog.get_logger(__name__)


class _Stopwatch:
    def __init__(self) -> None:
        self.timings: dict[str, float] = {}

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        start = time.perf_counter()
        yield
        self.timings[name] = round(time.perf_counter() - start, 6)


def analyze_program(
    program: Program, dataset: Dataset, *, include_ctrl: bool = False, timings: bool = False
) -> AnalysisResult:
    """Run every analysis stage on a parsed program."""
    log = logger.bind(app_id=program.app_id)
    watch = _Stopwatch()

    with watch.stage("graph"):
        call_graph = build_call_graph(program)
        adg = build_adg(program, call_graph)
    with watch.stage("classify"):
        inventory = classify_inputs(program, dataset)
        pseudonymizers = tuple(label_pseudonymizers(program, dataset))
    with watch.stage("slice"):
        slices: dict[str, Slice] = {
            str(label.id): forward_slice(adg, [label], include_ctrl=include_ctrl)
            for label in inventory
        }
        slices[MERGED] = forward_slice(adg, inventory, include_ctrl=include_ctrl)
    with watch.stage("taint"):
        state = propagate_taint(program, adg, inventory, dataset)
        sinks = facts_at_sinks(state, program, dataset)
    with watch.stage("findings"):
        findings = [
            *inventory_findings(inventory),
            *check_pseudonymization(state, sinks),
            *detect_combination(state),
            *detect_derived_sharing(state, sinks),
        ]
        for label in inventory:
            profile = classify_manipulations(program, slices[str(label.id)], state, dataset)
            if not profile.is_empty:
                findings.append(profile_finding(label.id, label.site, profile))
        merged = classify_manipulations(program, slices[MERGED], state, dataset)

    generated = set(merged[ManipulationKind.GENERATION])
    assert generated == {label.site for label in inventory} & set(slices[MERGED].nodes)

    result = AnalysisResult(
        program=program,
        dataset=dataset,
        adg=adg,
        inventory=inventory,
        pseudonymizers=pseudonymizers,
        slices=slices,
        findings=tuple(sort_findings(findings)),
        profile=merged,
        timings=watch.timings if timings else None,
    )
    log.info(
        "analysis_done",
        sources=len(inventory),
        findings=len(result.findings),
        risk=result.has_risk,
    )
    return result


def read_program(path: Path) -> Program:
    """Read and parse a µIR file."""
    return parse_program(read_input(path, "app"))


def analyze_file(
    path: Path, dataset: Dataset, *, include_ctrl: bool = False, timings: bool = False
) -> AnalysisResult:
    """Read, parse and analyze one µIR file."""
    return analyze_program(read_program(path), dataset, include_ctrl=include_ctrl, timings=timings)
