"""Shared fixtures for privslice tests."""

from pathlib import Path

import pytest

from privslice.classifier import classify_inputs
from privslice.dataset import Dataset, load_dataset_file
from privslice.graph.adg import build_adg
from privslice.graph.callgraph import build_call_graph
from privslice.ir.model import Program
from privslice.ir.parser import parse_program
from privslice.models import Site
from privslice.taint import TaintState, propagate_taint

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = FIXTURES / "golden"
CORPUS = sorted(path.stem for path in FIXTURES.glob("*.air"))


def load_fixture(name: str) -> Program:
    """Parse one of the corpus apps."""
    return parse_program((FIXTURES / f"{name}.air").read_text(encoding="utf-8"))


def sites(*pairs: tuple[int, int]) -> set[Site]:
    """Sites from (method, statement) pairs."""
    return {Site(method, stmt) for method, stmt in pairs}


def taint_of(program: Program, dataset: Dataset) -> TaintState:
    """Run taint propagation from every source of a program."""
    adg = build_adg(program, build_call_graph(program))
    return propagate_taint(program, adg, classify_inputs(program, dataset), dataset)


@pytest.fixture(scope="session")
def dataset() -> Dataset:
    """The bundled default dataset."""
    return load_dataset_file()


@pytest.fixture
def skymap() -> Program:
    """The star map case-study app."""
    return load_fixture("skymap_like")


@pytest.fixture
def stellarium() -> Program:
    """The planetarium case-study app."""
    return load_fixture("stellarium_like")
