"""Tests for input classification."""

from privslice.classifier import (
    classify_inputs,
    classify_site,
    find_system_sources,
    find_ui_sources,
)
from privslice.dataset import SourceRule, UnknownApi, match_ui_field
from privslice.graph.callgraph import build_call_graph
from privslice.ir.model import Assign, UiRead
from privslice.ir.parser import parse_program
from privslice.models import Identifiability, Origin, Site, SourceLabel
from tests.conftest import CORPUS, load_fixture


def test_location_call_is_system_source(dataset):
    """Test that the last-known-location call is labeled as location data."""
    (label, *_) = find_system_sources(load_fixture("skymap_like"), dataset)

    assert label == SourceLabel(
        id=0,
        site=Site(0, 1),
        kind=Origin.SYSTEM,
        category="location",
        identifiability=Identifiability.INDIRECT,
        signature_or_field="android.location.LocationManager.getLastKnownLocation",
    )


def test_skymap_inventory(skymap, dataset):
    """Test the location, device and account sources of the star map app."""
    inventory = classify_inputs(skymap, dataset)

    assert [(label.id, label.site, label.category) for label in inventory] == [
        (0, Site(0, 1), "location"),
        (1, Site(1, 1), "device"),
        (2, Site(1, 8), "account"),
    ]
    assert inventory[2].identifiability == Identifiability.DIRECT
    assert all(label.kind == Origin.SYSTEM for label in inventory)


def test_no_external_calls(dataset):
    """Test that a program calling nothing outside itself has no system sources."""
    program = parse_program('app "a"\nclass a.B {\n method m(0) {\n r0 = 1\n return r0\n }\n}\n')
    assert find_system_sources(program, dataset) == []


def test_stellarium_has_no_ui_sources(stellarium, dataset):
    """Test that an app without a layout has no user sources."""
    assert find_ui_sources(stellarium, dataset) == []


def test_signup_ui_sources(dataset):
    """Test that matched fields are user sources and the nickname is not."""
    inventory = classify_inputs(load_fixture("signup_form"), dataset)

    assert [(x.id, x.site, x.category, x.identifiability) for x in inventory] == [
        (0, Site(0, 0), "contact", Identifiability.DIRECT),
        (1, Site(0, 1), "address", Identifiability.INDIRECT),
    ]
    assert [label.signature_or_field for label in inventory] == ["email_input", "zip"]
    assert all(label.kind == Origin.USER for label in inventory)


def test_single_user_source_gets_id_zero(dataset):
    """Test that ids are dense even when the only source is a UI field."""
    source = (
        'app "a"\nlayout {\n field id="phone" hint="Phone" type="phone"\n}\n'
        'class a.B {\n method m(0) {\n r0 = uiread "phone"\n return r0\n }\n}\n'
    )
    (label,) = classify_inputs(parse_program(source), dataset)

    assert label.id == 0
    assert label.kind == Origin.USER


def test_unresolved_uiread_is_not_a_source(dataset):
    """Test that reading an undeclared field yields no label."""
    source = 'app "a"\nclass a.B {\n method m(0) {\n r0 = uiread "email"\n return r0\n }\n}\n'
    assert classify_inputs(parse_program(source), dataset) == ()


def test_empty_app(dataset):
    """Test that an empty app has an empty inventory."""
    assert classify_inputs(load_fixture("empty"), dataset) == ()


def test_classify_site(dataset):
    """Test classification of external, internal and unresolved call sites."""
    program = load_fixture("virtual_dispatch")
    call_graph = build_call_graph(program)

    assert isinstance(classify_site(call_graph, dataset, Site(2, 0)), SourceRule)
    assert classify_site(call_graph, dataset, Site(2, 1)) is None
    assert classify_site(call_graph, dataset, Site(3, 0)) == UnknownApi()
    assert classify_site(call_graph, dataset, Site(0, 0)) is None


def test_labels_reclassify(dataset):
    """Test that every label sits on a statement that reads its source."""
    for name in CORPUS:
        program = load_fixture(name)
        call_graph = build_call_graph(program)
        inventory = classify_inputs(program, dataset)
        assert [label.id for label in inventory] == list(range(len(inventory)))
        assert inventory == classify_inputs(program, dataset)
        for label in inventory:
            stmt = program.stmt_at(label.site)
            if label.kind == Origin.SYSTEM:
                assert isinstance(classify_site(call_graph, dataset, label.site), SourceRule)
            else:
                assert isinstance(stmt, Assign)
                assert isinstance(stmt.rhs, UiRead)
                ui_field = program.ui_field(stmt.rhs.field_id)
                assert ui_field is not None
                assert match_ui_field(dataset, ui_field) is not None
