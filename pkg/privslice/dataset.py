"""Privacy-relevant dataset: labels for APIs and UI fields that handle personal data."""

import json
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Annotated

import structlog
from pydantic import BaseModel, ConfigDict, StringConstraints, ValidationError, field_validator

from privslice.errors import DatasetError, DuplicateRuleError
from privslice.files import read_input
from privslice.ir.model import Sig, UiField
from privslice.models import Channel, Grade, Identifiability, ManipulationKind, Origin

logger = structlog.get_logger(__name__)

DEFAULT_DATASET_PATH = Path(__file__).parent / "data" / "default_dataset.json"

# Kinds a manipulation rule may name; generation and sharing come from sources and sinks.
RULE_MANIPULATION_KINDS = (
    ManipulationKind.DERIVATION,
    ManipulationKind.ACCUMULATION,
    ManipulationKind.RETENTION,
    ManipulationKind.REPLICATION,
)

NonEmpty = Annotated[str, StringConstraints(strip_whitespace=True, min_length=1)]


class _Rule(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class SourceRule(_Rule):
    """An API that returns personal data."""

    signature_prefix: NonEmpty
    category: NonEmpty
    identifiability: Identifiability
    origin: Origin


class UiRule(_Rule):
    """A keyword that marks a UI field as collecting personal data."""

    keyword: NonEmpty
    category: NonEmpty
    identifiability: Identifiability

    @field_validator("keyword")
    @classmethod
    def _lower(cls, keyword: str) -> str:
        return keyword.lower()


class PseudoRule(_Rule):
    """An API that pseudonymizes (or anonymizes) its input."""

    signature_prefix: NonEmpty
    grade: Grade


class SinkRule(_Rule):
    """An API through which data leaves the app."""

    signature_prefix: NonEmpty
    channel: Channel


class ManipRule(_Rule):
    """An API that manipulates the data passed to it."""

    signature_prefix: NonEmpty
    kind: ManipulationKind

    @field_validator("kind")
    @classmethod
    def _rule_kind(cls, kind: ManipulationKind) -> ManipulationKind:
        if kind not in RULE_MANIPULATION_KINDS:
            allowed = ", ".join(k.value for k in RULE_MANIPULATION_KINDS)
            msg = f"kind must be one of {allowed}"
            raise ValueError(msg)
        return kind


type SignatureRule = SourceRule | PseudoRule | SinkRule | ManipRule


@dataclass(frozen=True, slots=True)
class UnknownApi:
    """Classification of a signature no rule matches."""


type ApiClassification = SignatureRule | UnknownApi


class Dataset(_Rule):
    """All rules of a privacy-relevant dataset, in file order."""

    sources: tuple[SourceRule, ...] = ()
    ui_keywords: tuple[UiRule, ...] = ()
    pseudonymizers: tuple[PseudoRule, ...] = ()
    sinks: tuple[SinkRule, ...] = ()
    manipulations: tuple[ManipRule, ...] = ()

    @property
    def signature_rules(self) -> tuple[tuple[SignatureRule, ...], ...]:
        """Signature rule lists in tie-break precedence order."""
        return (self.sources, self.pseudonymizers, self.sinks, self.manipulations)


def _error_path(loc: Sequence[int | str]) -> str:
    path = ""
    for part in loc:
        if isinstance(part, int):
            path += f"[{part}]"
        else:
            path += f".{part}" if path else part
    return path


def _check_unique(section: str, values: Iterable[str]) -> None:
    keys = list(values)
    for key, count in Counter(keys).items():
        if count > 1:
            index = len(keys) - 1 - keys[::-1].index(key)
            msg = f"duplicate rule {key!r}"
            raise DuplicateRuleError(msg, path=f"{section}[{index}]")


def load_dataset(source: str) -> Dataset:
    """Load a dataset from JSON text.

    Raises DatasetError with the path of the offending field on schema
    violations, and DuplicateRuleError when two rules of one kind share a
    signature prefix (or two UI rules share a keyword).
    """
    try:
        document = json.loads(source)
    except json.JSONDecodeError as err:
        msg = f"invalid JSON at line {err.lineno}, column {err.colno}: {err.msg}"
        raise DatasetError(msg) from err
    try:
        dataset = Dataset.model_validate(document)
    except ValidationError as err:
        first = err.errors()[0]
        raise DatasetError(first["msg"], path=_error_path(first["loc"])) from err

    _check_unique("sources", (r.signature_prefix for r in dataset.sources))
    _check_unique("ui_keywords", (r.keyword for r in dataset.ui_keywords))
    _check_unique("pseudonymizers", (r.signature_prefix for r in dataset.pseudonymizers))
    _check_unique("sinks", (r.signature_prefix for r in dataset.sinks))
    _check_unique("manipulations", (r.signature_prefix for r in dataset.manipulations))
    return dataset


def load_dataset_file(path: Path = DEFAULT_DATASET_PATH) -> Dataset:
    """Load a dataset from a JSON file."""
    dataset = load_dataset(read_input(path, "dataset"))
    logger.debug(
        "dataset_loaded",
        path=str(path),
        sources=len(dataset.sources),
        ui_keywords=len(dataset.ui_keywords),
        pseudonymizers=len(dataset.pseudonymizers),
        sinks=len(dataset.sinks),
        manipulations=len(dataset.manipulations),
    )
    return dataset


def render_dataset(dataset: Dataset) -> str:
    """Canonical JSON text of a dataset."""
    return json.dumps(dataset.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"


def prefix_matches(prefix: str, signature: str) -> bool:
    """Whether a dotted prefix covers a signature, on segment boundaries."""
    return signature == prefix or signature.startswith(prefix + ".")


def classify_signature(dataset: Dataset, sig: Sig) -> ApiClassification:
    """The rule with the longest matching prefix, or UnknownApi.

    Equal-length matches of different kinds resolve as source, then
    pseudonymizer, then sink, then manipulation.
    """
    text = str(sig)
    best: SignatureRule | None = None
    for rules in dataset.signature_rules:
        for rule in rules:
            if not prefix_matches(rule.signature_prefix, text):
                continue
            if best is None or len(rule.signature_prefix) > len(best.signature_prefix):
                best = rule
    return best if best is not None else UnknownApi()


def match_ui_field(dataset: Dataset, field: UiField) -> tuple[str, Identifiability] | None:
    """First UI rule whose keyword occurs in the field's hint or id, ignoring case."""
    hint = field.hint.lower()
    field_id = field.id.lower()
    for rule in dataset.ui_keywords:
        if rule.keyword in hint or rule.keyword in field_id:
            return (rule.category, rule.identifiability)
    return None
