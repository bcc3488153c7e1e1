"""Data models shared by the analysis stages."""

from collections.abc import Mapping
from dataclasses import dataclass, field
from enum import Enum

ENTRY_STMT = -1  # statement index of a method's synthetic ENTRY node


class Identifiability(str, Enum):
    """Whether a piece of personal data identifies a person on its own."""

    DIRECT = "direct"
    INDIRECT = "indirect"


class Origin(str, Enum):
    """Where personal data enters the app."""

    SYSTEM = "system"
    USER = "user"


class Grade(str, Enum):
    """Robustness of a pseudonymization function."""

    WEAK = "weak"
    ROBUST = "robust"


class Channel(str, Enum):
    """Sharing channel through which data leaves the app."""

    ANALYTICS = "analytics"
    ADVERTISING = "advertising"
    NETWORK = "network"
    STORAGE = "storage"


class ManipulationKind(str, Enum):
    """Kinds of processing applied to personal data."""

    GENERATION = "generation"
    DERIVATION = "derivation"
    RETENTION = "retention"
    ACCUMULATION = "accumulation"
    REPLICATION = "replication"
    SHARING = "sharing"


class Status(str, Enum):
    """Disguise status of a tainted value."""

    RAW = "raw"
    PSEUDONYMIZED = "pseudonymized"


class EdgeKind(str, Enum):
    """Edge kinds of the app dependence graph."""

    CTRL = "ctrl"
    DATA = "data"
    CALL = "call"
    PARAM_IN = "param_in"
    PARAM_OUT = "param_out"


class FindingKind(str, Enum):
    """Reportable result kinds, in report order."""

    SOURCE_INVENTORY = "SOURCE_INVENTORY"
    WEAK_PSEUDONYMIZATION = "WEAK_PSEUDONYMIZATION"
    SHARED_BEFORE_PSEUDONYMIZED = "SHARED_BEFORE_PSEUDONYMIZED"
    NOT_PSEUDONYMIZED_ALL_PATHS = "NOT_PSEUDONYMIZED_ALL_PATHS"
    COMBINATION_OF_INDIRECT_IDENTIFIERS = "COMBINATION_OF_INDIRECT_IDENTIFIERS"
    DERIVED_DATA_SHARED = "DERIVED_DATA_SHARED"
    MANIPULATION_PROFILE = "MANIPULATION_PROFILE"

    @property
    def is_risk(self) -> bool:
        """Whether this kind signals a data protection risk."""
        return self not in (FindingKind.SOURCE_INVENTORY, FindingKind.MANIPULATION_PROFILE)

    @property
    def rank(self) -> int:
        """Position of this kind in report order."""
        return list(FindingKind).index(self)


class Severity(str, Enum):
    """Severity of a validation diagnostic."""

    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True, order=True, slots=True)
class Site:
    """A node of the app dependence graph: a statement of a method, or its ENTRY."""

    method: int  # ordinal of the method in program order
    stmt: int

    @property
    def is_entry(self) -> bool:
        """Whether this is a method's ENTRY node."""
        return self.stmt == ENTRY_STMT

    def __str__(self) -> str:
        stmt = "entry" if self.is_entry else str(self.stmt)
        return f"m{self.method}:{stmt}"


@dataclass(frozen=True, slots=True)
class Diagnostic:
    """A validation result."""

    severity: Severity
    code: str
    message: str
    line: int | None = None

    @property
    def is_error(self) -> bool:
        """Whether the diagnostic is an error."""
        return self.severity == Severity.ERROR

    def __str__(self) -> str:
        where = f"line {self.line}: " if self.line is not None else ""
        return f"{where}{self.severity.value} [{self.code}] {self.message}"


@dataclass(frozen=True, slots=True)
class SourceLabel:
    """A labeled personal-data source."""

    id: int
    site: Site
    kind: Origin
    category: str
    identifiability: Identifiability
    signature_or_field: str


@dataclass(frozen=True, slots=True)
class TaintFact:
    """Which source a value stems from, its disguise status, and whether it was derived."""

    source: int
    status: Status = Status.RAW
    grade: Grade | None = None
    derived: bool = False

    def __post_init__(self) -> None:
        if (self.grade is None) != (self.status == Status.RAW):
            msg = "grade is required exactly for pseudonymized facts"
            raise ValueError(msg)

    @property
    def sort_key(self) -> tuple[int, str, str, bool]:
        """Deterministic ordering key."""
        grade = self.grade.value if self.grade else ""
        return (self.source, self.status.value, grade, self.derived)

    def pseudonymized(self, grade: Grade) -> "TaintFact":
        """The fact after passing through a pseudonymizer of the given grade."""
        return TaintFact(self.source, Status.PSEUDONYMIZED, grade, self.derived)

    def as_derived(self) -> "TaintFact":
        """The fact after a manipulation that derives a new value."""
        return TaintFact(self.source, self.status, self.grade, derived=True)


@dataclass(frozen=True)
class Finding:
    """One reportable result."""

    kind: FindingKind
    site: Site
    sources: tuple[int, ...]
    detail: Mapping[str, object] = field(default_factory=dict, compare=False, hash=False)

    @property
    def key(self) -> tuple[FindingKind, Site, tuple[int, ...]]:
        """Identity of the finding without its payload."""
        return (self.kind, self.site, self.sources)

    @property
    def sort_key(self) -> tuple[int, int, int, tuple[int, ...]]:
        """Report order: kind, method, statement index, source ids."""
        return (self.kind.rank, self.site.method, self.site.stmt, self.sources)


@dataclass(frozen=True)
class ManipulationProfile:
    """Nodes of a slice grouped by the manipulation they apply to personal data."""

    kinds: Mapping[ManipulationKind, tuple[Site, ...]]

    def __getitem__(self, kind: ManipulationKind) -> tuple[Site, ...]:
        return self.kinds.get(kind, ())

    def counts(self) -> dict[ManipulationKind, int]:
        """Number of nodes per kind, omitting empty kinds."""
        return {kind: len(sites) for kind, sites in self.kinds.items() if sites}

    @property
    def is_empty(self) -> bool:
        """Whether no node carries any manipulation kind."""
        return not any(self.kinds.values())
