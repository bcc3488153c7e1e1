"""rich rendering of analysis results for the terminal."""

from collections import Counter
from collections.abc import Iterable

from rich.console import Console
from rich.markup import escape
from rich.table import Table

from privslice.classifier import SourceInventory
from privslice.ir.model import Program
from privslice.models import Diagnostic, FindingKind, Identifiability
from privslice.report import AnalysisResult


def inventory_table(program: Program, inventory: SourceInventory) -> Table:
    """Table of the personal-data sources of an app."""
    table = Table(title=f"Sources of {program.app_id}")
    table.add_column("id", justify="right")
    table.add_column("kind")
    table.add_column("category")
    table.add_column("identifiability")
    table.add_column("site")
    table.add_column("signature / field")
    for label in inventory:
        ref = program.method(label.site.method)
        identifiability = label.identifiability.value
        if label.identifiability == Identifiability.DIRECT:
            identifiability = f"[bold red]{identifiability}[/bold red]"
        table.add_row(
            str(label.id),
            label.kind.value,
            label.category,
            identifiability,
            f"{ref.sig}:{label.site.stmt}",
            label.signature_or_field,
        )
    return table


def print_inventory(console: Console, program: Program, inventory: SourceInventory) -> None:
    """Print the source inventory of an app."""
    if not inventory:
        console.print(f"[green]{program.app_id}: no personal-data sources[/green]")
        return
    console.print(inventory_table(program, inventory))


def print_summary(console: Console, result: AnalysisResult) -> None:
    """Print finding counts per kind, risks highlighted."""
    counts = Counter(finding.kind for finding in result.findings)
    table = Table(title=f"Findings for {result.app_id}")
    table.add_column("kind")
    table.add_column("count", justify="right")
    for kind in FindingKind:
        if not counts[kind]:
            continue
        name = f"[red]{kind.value}[/red]" if kind.is_risk else kind.value
        table.add_row(name, str(counts[kind]))
    console.print(table)
    status = "[red]⚠ risks found[/red]" if result.has_risk else "[green]✓ no risks[/green]"
    console.print(f"[bold]{result.app_id}:[/bold] {status}")


def print_diagnostics(console: Console, diagnostics: Iterable[Diagnostic]) -> None:
    """Print validation diagnostics, errors in red."""
    for diagnostic in diagnostics:
        style = "red" if diagnostic.is_error else "yellow"
        text = escape(str(diagnostic))
        console.print(f"[{style}]{text}[/{style}]", highlight=False, soft_wrap=True)
