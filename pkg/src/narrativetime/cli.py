"""Batch command line: validate, derive, agree, stats, serve.

Exit codes: 0 clean, 1 ERROR-level diagnostics, 3 unreadable or
unparseable input, 4 other I/O failure (2 is click's usage-error code).
"""
from __future__ import annotations

import sys
from pathlib import Path

import click

from .agreement import compare_documents, count_actions
from .inference import check_consistency, derive_document
from .interchange import export_timeml
from .model import NarrativeTimeError
from .notation import DocumentError, parse_annotation_doc
from .store import StoreConfig
from .timeline import AnnotationError, Severity, validate

EXIT_VALIDATION = 1
EXIT_PARSE = 3
EXIT_IO = 4


def _read(path: Path) -> bytes:
    try:
        return path.read_bytes()
    except OSError as err:
        click.echo(f"cannot read {path}: {err}", err=True)
        sys.exit(EXIT_IO)


def _load(path: Path):
    try:
        return parse_annotation_doc(_read(path))
    except DocumentError as err:
        click.echo(f"{path}: {err.code}: {err.message}", err=True)
        sys.exit(EXIT_PARSE)


def _horizon(value: str) -> int | None:
    if value in ("inf", "infinite", "none"):
        return None
    try:
        parsed = int(value)
    except ValueError:
        raise click.BadParameter("must be a positive integer or 'inf'")
    if parsed < 1:
        raise click.BadParameter("must be at least 1, or 'inf'")
    return parsed


horizon_option = click.option(
    "--vague-horizon",
    default="1",
    show_default=True,
    help="How many occupied slots an unbounded side stays vague across; 'inf' for all.",
)


@click.group()
def main() -> None:
    """Timeline-based temporal annotation toolkit."""


@main.command("validate")
@click.argument("paths", nargs=-1, required=True, type=click.Path(exists=True, path_type=Path))
def cli_validate(paths: tuple[Path, ...]) -> None:
    """Check annotation files and print every diagnostic."""
    worst = 0
    for path in paths:
        document = _load(path)
        diagnostics = validate(document)
        for diag in diagnostics:
            subjects = ", ".join(diag.subjects)
            click.echo(f"{path}: {diag.severity.value} {diag.code} [{subjects}] {diag.message}")
        if any(d.severity is Severity.ERROR for d in diagnostics):
            worst = EXIT_VALIDATION
        else:
            click.echo(f"{path}: OK ({len(diagnostics)} warning(s))")
    sys.exit(worst)


@main.command("derive")
@click.argument("path", type=click.Path(exists=True, path_type=Path))
@click.option("--out", "-o", type=click.Path(path_type=Path), help="Write XML here instead of stdout.")
@horizon_option
def cli_derive(path: Path, out: Path | None, vague_horizon: str) -> None:
    """Derive the dense TLink graph and emit TimeML-style XML."""
    document = _load(path)
    try:
        derivation = derive_document(document, vague_horizon=_horizon(vague_horizon))
    except AnnotationError as err:
        for diag in err.diagnostics:
            click.echo(f"{path}: ERROR {diag.code} [{', '.join(diag.subjects)}]", err=True)
        sys.exit(EXIT_VALIDATION)
    violations = check_consistency(derivation.graph)
    if violations:
        for violation in violations:
            click.echo(f"{path}: inconsistent triple: {violation}", err=True)
        sys.exit(EXIT_VALIDATION)
    xml = export_timeml(document, derivation.graph)
    if out is None:
        click.echo(xml.decode("utf-8"), nl=False)
    else:
        try:
            out.write_bytes(xml)
        except OSError as err:
            click.echo(f"cannot write {out}: {err}", err=True)
            sys.exit(EXIT_IO)
        click.echo(
            f"{path}: {derivation.graph.n_pairs} event pairs, "
            f"{len(derivation.graph.timex_links)} timex links -> {out}"
        )


@main.command("agree")
@click.argument("path_a", type=click.Path(exists=True, path_type=Path))
@click.argument("path_b", type=click.Path(exists=True, path_type=Path))
@horizon_option
def cli_agree(path_a: Path, path_b: Path, vague_horizon: str) -> None:
    """Compare two annotations of the same document."""
    doc_a = _load(path_a)
    doc_b = _load(path_b)
    try:
        report = compare_documents(doc_a, doc_b, vague_horizon=_horizon(vague_horizon))
    except AnnotationError as err:
        for diag in err.diagnostics:
            click.echo(f"ERROR {diag.code} [{', '.join(diag.subjects)}]", err=True)
        sys.exit(EXIT_VALIDATION)
    except NarrativeTimeError as err:
        click.echo(str(err), err=True)
        sys.exit(EXIT_PARSE)
    click.echo(report.render_text())


@main.command("stats")
@click.argument("paths", nargs=-1, required=True, type=click.Path(exists=True, path_type=Path))
@horizon_option
def cli_stats(paths: tuple[Path, ...], vague_horizon: str) -> None:
    """Per-document event, span, action and TLink counts."""
    header = f"{'document':30} {'events':>7} {'spans':>6} {'actions':>8} {'tlinks':>7} {'timex':>6}"
    click.echo(header)
    worst = 0
    for path in paths:
        document = _load(path)
        try:
            derivation = derive_document(document, vague_horizon=_horizon(vague_horizon))
        except AnnotationError:
            click.echo(f"{document.doc_id:30} invalid (run validate for details)")
            worst = EXIT_VALIDATION
            continue
        actions = count_actions(document)
        click.echo(
            f"{document.doc_id:30} {len(document.events):>7} {len(document.spans):>6} "
            f"{actions.nt_actions:>8} {derivation.graph.n_pairs:>7} "
            f"{len(derivation.graph.timex_links):>6}"
        )
    sys.exit(worst)


@main.command("serve")
@click.option(
    "--store",
    "store_path",
    envvar="NT_STORE",
    required=True,
    type=click.Path(exists=True, file_okay=False, path_type=Path),
    help="Directory holding annotation documents (env: NT_STORE).",
)
@click.option("--listen", default="127.0.0.1:8023", show_default=True)
@click.option(
    "--ui",
    "ui_dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=None,
    help="Directory with built UI assets; defaults to ./frontend/dist when present.",
)
@horizon_option
def cli_serve(store_path: Path, listen: str, ui_dir: Path | None, vague_horizon: str) -> None:
    """Run the annotation HTTP service."""
    from . import server

    if ui_dir is None:
        candidate = Path("frontend") / "dist"
        ui_dir = candidate if candidate.is_dir() else None
    config = StoreConfig(
        root=store_path,
        listen=listen,
        vague_horizon=_horizon(vague_horizon),
        ui_dir=ui_dir,
    )
    server.run(config)


if __name__ == "__main__":
    main()
