"""Command line entry point: scan, extract, check, mutate and report."""

import json
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path
from typing import List, Optional, Sequence, Union

import click
from pydantic import ValidationError

from .checker import check_record
from .code_model import load_function
from .configs import ToolConfig, flag_overrides, load_config
from .constraint_lang import params_of, parse_constraint
from .corpus import evaluate_corpus, read_records, run_mutate as mutate_records, write_manifest, write_records
from .docstrings import extract_docstrings, filter_candidates
from .errors import CdiError, ClientError, CorpusParseError
from .extraction import extract_constraints, load_few_shots
from .llm import LlmClient, build_client
from .logger import logger, set_level
from .models import (
    CorpusRecord,
    DocUnit,
    Label,
    MutationPattern,
    OwnerKind,
    ScannedFunction,
    ScanRecord,
    Status,
    Verdict,
)
from .report import render_report

EXIT_CLEAN = 0
EXIT_INCONSISTENT = 1
EXIT_ERROR = 2

PathLike = Union[str, Path]


def _write_lines(lines: Sequence[str], path: PathLike) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for line in lines:
            f.write(line + "\n")


def read_scan(path: PathLike) -> List[ScanRecord]:
    """
    Raises:
        CorpusParseError: On the first line that is not a ScanRecord
    """
    records = []
    with open(path, "r", encoding="utf-8") as f:
        for number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                records.append(ScanRecord.model_validate_json(line))
            except ValidationError as e:
                raise CorpusParseError(number, str(e))
    return records


def read_verdicts(path: PathLike) -> List[Verdict]:
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    if not isinstance(data, list):
        raise CorpusParseError(1, "expected a JSON array of verdicts")
    try:
        return [Verdict.model_validate(item) for item in data]
    except ValidationError as e:
        raise CorpusParseError(1, str(e))


def _scan_unit(unit: DocUnit) -> ScanRecord:
    functions = []
    for bound in unit.functions:
        try:
            m = load_function(bound.source, unit.param_types())
            functions.append(ScannedFunction(name=bound.name, source=bound.source, params=list(m.params)))
        except (CdiError, SyntaxError) as e:
            logger.debug(f"{unit.owner_name}.{bound.name} is outside the analyzable subset: {e}")
            functions.append(ScannedFunction(name=bound.name, source=bound.source, supported=False, reason=str(e)))
    return ScanRecord(unit=unit, functions=functions, candidates=filter_candidates(unit))


def run_scan(tree: PathLike, out_path: Optional[PathLike] = None) -> List[ScanRecord]:
    """
    Split a source tree into documentation units and their code, keeping
    the units whose documentation relates two or more parameters.

    Raises:
        OSError: If ``tree`` does not exist or cannot be read
    """
    records = []
    for unit in extract_docstrings(tree):
        if not unit.functions:
            continue
        record = _scan_unit(unit)
        if record.candidates:
            records.append(record)
    logger.info(f"Found {len(records)} pairable units under {tree}")
    if out_path is not None:
        _write_lines([r.model_dump_json() for r in records], out_path)
    return records


def _bind_function(record: ScanRecord, params: Sequence[str]) -> Optional[ScannedFunction]:
    if not record.functions:
        return None

    def overlap(fn: ScannedFunction) -> int:
        return len(set(params) & set(fn.params))

    supported = [fn for fn in record.functions if fn.supported]
    best = max(supported, key=overlap, default=None)
    if best is not None and overlap(best) > 0:
        return best
    return record.functions[0]


def run_extract(
    scan_records: Sequence[ScanRecord],
    client: LlmClient,
    cfg: ToolConfig = ToolConfig(),
) -> List[CorpusRecord]:
    """
    Extract the documented constraints of every scanned unit and pair each
    one with the bound function sharing the most of its parameters.

    Raises:
        ClientError: From the client; records built before the failure are
            on ``partial``
    """
    few_shots = load_few_shots() if cfg.extraction.few_shot else []
    corpus: List[CorpusRecord] = []
    for record in scan_records:
        unit = record.unit
        try:
            result = extract_constraints(unit, client, cfg.extraction, few_shots)
        except ClientError as e:
            e.partial = corpus
            raise
        for n, constraint in enumerate(result.constraints):
            fn = _bind_function(record, params_of(parse_constraint(constraint.text)))
            if fn is None:
                logger.warning(f"No function bound to {unit.owner_name}; dropping {constraint.text}")
                continue
            owner = unit.owner_name if unit.owner_kind is not OwnerKind.CLASS else f"{unit.owner_name}.{fn.name}"
            corpus.append(
                CorpusRecord(
                    record_id=f"{unit.owner_name}#{n}",
                    file_path=unit.file_path,
                    owner=owner,
                    doc_text=constraint.sentence,
                    constraint_text=constraint.text,
                    code_source=fn.source,
                    label=Label.UNKNOWN,
                    param_types=unit.param_types(),
                )
            )
    logger.info(f"Extracted {len(corpus)} constraints from {len(scan_records)} units")
    return corpus


def check_records(records: Sequence[CorpusRecord], cfg: ToolConfig = ToolConfig()) -> List[Verdict]:
    """Check every record, in a process pool when ``checker.workers`` > 1"""
    check_cfg = cfg.check_config()
    if check_cfg.workers > 1 and len(records) > 1:
        with ProcessPoolExecutor(max_workers=check_cfg.workers) as pool:
            verdicts = list(pool.map(partial(check_record, cfg=check_cfg), records))
    else:
        verdicts = [check_record(record, check_cfg) for record in records]
    logger.info(
        f"Checked {len(verdicts)} records: "
        f"{sum(v.status is Status.INCONSISTENT for v in verdicts)} inconsistent, "
        f"{sum(v.status is Status.UNRESOLVED for v in verdicts)} unresolved"
    )
    return verdicts


def exit_code(verdicts: Sequence[Verdict]) -> int:
    """1 when any verdict is Inconsistent; Unresolved verdicts do not count"""
    return EXIT_INCONSISTENT if any(v.status is Status.INCONSISTENT for v in verdicts) else EXIT_CLEAN


def run_check(
    corpus_path: PathLike,
    cfg: ToolConfig = ToolConfig(),
    out_path: Optional[PathLike] = None,
) -> int:
    """
    Check a corpus and write the report in ``cfg.report.format``.

    Returns:
        The exit code (0 clean, 1 inconsistencies found)

    Raises:
        CorpusParseError: If the corpus is malformed
    """
    verdicts = check_records(read_records(corpus_path), cfg)
    text = render_report(verdicts, cfg.report.format)
    if out_path is None:
        click.echo(text, nl=False)
    else:
        _write_lines([text.rstrip("\n")], out_path)
    return exit_code(verdicts)


def run_mutate(
    corpus_path: PathLike,
    patterns: Optional[Sequence[MutationPattern]],
    seed: int,
    out_path: PathLike,
    manifest_path: Optional[PathLike] = None,
    cfg: ToolConfig = ToolConfig(),
    per_record: int = 2,
) -> List[CorpusRecord]:
    """Mutate a corpus and write the mutants and their manifest"""
    records = read_records(corpus_path)
    mutants, manifest = mutate_records(records, patterns, seed, per_record, cfg.check_config())
    if not mutants:
        logger.warning("No pattern applied to any record; the mutated corpus is empty")
    write_records(mutants, out_path)
    manifest_path = manifest_path or Path(out_path).with_suffix(".manifest.jsonl")
    write_manifest(manifest, manifest_path)
    return mutants


def _config(ctx: click.Context, **flags) -> ToolConfig:
    return load_config(ctx.obj["config"], flag_overrides(**flags))


def _fail(ctx: click.Context, e: Exception) -> None:
    logger.error(str(e))
    ctx.exit(EXIT_ERROR)


@click.group()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None, help="YAML configuration file")
@click.option("--verbose", is_flag=True, help="Log per-path and per-query detail")
@click.pass_context
def main(ctx: click.Context, config_path: Optional[str], verbose: bool) -> None:
    """Find inconsistencies between documented parameter constraints and code."""
    ctx.ensure_object(dict)
    ctx.obj["config"] = config_path
    if verbose:
        set_level("DEBUG")


@main.command()
@click.argument("tree", type=click.Path())
@click.option("-o", "--output", type=click.Path(), required=True, help="Scan JSONL to write")
@click.pass_context
def scan(ctx: click.Context, tree: str, output: str) -> None:
    """Collect documented units and their code from a source tree."""
    try:
        run_scan(tree, output)
    except (CdiError, OSError) as e:
        _fail(ctx, e)


@main.command()
@click.argument("scan_path", type=click.Path())
@click.option("-o", "--output", type=click.Path(), required=True, help="Corpus JSONL to write")
@click.option("--replay", type=click.Path(), default=None, help="Serve completions from a replay file")
@click.option("--record", "record_path", type=click.Path(), default=None, help="Append exchanges to a replay file")
@click.pass_context
def extract(ctx: click.Context, scan_path: str, output: str, replay: Optional[str], record_path: Optional[str]) -> None:
    """Extract documented constraints into a corpus."""
    try:
        cfg = _config(
            ctx,
            extraction__client="replay" if replay else None,
            extraction__replay_path=replay,
            extraction__record_path=record_path,
        )
        records = run_extract(read_scan(scan_path), build_client(cfg.extraction), cfg)
        write_records(records, output)
    except ClientError as e:
        if e.partial:
            write_records(e.partial, output)
            logger.error(f"Wrote {len(e.partial)} records extracted before the failure")
        _fail(ctx, e)
    except (CdiError, OSError) as e:
        _fail(ctx, e)


@main.command()
@click.argument("corpus_path", type=click.Path())
@click.option("-o", "--output", type=click.Path(), default=None, help="Report file (stdout when omitted)")
@click.option("--fuzzy/--no-fuzzy", default=None, help="Fuzzy constraint logic or crisp checking")
@click.option("--tau", type=float, default=None, help="Consistency threshold")
@click.option("--beta", type=float, default=None, help="Operator weight in expression similarity")
@click.option("--max-paths", type=int, default=None, help="Path enumeration cap")
@click.option("--workers", type=int, default=None, help="Worker processes")
@click.option("--format", "report_format", type=click.Choice(["json", "markdown"]), default=None)
@click.pass_context
def check(
    ctx: click.Context,
    corpus_path: str,
    output: Optional[str],
    fuzzy: Optional[bool],
    tau: Optional[float],
    beta: Optional[float],
    max_paths: Optional[int],
    workers: Optional[int],
    report_format: Optional[str],
) -> None:
    """Check every corpus record; exits 1 when an inconsistency is found."""
    try:
        cfg = _config(
            ctx,
            checker__fuzzy_enabled=fuzzy,
            fcl__tau=tau,
            fcl__beta=beta,
            checker__max_paths=max_paths,
            checker__workers=workers,
            report__format=report_format,
        )
        code = run_check(corpus_path, cfg, output)
    except (CdiError, OSError) as e:
        _fail(ctx, e)
        return
    ctx.exit(code)


@main.command()
@click.argument("corpus_path", type=click.Path())
@click.option("-o", "--output", type=click.Path(), required=True, help="Mutated corpus JSONL to write")
@click.option("--manifest", type=click.Path(), default=None, help="Manifest JSONL (next to the output by default)")
@click.option(
    "--pattern",
    "patterns",
    multiple=True,
    type=click.Choice([p.value for p in MutationPattern]),
    help="Patterns to draw from (all when omitted)",
)
@click.option("--seed", type=int, default=0)
@click.option("--per-record", type=int, default=2, help="Mutations per record")
@click.pass_context
def mutate(
    ctx: click.Context,
    corpus_path: str,
    output: str,
    manifest: Optional[str],
    patterns: Sequence[str],
    seed: int,
    per_record: int,
) -> None:
    """Build an inconsistency dataset by mutating a corpus."""
    try:
        cfg = _config(ctx)
        chosen = [MutationPattern(p) for p in patterns] or None
        run_mutate(corpus_path, chosen, seed, output, manifest, cfg, per_record)
    except (CdiError, OSError) as e:
        _fail(ctx, e)


@main.command()
@click.argument("verdicts_path", type=click.Path())
@click.option("--format", "report_format", type=click.Choice(["json", "markdown"]), default="markdown")
@click.option("-o", "--output", type=click.Path(), default=None)
@click.pass_context
def report(ctx: click.Context, verdicts_path: str, report_format: str, output: Optional[str]) -> None:
    """Render a JSON check report in another format."""
    try:
        text = render_report(read_verdicts(verdicts_path), report_format)
        if output is None:
            click.echo(text, nl=False)
        else:
            _write_lines([text.rstrip("\n")], output)
    except (CdiError, OSError, ValueError) as e:
        _fail(ctx, e)


@main.command()
@click.argument("corpus_path", type=click.Path())
@click.argument("verdicts_path", type=click.Path())
@click.pass_context
def evaluate(ctx: click.Context, corpus_path: str, verdicts_path: str) -> None:
    """Precision and recall of a JSON check report against corpus labels."""
    try:
        summary = evaluate_corpus(read_records(corpus_path), read_verdicts(verdicts_path))
    except (CdiError, OSError, ValueError) as e:
        _fail(ctx, e)
        return
    click.echo(json.dumps(summary.model_dump(mode="json"), sort_keys=True, indent=2))


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def serve(host: str, port: int) -> None:
    """Start the HTTP API."""
    from .app import serve as serve_app

    serve_app(host=host, port=port)


if __name__ == "__main__":
    main()
