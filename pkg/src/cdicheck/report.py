import json
from collections import defaultdict
from typing import Dict, List, Literal, Sequence

from .checker import classify
from .models import InconsistencyKind, ReportSummary, Status, Verdict

ReportFormat = Literal["json", "markdown"]


def _render_json(summary: ReportSummary) -> str:
    verdicts = [v.model_dump(mode="json") for v in summary.verdicts]
    return json.dumps(verdicts, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _quote(text: str) -> List[str]:
    return [f"> {line}" if line.strip() else ">" for line in text.strip().splitlines()]


def _finding(verdict: Verdict) -> List[str]:
    title = verdict.function or verdict.record_id or "(unnamed)"
    lines = [f"#### `{title}`", ""]
    if verdict.doc_text.strip():
        lines += _quote(verdict.doc_text) + [""]
    lines.append(f"- Documented constraint: `{verdict.constraint}`")
    if verdict.mu is not None:
        lines.append(f"- Membership: {verdict.mu:.4f}")
    if verdict.record_id:
        lines.append(f"- Record: `{verdict.record_id}`")
    if verdict.evidence:
        if verdict.kind is InconsistencyKind.INCOMPLETENESS:
            lines.append("- Branches the documentation does not cover:")
        else:
            lines.append("- Code paths contradicting the documentation:")
        lines += [f"  - `{item}`" for item in verdict.evidence]
    lines.append("")
    return lines


def _render_markdown(summary: ReportSummary) -> str:
    lines = [
        "# Documentation consistency report",
        "",
        f"- Checked: {summary.total}",
        f"- Consistent: {summary.consistent}",
        f"- Inconsistent: {summary.inconsistent} "
        f"(incorrectness: {summary.incorrectness}, incompleteness: {summary.incompleteness})",
        f"- Unresolved: {summary.unresolved}",
        "",
    ]

    findings = [v for v in summary.verdicts if v.status is Status.INCONSISTENT]
    if not findings:
        lines += ["No findings.", ""]

    by_file: Dict[str, Dict[str, List[Verdict]]] = defaultdict(lambda: defaultdict(list))
    for verdict in findings:
        kind = verdict.kind.value if verdict.kind else "Inconsistency"
        by_file[verdict.file_path or "(unknown file)"][kind].append(verdict)

    for file_path in sorted(by_file):
        lines += [f"## {file_path}", ""]
        for kind in sorted(by_file[file_path]):
            lines += [f"### {kind}", ""]
            for verdict in by_file[file_path][kind]:
                lines += _finding(verdict)

    unresolved = [v for v in summary.verdicts if v.status is Status.UNRESOLVED]
    if unresolved:
        lines += ["## Unresolved", ""]
        for verdict in unresolved:
            title = verdict.function or verdict.record_id or "(unnamed)"
            lines.append(f"- `{title}`: {verdict.reason or 'no reason given'}")
        lines.append("")

    return "\n".join(lines)


def render_report(verdicts: Sequence[Verdict], format: ReportFormat = "json") -> str:
    """
    Render verdicts, most suspicious first.

    Args:
        verdicts: Verdicts in any order
        format: ``json`` for a sorted-key array of verdict objects,
            ``markdown`` for findings grouped by file and kind

    Returns:
        The report text
    """
    summary = classify(verdicts)
    if format == "json":
        return _render_json(summary)
    if format == "markdown":
        return _render_markdown(summary)
    raise ValueError(f"Unknown report format: {format}")
