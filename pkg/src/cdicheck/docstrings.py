"""Docstring extraction and NumPy / Google section parsing."""

import ast
import inspect
import re
import textwrap
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from .logger import logger
from .models import BoundFunction, CandidatePair, DocStyle, DocUnit, OwnerKind, ParamDoc, Section

NUMPY_SECTIONS = {
    "Parameters": Section.PARAMETERS,
    "Other Parameters": Section.PARAMETERS,
    "Attributes": Section.ATTRIBUTES,
    "Returns": Section.RETURNS,
    "Raises": Section.RAISES,
}
NUMPY_OTHER = {
    "Yields",
    "Receives",
    "Warns",
    "Warnings",
    "See Also",
    "Notes",
    "References",
    "Examples",
    "Methods",
}

GOOGLE_SECTIONS = {
    "Args": Section.ARGS,
    "Arguments": Section.ARGS,
    "Keyword Args": Section.ARGS,
    "Keyword Arguments": Section.ARGS,
    "Parameters": Section.ARGS,
    "Attributes": Section.ATTRIBUTES,
    "Returns": Section.RETURNS,
    "Raises": Section.RAISES,
}
GOOGLE_OTHER = {
    "Yields",
    "Note",
    "Notes",
    "Example",
    "Examples",
    "Todo",
    "See Also",
    "References",
    "Warning",
    "Warnings",
    "Methods",
}

CANDIDATE_SECTIONS = (Section.PARAMETERS, Section.ATTRIBUTES, Section.ARGS)

_NUMPY_ENTRY = re.compile(
    r"^(?P<names>\*{0,2}[A-Za-z_]\w*(?:\s*,\s*\*{0,2}[A-Za-z_]\w*)*)\s*(?::\s*(?P<type>.*))?$"
)
_GOOGLE_ENTRY = re.compile(r"^(?P<name>\*{0,2}[A-Za-z_]\w*)\s*(?:\((?P<type>.*)\))?\s*:\s*(?P<desc>.*)$")
_DEFAULT = re.compile(r"default(?:\s*[=:]\s*|\s+)(?P<value>[^,;]+)")
_SENTENCE_END = re.compile(r"(?<=[.!?])\s+")


def _indent(line: str) -> int:
    return len(line) - len(line.lstrip())


def _default_of(type_text: str) -> Optional[str]:
    found = _DEFAULT.search(type_text)
    return found.group("value").strip() if found else None


def _join(lines: List[str]) -> str:
    return " ".join(line.strip() for line in lines if line.strip())


def _numpy_headers(lines: List[str]) -> List[Tuple[int, str]]:
    headers = []
    for i, line in enumerate(lines[:-1]):
        title = line.strip()
        underline = lines[i + 1].strip()
        if (
            (title in NUMPY_SECTIONS or title in NUMPY_OTHER)
            and re.fullmatch(r"-+", underline)
            and len(underline) == len(title)
        ):
            headers.append((i, title))
    return headers


def _parse_numpy(lines: List[str], headers: List[Tuple[int, str]]) -> List[ParamDoc]:
    params: List[ParamDoc] = []
    for n, (start, title) in enumerate(headers):
        if title not in NUMPY_SECTIONS:
            continue
        end = headers[n + 1][0] if n + 1 < len(headers) else len(lines)
        block = [line for line in lines[start + 2 : end]]
        content = [line for line in block if line.strip()]
        if not content:
            continue
        base = min(_indent(line) for line in content)

        entry: Optional[Tuple[str, str]] = None
        description: List[str] = []

        def flush():
            if entry is None:
                return
            names, type_text = entry
            for name in (part.strip().lstrip("*") for part in names.split(",")):
                params.append(
                    ParamDoc(
                        name=name,
                        type_text=type_text,
                        default_text=_default_of(type_text),
                        description=_join(description),
                        section=NUMPY_SECTIONS[title],
                    )
                )

        for line in block:
            if not line.strip():
                description.append("")
                continue
            if _indent(line) == base:
                flush()
                description = []
                found = _NUMPY_ENTRY.match(line.strip())
                if found is None:
                    logger.warning(f"Skipping malformed {title} entry: {line.strip()}")
                    entry = None
                    continue
                entry = (found.group("names"), (found.group("type") or "").strip())
            elif entry is not None:
                description.append(line)
        flush()
    return params


def _google_headers(lines: List[str]) -> List[Tuple[int, str]]:
    headers = []
    for i, line in enumerate(lines):
        stripped = line.strip()
        if stripped.endswith(":") and (stripped[:-1] in GOOGLE_SECTIONS or stripped[:-1] in GOOGLE_OTHER):
            headers.append((i, stripped[:-1]))
    return headers


def _parse_google(lines: List[str], headers: List[Tuple[int, str]]) -> List[ParamDoc]:
    params: List[ParamDoc] = []
    for n, (start, title) in enumerate(headers):
        if title not in GOOGLE_SECTIONS:
            continue
        header_indent = _indent(lines[start])
        end = headers[n + 1][0] if n + 1 < len(headers) else len(lines)
        block = lines[start + 1 : end]
        content = [line for line in block if line.strip()]
        if not content or min(_indent(line) for line in content) <= header_indent:
            continue
        base = min(_indent(line) for line in content)

        current: Optional[Dict[str, str]] = None
        extra: List[str] = []

        def flush():
            if current is None:
                return
            type_text = current["type"]
            params.append(
                ParamDoc(
                    name=current["name"],
                    type_text=type_text,
                    default_text=_default_of(type_text),
                    description=_join([current["desc"]] + extra),
                    section=GOOGLE_SECTIONS[title],
                )
            )

        for line in block:
            if not line.strip():
                continue
            if _indent(line) == base:
                flush()
                extra = []
                found = _GOOGLE_ENTRY.match(line.strip())
                if found is None:
                    logger.warning(f"Skipping malformed {title} entry: {line.strip()}")
                    current = None
                    continue
                current = {
                    "name": found.group("name").lstrip("*"),
                    "type": (found.group("type") or "").strip(),
                    "desc": found.group("desc").strip(),
                }
            elif current is not None:
                extra.append(line)
        flush()
    return params


def _dedupe(params: List[ParamDoc]) -> List[ParamDoc]:
    seen: Dict[str, ParamDoc] = {}
    for p in params:
        if p.name in seen:
            logger.debug(f"Duplicate documentation for '{p.name}' in {p.section.value}; keeping the first")
            continue
        seen[p.name] = p
    return list(seen.values())


def parse_param_sections(docstring: str) -> Tuple[DocStyle, List[ParamDoc]]:
    """
    Detect the docstring style and parse its parameter-like sections.

    A section title underlined by dashes of the same length marks a NumPy
    docstring; a known title ending in ``:`` followed by indented
    ``name (type): description`` entries marks a Google docstring. Entries
    documented twice (e.g. under Parameters and Attributes) keep their first
    occurrence.

    Args:
        docstring: Raw docstring text

    Returns:
        Tuple of (style, entries); (Unknown, []) when neither style is found
    """
    text = inspect.cleandoc(docstring or "")
    if not text.strip():
        return DocStyle.UNKNOWN, []
    lines = text.splitlines()

    numpy_headers = _numpy_headers(lines)
    if numpy_headers:
        return DocStyle.NUMPY, _dedupe(_parse_numpy(lines, numpy_headers))

    google_headers = _google_headers(lines)
    params = _parse_google(lines, google_headers)
    if params:
        return DocStyle.GOOGLE, _dedupe(params)
    return DocStyle.UNKNOWN, []


def _bind(node: Union[ast.FunctionDef, ast.AsyncFunctionDef], lines: List[str]) -> BoundFunction:
    source = "\n".join(lines[node.lineno - 1 : node.end_lineno])
    return BoundFunction(
        name=node.name,
        source=textwrap.dedent(source),
        first_line=node.lineno,
        last_line=node.end_lineno,
    )


def _unit(
    kind: OwnerKind,
    name: str,
    node: ast.AST,
    docstring: str,
    file_path: str,
    functions: List[BoundFunction],
) -> DocUnit:
    style, params = parse_param_sections(docstring)
    return DocUnit(
        owner_kind=kind,
        owner_name=name,
        style=style,
        params=params,
        file_path=file_path,
        line_range=(node.lineno, node.end_lineno),
        docstring=docstring,
        functions=functions,
    )


def _module_name(relative: Path) -> str:
    parts = list(relative.with_suffix("").parts)
    if parts and parts[-1] == "__init__":
        parts = parts[:-1]
    return ".".join(parts)


def extract_docstrings(source_tree: Union[str, Path]) -> List[DocUnit]:
    """
    Collect one DocUnit per documented class, function and method.

    A class unit binds every method of the class; a documented method also
    gets a unit of its own. Files that do not parse are skipped with a
    warning.

    Args:
        source_tree: Directory to walk, or a single ``.py`` file

    Returns:
        DocUnits in file then source order

    Raises:
        OSError: If ``source_tree`` does not exist or cannot be read
    """
    root = Path(source_tree)
    if not root.exists():
        raise FileNotFoundError(f"No such file or directory: {root}")
    files = [root] if root.is_file() else sorted(root.rglob("*.py"))
    base = root.parent if root.is_file() else root

    units: List[DocUnit] = []
    for path in files:
        relative = path.relative_to(base)
        try:
            text = path.read_text(encoding="utf-8")
            tree = ast.parse(text)
        except (SyntaxError, UnicodeDecodeError) as e:
            logger.warning(f"Skipping {relative}: {e}")
            continue
        lines = text.splitlines()
        module = _module_name(relative)
        file_path = relative.as_posix()

        for node in tree.body:
            if isinstance(node, ast.ClassDef):
                qualified = f"{module}.{node.name}" if module else node.name
                methods = [n for n in node.body if isinstance(n, (ast.FunctionDef, ast.AsyncFunctionDef))]
                docstring = ast.get_docstring(node, clean=False)
                if docstring:
                    bound = [_bind(m, lines) for m in methods]
                    units.append(_unit(OwnerKind.CLASS, qualified, node, docstring, file_path, bound))
                for method in methods:
                    method_doc = ast.get_docstring(method, clean=False)
                    if method_doc:
                        units.append(
                            _unit(
                                OwnerKind.METHOD,
                                f"{qualified}.{method.name}",
                                method,
                                method_doc,
                                file_path,
                                [_bind(method, lines)],
                            )
                        )
            elif isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
                docstring = ast.get_docstring(node, clean=False)
                if docstring:
                    qualified = f"{module}.{node.name}" if module else node.name
                    units.append(
                        _unit(OwnerKind.FUNCTION, qualified, node, docstring, file_path, [_bind(node, lines)])
                    )

    logger.info(f"Found {len(units)} documented units in {len(files)} files under {root}")
    return units


def _mentions(name: str) -> re.Pattern:
    return re.compile(rf"(?<![A-Za-z0-9_]){re.escape(name)}(?![A-Za-z0-9_])")


def filter_candidates(unit: DocUnit) -> List[CandidatePair]:
    """
    Pairs (a, b) where b's name occurs as a whole word in a's description.

    Only Parameters, Attributes and Args entries take part. The evidence is
    the first sentence of a's description that mentions b.
    """
    pool = [p for p in unit.params if p.section in CANDIDATE_SECTIONS]
    pairs: List[CandidatePair] = []
    for a in pool:
        sentences = _SENTENCE_END.split(a.description.strip())
        for b in pool:
            if b.name == a.name:
                continue
            pattern = _mentions(b.name)
            sentence = next((s for s in sentences if pattern.search(s)), None)
            if sentence is not None:
                pairs.append(CandidatePair(param_a=a.name, param_b=b.name, evidence=sentence))
    return pairs
