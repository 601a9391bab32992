"""Constraint extraction from documentation with a chat-completion model."""

import math
import re
from pathlib import Path
from typing import List, Optional, Sequence, Set, Union

from omegaconf import OmegaConf

from .configs import ExtractionConfig
from .constraint_lang import params_of, parse_constraint, print_constraint
from .errors import ClientError, ConstraintSyntaxError, UnknownParameter
from .llm import LlmClient
from .logger import logger
from .models import (
    DocUnit,
    ExtractedConstraint,
    ExtractionRequest,
    ExtractionResult,
    FewShot,
    Reject,
)
from .docstrings import CANDIDATE_SECTIONS

FEW_SHOTS_PATH = Path(__file__).parent / "prompts" / "few_shots.yaml"

WORDS_PER_TOKEN = 0.75

FUZZY_WORDS = (
    "ignore",
    "no effect",
    "unused",
    "override",
    "specify",
    "have an effect",
    "exist",
    "significant",
)

_BULLET = re.compile(r"^(?:[-*•]\s+|\d+[.)]\s+)")


def load_few_shots(path: Union[str, Path, None] = None) -> List[FewShot]:
    data = OmegaConf.to_container(OmegaConf.load(path or FEW_SHOTS_PATH), resolve=True)
    return [FewShot(**item) for item in data.get("few_shots", [])]


def estimate_tokens(text: str) -> int:
    return math.ceil(len(text.split()) / WORDS_PER_TOKEN)


def chunk_document(doc: str, max_words: int = 1500) -> List[str]:
    """
    Split a document at paragraph boundaries into chunks of at most
    ``max_words`` words. A paragraph longer than that is split by words.
    """
    paragraphs = [p.strip() for p in re.split(r"\n\s*\n", doc) if p.strip()]
    chunks: List[str] = []
    current: List[str] = []
    count = 0

    def flush():
        nonlocal current, count
        if current:
            chunks.append("\n\n".join(current))
        current, count = [], 0

    for paragraph in paragraphs:
        words = paragraph.split()
        if len(words) > max_words:
            flush()
            pieces = [m.group(0) for m in re.finditer(r"\S+\s*", paragraph)]
            for start in range(0, len(pieces), max_words):
                chunks.append("".join(pieces[start : start + max_words]).rstrip())
            continue
        if count + len(words) > max_words:
            flush()
        current.append(paragraph)
        count += len(words)
    flush()
    return chunks


_PREAMBLE = (
    "You extract constraints that relate two or more parameters of a Python API "
    "from its documentation."
)

_STAGING = (
    "Work in two steps. First find every sentence that relates two or more "
    "parameters. Then translate each of those sentences into one logical expression."
)

_SYMBOLS = "\n".join(
    [
        "Write each constraint with these symbols:",
        "  ->   implication: (A) -> (B) means B holds whenever A holds",
        "  !    negation NOT",
        "  ^    logical AND",
        "  v    logical OR, always written with a space on each side",
        "  ( )  parentheses group subexpressions; wrap every comparison in them",
        "A comparison is (name op value) where op is one of <, >, <=, >=, =, != "
        "and value is a double-quoted string, a number, True, False or None.",
    ]
)

_FUZZY = (
    "Some sentences say whether a parameter is used at all rather than what value it takes. "
    f"These keywords must be retained in the final logical expression: {', '.join(FUZZY_WORDS)}. "
    "Write ignore(x) when x is ignored, unused, overridden or has no effect, and "
    "specified(x) when x must be specified, must exist, has an effect or is significant."
)

_OUTPUT = "\n".join(
    [
        "Answer with one line per constraint in the form",
        "<constraint> | <source sentence> | <confidence: high, medium or low>",
        "Answer NONE if the documentation states no constraint between parameters.",
    ]
)


def build_extraction_prompt(req: ExtractionRequest, chunk_index: int) -> str:
    """
    Build the prompt for one chunk of a request.

    Sections, in order: task, symbol definitions, usage keywords, examples,
    parameter list, documentation chunk, answer format.

    Raises:
        IndexError: If ``chunk_index`` is out of range
    """
    if not 0 <= chunk_index < len(req.doc_chunks):
        raise IndexError(f"Chunk {chunk_index} out of range for {len(req.doc_chunks)} chunks")

    sections = [_PREAMBLE]
    if req.chain_of_thought:
        sections.append(_STAGING)
    sections.append(_SYMBOLS)
    sections.append(_FUZZY)
    if req.few_shots:
        examples = ["Examples:"]
        for shot in req.few_shots:
            examples.append(f"Sentence: {shot.sentence}\nConstraint: {shot.constraint}")
        sections.append("\n".join(examples))
    sections.append(f"Parameters: {', '.join(req.param_names)}")
    sections.append(f"Documentation:\n{req.doc_chunks[chunk_index]}")
    sections.append(_OUTPUT)
    return "\n\n".join(sections)


def parse_llm_output(completion: str, param_names: Optional[Sequence[str]] = None) -> ExtractionResult:
    """
    Parse ``<constraint> | <sentence> | <confidence>`` lines.

    Lines that do not parse, or that name parameters outside
    ``param_names`` (``call_*`` symbols excepted), become rejects.
    """
    result = ExtractionResult()
    allowed = set(param_names) if param_names is not None else None
    for raw in completion.splitlines():
        line = _BULLET.sub("", raw.strip()).strip().strip("`").strip()
        if not line or line.rstrip(".").upper() == "NONE":
            continue
        parts = [part.strip() for part in line.split(" | ")]
        text = parts[0]
        try:
            c = parse_constraint(text)
        except ConstraintSyntaxError as e:
            result.rejects.append(Reject(line=raw.strip(), error=str(e)))
            continue
        if allowed is not None:
            unknown = [p for p in params_of(c) if p not in allowed and not p.startswith("call_")]
            if unknown:
                result.rejects.append(Reject(line=raw.strip(), error=str(UnknownParameter(unknown[0]))))
                continue
        result.constraints.append(
            ExtractedConstraint(
                text=print_constraint(c),
                sentence=parts[1] if len(parts) > 1 else "",
                confidence=parts[2] if len(parts) > 2 else "",
            )
        )
    for reject in result.rejects:
        logger.warning(f"Rejected model output line: {reject.line} ({reject.error})")
    return result


def unit_document(unit: DocUnit) -> str:
    """Key-value text of a unit's parameter-like entries"""
    entries = []
    for p in unit.params:
        if p.section not in CANDIDATE_SECTIONS:
            continue
        head = f"{p.name} ({p.type_text})" if p.type_text else p.name
        entries.append(f"{head}: {p.description}")
    return "\n\n".join(entries)


def _fitted_prompts(req: ExtractionRequest, chunk: str, max_tokens: int) -> List[str]:
    single = req.model_copy(update={"doc_chunks": [chunk]})
    prompt = build_extraction_prompt(single, 0)
    words = chunk.split()
    if estimate_tokens(prompt) <= max_tokens or len(words) < 2:
        if estimate_tokens(prompt) > max_tokens:
            logger.warning("Prompt exceeds the client token limit and cannot be split further")
        return [prompt]
    half = len(words) // 2
    return _fitted_prompts(req, " ".join(words[:half]), max_tokens) + _fitted_prompts(
        req, " ".join(words[half:]), max_tokens
    )


def extract_constraints(
    unit: DocUnit,
    client: LlmClient,
    cfg: ExtractionConfig = ExtractionConfig(),
    few_shots: Optional[List[FewShot]] = None,
) -> ExtractionResult:
    """
    Extract the constraints documented by one unit.

    Args:
        unit: Documentation unit with at least one parameter entry
        client: Chat-completion client
        cfg: Extraction settings
        few_shots: Examples to show; defaults to the bundled set when
            ``cfg.few_shot`` is on

    Returns:
        Merged result over all chunks, without duplicate constraints

    Raises:
        ClientError: From the client; ``partial`` holds what was extracted
            before the failure
    """
    result = ExtractionResult()
    names = unit.param_names
    if not names:
        return result
    if few_shots is None:
        few_shots = load_few_shots() if cfg.few_shot else []

    chunks = chunk_document(unit_document(unit), cfg.max_words)
    if not chunks:
        return result
    req = ExtractionRequest(
        doc_chunks=chunks,
        param_names=names,
        few_shots=few_shots,
        chain_of_thought=cfg.chain_of_thought,
    )

    seen: Set[str] = set()
    for chunk in chunks:
        for prompt in _fitted_prompts(req, chunk, client.max_tokens):
            try:
                completion = client.send(prompt)
            except ClientError as e:
                e.partial = result
                raise
            parsed = parse_llm_output(completion, names)
            for constraint in parsed.constraints:
                if constraint.text not in seen:
                    seen.add(constraint.text)
                    result.constraints.append(constraint)
            result.rejects.extend(parsed.rejects)

    logger.info(
        f"Extracted {len(result.constraints)} constraints from {unit.owner_name} "
        f"({len(result.rejects)} rejected lines)"
    )
    return result
