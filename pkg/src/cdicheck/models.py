from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator


class Status(str, Enum):
    CONSISTENT = "Consistent"
    INCONSISTENT = "Inconsistent"
    UNRESOLVED = "Unresolved"


class InconsistencyKind(str, Enum):
    INCORRECTNESS = "Incorrectness"
    INCOMPLETENESS = "Incompleteness"


class DocStyle(str, Enum):
    NUMPY = "NumPy"
    GOOGLE = "Google"
    UNKNOWN = "Unknown"


class OwnerKind(str, Enum):
    CLASS = "Class"
    FUNCTION = "Function"
    METHOD = "Method"


class Section(str, Enum):
    PARAMETERS = "Parameters"
    ATTRIBUTES = "Attributes"
    ARGS = "Args"
    RETURNS = "Returns"
    RAISES = "Raises"


class Label(str, Enum):
    CONSISTENT = "Consistent"
    INCONSISTENT = "Inconsistent"
    UNKNOWN = "Unknown"


class Validation(str, Enum):
    EQUIVALENT = "Equivalent"
    WEAKER = "Weaker"
    STRONGER = "Stronger"
    VIOLATES = "Violates"
    UNDECIDED = "Undecided"


class MutationPattern(str, Enum):
    PARAM_NAME_CHANGE = "ParamNameChange"
    VALUE_CHANGE = "ValueChange"
    LOGIC_CHANGE = "LogicChange"
    REMOVE_PARAMETER = "RemoveParameter"
    ADD_CONSTRAINT = "AddConstraint"
    REMOVE_CONSTRAINT = "RemoveConstraint"
    MISSING_DOCUMENTATION = "MissingDocumentation"
    MODIFY_DESCRIPTION = "ModifyDescription"


# Documentation


class ParamDoc(BaseModel):
    name: str
    type_text: str = ""
    default_text: Optional[str] = None
    description: str = ""
    section: Section = Section.PARAMETERS

    @field_validator("name")
    def name_not_empty(cls, v):
        if not v:
            raise ValueError("Parameter name must not be empty")
        return v


class BoundFunction(BaseModel):
    name: str
    source: str
    first_line: int
    last_line: int


class DocUnit(BaseModel):
    owner_kind: OwnerKind
    owner_name: str
    style: DocStyle
    params: List[ParamDoc] = []
    file_path: str
    line_range: Tuple[int, int]
    docstring: str = ""
    functions: List[BoundFunction] = []

    @field_validator("params")
    def unique_names(cls, v):
        names = [p.name for p in v]
        if len(names) != len(set(names)):
            raise ValueError("Parameter names must be unique within a unit")
        return v

    @property
    def param_names(self) -> List[str]:
        return [p.name for p in self.params]

    def param_types(self) -> Dict[str, str]:
        return {p.name: p.type_text for p in self.params if p.type_text}


class CandidatePair(BaseModel):
    param_a: str
    param_b: str
    evidence: str


class ScannedFunction(BaseModel):
    name: str
    source: str
    supported: bool = True
    reason: Optional[str] = None
    params: List[str] = []


class ScanRecord(BaseModel):
    unit: DocUnit
    functions: List[ScannedFunction]
    candidates: List[CandidatePair]


# Corpus


class MutationInfo(BaseModel):
    parent_id: str
    pattern: MutationPattern
    seed: int


class CorpusRecord(BaseModel):
    record_id: str = ""
    repo: str = ""
    sha: str = ""
    file_path: str = ""
    owner: str = ""
    doc_text: str = ""
    constraint_text: str = ""
    code_source: str = ""
    label: Label = Label.UNKNOWN
    mismatch_note: Optional[str] = None
    param_types: Dict[str, str] = {}
    mutation: Optional[MutationInfo] = None


class ManifestEntry(BaseModel):
    record_id: str
    parent_id: str
    pattern: MutationPattern
    seed: int
    validation: Validation
    label: Label


# Results


class PathScore(BaseModel):
    index: int
    rho: float
    satisfied: bool
    score: float


class Membership(BaseModel):
    value: float = Field(ge=0.0, le=1.0)
    per_path: List[PathScore] = []


class Verdict(BaseModel):
    status: Status
    kind: Optional[InconsistencyKind] = None
    membership: Optional[Membership] = None
    evidence: List[str] = []
    constraint: str = ""
    function: str = ""
    file_path: str = ""
    record_id: str = ""
    doc_text: str = ""
    reason: Optional[str] = None

    @property
    def mu(self) -> Optional[float]:
        return self.membership.value if self.membership is not None else None


class ReportSummary(BaseModel):
    total: int = 0
    consistent: int = 0
    inconsistent: int = 0
    unresolved: int = 0
    incorrectness: int = 0
    incompleteness: int = 0
    verdicts: List[Verdict] = []


class EvaluationSummary(BaseModel):
    true_positives: int = 0
    false_positives: int = 0
    false_negatives: int = 0
    true_negatives: int = 0
    unresolved: int = 0
    precision: Optional[float] = None
    recall: Optional[float] = None


# Extraction


class ExtractedConstraint(BaseModel):
    text: str
    sentence: str = ""
    confidence: str = ""


class Reject(BaseModel):
    line: str
    error: str


class ExtractionResult(BaseModel):
    constraints: List[ExtractedConstraint] = []
    rejects: List[Reject] = []


class FewShot(BaseModel):
    sentence: str
    constraint: str


class ExtractionRequest(BaseModel):
    doc_chunks: List[str]
    param_names: List[str]
    few_shots: List[FewShot] = []
    chain_of_thought: bool = True

    @field_validator("param_names")
    def param_names_not_empty(cls, v):
        if not v:
            raise ValueError("param_names must not be empty")
        return v


class ReplayRecord(BaseModel):
    model_config = ConfigDict(extra="ignore")

    prompt_hash: str = ""
    prompt: str = ""
    completion: str


# HTTP


class ParseRequest(BaseModel):
    text: str


class ParseResponse(BaseModel):
    canonical: str
    params: List[str]
    normalized: str


class SimilarityRequest(BaseModel):
    constraint: str
    environment: List[str]
    beta: Optional[float] = None


class SimilarityResponse(BaseModel):
    similarity: float


class CheckRequest(BaseModel):
    constraint: str
    code: str
    fuzzy: Optional[bool] = None
    tau: Optional[float] = None
    param_types: Dict[str, str] = {}


class MutateRequest(BaseModel):
    record: CorpusRecord
    pattern: MutationPattern
    seed: int = 0


class MutateResponse(BaseModel):
    record: CorpusRecord
    validation: Optional[Validation] = None


class DocstringRequest(BaseModel):
    docstring: str


class DocstringResponse(BaseModel):
    style: DocStyle
    params: List[ParamDoc]
