import ast
import textwrap
from pathlib import Path
from typing import Dict, List

import pytest

from cdicheck.code_model import FunctionModel, load_function
from cdicheck.models import CorpusRecord, Label

FIXTURES = Path(__file__).parent / "fixtures"
TREE = FIXTURES / "tree"
REPLAY = FIXTURES / "replay.jsonl"


def fixture_source(file_name: str, function_name: str) -> str:
    """Dedented source of a function or method defined in the fixture tree"""
    text = (TREE / file_name).read_text(encoding="utf-8")
    lines = text.splitlines()
    for node in ast.walk(ast.parse(text)):
        if isinstance(node, ast.FunctionDef) and node.name == function_name:
            return textwrap.dedent("\n".join(lines[node.lineno - 1 : node.end_lineno]))
    raise KeyError(function_name)


AUTOREG_INIT = fixture_source("autoreg.py", "__init__")
SPECTRAL_FIT = fixture_source("spectral.py", "fit")
LARS_PATH = fixture_source("lars.py", "lars_path")

AUTOREG_TYPES = {"seasonal": "bool", "trend": '{"n", "c", "t", "ct"}'}

FIT_SAMPLE_WEIGHT = '''
def fit(self, X, y, sample_weight=None):
    """Fit the baseline classifier."""
    if sample_weight is not None and self.strategy == "uniform":
        raise ValueError("sample_weight is not supported by the uniform strategy")
    self.classes_ = y
    return self
'''

AUTOREG_BUG = '(deterministic != None) -> !((trend != "n") ^ (seasonal != False))'
AUTOREG_FIXED = '(deterministic != None) -> !((trend != "n") v (seasonal != False))'
SPECTRAL_BUG = '(affinity = "nearest_neighbors") -> (ignore(gamma))'
SPECTRAL_FIXED = (
    '((affinity = "nearest_neighbors") v (affinity = "precomputed_nearest_neighbors") '
    'v (affinity = "precomputed")) -> (ignore(gamma))'
)
LARS_BUG = "(X = None) -> (Gram != None)"
LARS_FIXED = "(X = None) -> (Gram = None)"


def model(source: str, param_types: Dict[str, str] = None) -> FunctionModel:
    return load_function(source, param_types)


def _record(record_id, file_path, owner, doc_text, constraint, code, label, param_types=None):
    return CorpusRecord(
        record_id=record_id,
        repo="fixtures",
        sha="0" * 40,
        file_path=file_path,
        owner=owner,
        doc_text=doc_text,
        constraint_text=constraint,
        code_source=code,
        label=label,
        param_types=param_types or {},
    )


def golden(constraints: Dict[str, str], label: Label) -> List[CorpusRecord]:
    return [
        _record(
            "autoreg",
            "autoreg.py",
            "autoreg.AutoReg.__init__",
            "When deterministic is set, trend and seasonal cannot both be used.",
            constraints["autoreg"],
            AUTOREG_INIT,
            label,
            AUTOREG_TYPES,
        ),
        _record(
            "spectral",
            "spectral.py",
            "spectral.SpectralClustering.fit",
            "Ignored for affinity='nearest_neighbors'.",
            constraints["spectral"],
            SPECTRAL_FIT,
            label,
        ),
        _record(
            "lars",
            "lars.py",
            "lars.lars_path",
            "Note that if X is None then the Gram matrix must be specified.",
            constraints["lars"],
            LARS_PATH,
            label,
        ),
    ]


@pytest.fixture
def golden_records() -> List[CorpusRecord]:
    return golden({"autoreg": AUTOREG_BUG, "spectral": SPECTRAL_BUG, "lars": LARS_BUG}, Label.INCONSISTENT)


@pytest.fixture
def corrected_records() -> List[CorpusRecord]:
    return golden({"autoreg": AUTOREG_FIXED, "spectral": SPECTRAL_FIXED, "lars": LARS_FIXED}, Label.CONSISTENT)


# Guard-style functions that reject one combination of two parameters,
# each paired with the constraint its documentation states.
GUARDS = [
    ("sample_weight", "strategy", 'sample_weight is not None and strategy == "uniform"',
     '(sample_weight != None) -> (strategy != "uniform")'),
    ("solver", "penalty", 'solver == "lbfgs" and penalty == "l1"',
     '(solver = "lbfgs") -> (penalty != "l1")'),
    ("random_state", "shuffle", "random_state is not None and not shuffle",
     "(random_state != None) -> (shuffle != False)"),
    ("whiten", "n_components", "whiten and n_components is None",
     "(whiten != False) -> (n_components != None)"),
    ("criterion", "splitter", 'criterion == "poisson" and splitter == "random"',
     '(criterion = "poisson") -> (splitter != "random")'),
    ("learning_rate", "eta_zero", 'learning_rate == "constant" and eta_zero <= 0',
     '(learning_rate = "constant") -> (eta_zero > 0)'),
    ("warm_start", "n_estimators", "warm_start and n_estimators < 1",
     "(warm_start != False) -> (n_estimators >= 1)"),
    ("oob_score", "bootstrap", "oob_score and not bootstrap",
     "(oob_score != False) -> (bootstrap != False)"),
    ("algorithm", "leaf_size", 'algorithm == "brute" and leaf_size != 30',
     '(algorithm = "brute") -> (leaf_size = 30)'),
    ("kernel", "degree", 'kernel != "poly" and degree != 3',
     '(kernel != "poly") -> (degree = 3)'),
    ("average", "labels", 'average == "binary" and labels is not None',
     '(average = "binary") -> (labels = None)'),
    ("normalize", "copy_data", "normalize and copy_data is False",
     "(normalize != False) -> (copy_data != False)"),
    ("max_iter", "tolerance", "max_iter is None and tolerance is None",
     "(max_iter = None) -> (tolerance != None)"),
    ("priors", "var_smoothing", "priors is not None and var_smoothing < 0",
     "(priors != None) -> (var_smoothing >= 0)"),
    ("ccp_alpha", "min_samples", "ccp_alpha > 0 and min_samples < 2",
     "(ccp_alpha > 0) -> (min_samples >= 2)"),
    ("encoding", "errors_mode", 'encoding == "ascii" and errors_mode == "surrogateescape"',
     '(encoding = "ascii") -> (errors_mode != "surrogateescape")'),
    ("output_dir", "overwrite", "output_dir is None and overwrite",
     "(output_dir = None) -> (overwrite = False)"),
    ("retries", "timeout", "retries > 0 and timeout is None",
     "(retries > 0) -> (timeout != None)"),
    ("logfile", "verbose", "logfile is not None and verbose < 1",
     "(logfile != None) -> (verbose >= 1)"),
    ("drop_last", "batch_size", "drop_last and batch_size is None",
     "(drop_last != False) -> (batch_size != None)"),
]


def guard_source(first: str, second: str, test: str) -> str:
    return (
        f"def configure(self, {first}, {second}):\n"
        f"    if {test}:\n"
        f'        raise ValueError("unsupported combination of {first} and {second}")\n'
        f"    self.{first}_ = {first}\n"
        f"    return self\n"
    )


def guard_records() -> List[CorpusRecord]:
    return [
        _record(
            f"guard-{n:02d}",
            "guards.py",
            f"guards.configure_{first}",
            f"{second} is restricted when {first} is set.",
            constraint,
            guard_source(first, second, test),
            Label.CONSISTENT,
        )
        for n, (first, second, test, constraint) in enumerate(GUARDS)
    ]


@pytest.fixture
def guards() -> List[CorpusRecord]:
    return guard_records()
