import pytest

from cdicheck.configs import ExtractionConfig
from cdicheck.constraint_lang import parse_constraint, print_constraint
from cdicheck.docstrings import extract_docstrings
from cdicheck.errors import ClientError
from cdicheck.extraction import (
    build_extraction_prompt,
    chunk_document,
    estimate_tokens,
    extract_constraints,
    load_few_shots,
    parse_llm_output,
    unit_document,
)
from cdicheck.llm import LlmClient, MockClient, ReplayClient
from cdicheck.models import ExtractionRequest, FewShot

from conftest import AUTOREG_BUG, LARS_BUG, REPLAY, SPECTRAL_BUG, TREE


@pytest.fixture
def units():
    return {u.owner_name: u for u in extract_docstrings(TREE)}


def canonical(text: str) -> str:
    return print_constraint(parse_constraint(text))


def test_bundled_few_shots_parse():
    shots = load_few_shots()
    assert len(shots) == 4
    for shot in shots:
        parse_constraint(shot.constraint)


def test_chunk_document():
    doc = "\n\n".join(["one two three", "four five", "six " * 7])
    assert chunk_document(doc, max_words=5) == [
        "one two three\n\nfour five",
        "six six six six six",
        "six six",
    ]
    assert chunk_document("   \n\n ") == []
    assert estimate_tokens("a b c") == 4


def test_long_paragraph_keeps_its_layout():
    doc = "x: one two\n    three four\n    five six"
    chunks = chunk_document(doc, max_words=4)
    assert chunks == ["x: one two\n    three", "four\n    five six"]


def test_prompt_sections_in_order():
    req = ExtractionRequest(
        doc_chunks=["x: first chunk", "y: second chunk"],
        param_names=["x", "y"],
        few_shots=[FewShot(sentence="x must exceed y", constraint="(x > 1)")],
    )
    prompt = build_extraction_prompt(req, 1)
    markers = ["Work in two steps", "->   implication", "ignore(x)", "Examples:", "Parameters: x, y", "Documentation:\ny: second chunk", "Answer NONE"]
    positions = [prompt.index(m) for m in markers]
    assert positions == sorted(positions)
    assert "first chunk" not in prompt

    plain = build_extraction_prompt(req.model_copy(update={"chain_of_thought": False, "few_shots": []}), 0)
    assert "Work in two steps" not in plain
    assert "Examples:" not in plain
    with pytest.raises(IndexError):
        build_extraction_prompt(req, 2)


def test_parse_llm_output():
    completion = "\n".join(
        [
            "- (a = 1) -> (b != None) | If a is 1, b is required. | high",
            "`(a > 2) ^ (c = 3) | made up | low`",
            "(a = | broken | low",
            "ignore(b)",
            "NONE",
            "",
        ]
    )
    result = parse_llm_output(completion, ["a", "b"])
    assert [(c.text, c.sentence, c.confidence) for c in result.constraints] == [
        ("((a = 1) -> (b != None))", "If a is 1, b is required.", "high"),
        ("(ignore(b))", "", ""),
    ]
    assert len(result.rejects) == 2
    assert "c" in result.rejects[0].error
    assert "offset" in result.rejects[1].error


def test_unit_document_lists_candidate_sections(units):
    text = unit_document(units["lars.lars_path"])
    assert text.startswith("X (None or ndarray of shape (n_samples, n_features)): Input data.")
    assert "\n\ny (None or ndarray of shape (n_samples,)): Input targets." in text


def test_extract_with_replay(units):
    client = ReplayClient(REPLAY)
    autoreg = extract_constraints(units["autoreg.AutoReg"], client)
    assert [c.text for c in autoreg.constraints] == [canonical(AUTOREG_BUG)]
    assert autoreg.constraints[0].confidence == "high"

    spectral = extract_constraints(units["spectral.SpectralClustering"], client)
    assert [c.text for c in spectral.constraints] == [canonical(SPECTRAL_BUG)]
    assert len(spectral.rejects) == 1
    assert "unknown_param" in spectral.rejects[0].error

    lars = extract_constraints(units["lars.lars_path"], client)
    assert [c.text for c in lars.constraints] == [canonical(LARS_BUG)]


def test_long_documents_are_split_to_fit(units):
    client = MockClient("(X = None) -> (Gram != None) | s | high", max_tokens=400)
    result = extract_constraints(units["lars.lars_path"], client, ExtractionConfig(few_shot=False))
    assert len(client.prompts) > 1
    chunks = [p.split("Documentation:\n")[1].split("\n\nAnswer with")[0] for p in client.prompts]
    assert " ".join(chunks).split() == unit_document(units["lars.lars_path"]).split()
    assert [c.text for c in result.constraints] == [canonical(LARS_BUG)]


class FailingClient(LlmClient):
    def __init__(self, answers):
        self.answers = list(answers)

    def send(self, prompt: str) -> str:
        if not self.answers:
            raise ClientError("rate limited", status=429)
        return self.answers.pop(0)


def test_client_failure_keeps_partial_result(units):
    cfg = ExtractionConfig(max_words=20, few_shot=False)
    client = FailingClient(["(X = None) -> (Gram != None) | s | high"])
    with pytest.raises(ClientError) as info:
        extract_constraints(units["lars.lars_path"], client, cfg)
    assert [c.text for c in info.value.partial.constraints] == [canonical(LARS_BUG)]
