import json

import pytest
from click.testing import CliRunner

from cdicheck.cli import EXIT_ERROR, EXIT_INCONSISTENT, exit_code, main, read_scan
from cdicheck.corpus import read_records, write_records
from cdicheck.models import Status, Verdict

from conftest import REPLAY, TREE


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def corpus(tmp_path, runner):
    scan_path = tmp_path / "scan.jsonl"
    corpus_path = tmp_path / "corpus.jsonl"
    assert runner.invoke(main, ["scan", str(TREE), "-o", str(scan_path)]).exit_code == 0
    result = runner.invoke(main, ["extract", str(scan_path), "-o", str(corpus_path), "--replay", str(REPLAY)])
    assert result.exit_code == 0, result.output
    return corpus_path


def test_scan(tmp_path, runner):
    out = tmp_path / "scan.jsonl"
    result = runner.invoke(main, ["scan", str(TREE), "-o", str(out)])
    assert result.exit_code == 0
    records = read_scan(out)
    assert [r.unit.owner_name for r in records] == [
        "autoreg.AutoReg",
        "lars.lars_path",
        "spectral.SpectralClustering",
    ]
    assert all(fn.supported for r in records for fn in r.functions)


def test_scan_missing_tree(tmp_path, runner):
    result = runner.invoke(main, ["scan", str(tmp_path / "nope"), "-o", str(tmp_path / "scan.jsonl")])
    assert result.exit_code == EXIT_ERROR


def test_extract_with_replay(corpus):
    records = read_records(corpus)
    assert [r.record_id for r in records] == [
        "autoreg.AutoReg#0",
        "lars.lars_path#0",
        "spectral.SpectralClustering#0",
    ]
    assert [r.owner for r in records] == [
        "autoreg.AutoReg.__init__",
        "lars.lars_path",
        "spectral.SpectralClustering.fit",
    ]


def test_extract_without_recorded_completion(tmp_path, runner):
    scan_path = tmp_path / "scan.jsonl"
    runner.invoke(main, ["scan", str(TREE), "-o", str(scan_path)])
    empty = tmp_path / "empty.jsonl"
    empty.write_text("", encoding="utf-8")
    result = runner.invoke(main, ["extract", str(scan_path), "-o", str(tmp_path / "c.jsonl"), "--replay", str(empty)])
    assert result.exit_code == EXIT_ERROR


def test_check_finds_the_golden_inconsistencies(corpus, runner):
    result = runner.invoke(main, ["check", str(corpus)])
    assert result.exit_code == EXIT_INCONSISTENT
    verdicts = json.loads(result.output)
    assert [v["status"] for v in verdicts] == ["Inconsistent"] * 3
    assert sorted(v["kind"] for v in verdicts) == ["Incompleteness", "Incorrectness", "Incorrectness"]
    assert runner.invoke(main, ["check", str(corpus)]).output == result.output


def test_check_clean_corpus_exits_zero(tmp_path, runner, corrected_records):
    path = tmp_path / "clean.jsonl"
    write_records(corrected_records, path)
    result = runner.invoke(main, ["check", str(path), "--format", "markdown"])
    assert result.exit_code == 0
    assert "No findings." in result.output


def test_check_crisp_mode(corpus, runner):
    result = runner.invoke(main, ["check", str(corpus), "--no-fuzzy"])
    statuses = sorted(v["status"] for v in json.loads(result.output))
    assert statuses == ["Inconsistent", "Inconsistent", "Unresolved"]


def test_check_malformed_corpus(tmp_path, runner):
    path = tmp_path / "bad.jsonl"
    path.write_text("{oops\n", encoding="utf-8")
    assert runner.invoke(main, ["check", str(path)]).exit_code == EXIT_ERROR


def test_check_with_config_file(tmp_path, corpus, runner):
    config = tmp_path / "config.yaml"
    config.write_text("report:\n  format: markdown\n", encoding="utf-8")
    result = runner.invoke(main, ["--config", str(config), "check", str(corpus)])
    assert result.output.startswith("# Documentation consistency report")


def test_report_and_evaluate(tmp_path, corpus, runner):
    verdicts_path = tmp_path / "verdicts.json"
    runner.invoke(main, ["check", str(corpus), "-o", str(verdicts_path)])
    assert json.loads(verdicts_path.read_text(encoding="utf-8"))

    result = runner.invoke(main, ["report", str(verdicts_path)])
    assert result.exit_code == 0
    assert "## spectral.py" in result.output

    result = runner.invoke(main, ["evaluate", str(corpus), str(verdicts_path)])
    assert result.exit_code == 0
    assert json.loads(result.output)["unresolved"] == 3


def test_mutate(tmp_path, runner, golden_records):
    source = tmp_path / "golden.jsonl"
    write_records(golden_records, source)
    out = tmp_path / "mutants.jsonl"
    result = runner.invoke(
        main, ["mutate", str(source), "-o", str(out), "--pattern", "LogicChange", "--per-record", "1"]
    )
    assert result.exit_code == 0
    mutants = read_records(out)
    assert [m.record_id for m in mutants] == ["autoreg~LogicChange~0", "spectral~LogicChange~0", "lars~LogicChange~0"]
    manifest = tmp_path / "mutants.manifest.jsonl"
    assert len(manifest.read_text(encoding="utf-8").splitlines()) == 3


def test_exit_code_ignores_unresolved():
    assert exit_code([Verdict(status=Status.UNRESOLVED)]) == 0
    assert exit_code([Verdict(status=Status.CONSISTENT), Verdict(status=Status.INCONSISTENT)]) == 1
