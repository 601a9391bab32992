import pytest

from cdicheck.docstrings import extract_docstrings, filter_candidates, parse_param_sections
from cdicheck.models import DocStyle, DocUnit, OwnerKind, Section

from conftest import TREE

NUMPY_DOC = """Summary line.

    Parameters
    ----------
    x, y : int, default=0
        Coordinates.
        Second line of the description.
    mode : {'a', 'b'}
        Mode. Only used when x is positive.

    Attributes
    ----------
    mode : str
        Duplicate entry.

    Returns
    -------
    out : float
        Result.
    """

GOOGLE_DOC = """Summary line.

    Args:
        path (str): Where to write.
        overwrite (bool, default False): Replace an existing
            file at path.
        **kwargs: Extra options.

    Returns:
        The number of bytes written.
    """


def test_numpy_sections():
    style, params = parse_param_sections(NUMPY_DOC)
    assert style == DocStyle.NUMPY
    assert [p.name for p in params] == ["x", "y", "mode", "out"]
    x = params[0]
    assert x.type_text == "int, default=0"
    assert x.default_text == "0"
    assert x.description == "Coordinates. Second line of the description."
    assert params[2].section == Section.PARAMETERS
    assert params[2].description == "Mode. Only used when x is positive."
    assert params[3].section == Section.RETURNS


def test_google_sections():
    style, params = parse_param_sections(GOOGLE_DOC)
    assert style == DocStyle.GOOGLE
    assert [p.name for p in params] == ["path", "overwrite", "kwargs"]
    assert params[0].type_text == "str"
    assert params[1].default_text == "False"
    assert params[1].description == "Replace an existing file at path."
    assert all(p.section == Section.ARGS for p in params)


@pytest.mark.parametrize("docstring", ["", "Just a sentence.", "Notes\n-----\nNothing here."])
def test_unknown_style(docstring):
    style, params = parse_param_sections(docstring)
    assert params == []
    assert style in (DocStyle.UNKNOWN, DocStyle.NUMPY)


def test_extract_docstrings_from_tree():
    units = extract_docstrings(TREE)
    assert [(u.owner_kind, u.owner_name) for u in units] == [
        (OwnerKind.CLASS, "autoreg.AutoReg"),
        (OwnerKind.FUNCTION, "lars.lars_path"),
        (OwnerKind.CLASS, "spectral.SpectralClustering"),
    ]
    autoreg = units[0]
    assert autoreg.file_path == "autoreg.py"
    assert autoreg.style == DocStyle.NUMPY
    assert [f.name for f in autoreg.functions] == ["__init__"]
    assert autoreg.functions[0].source.startswith("def __init__(")
    assert autoreg.param_types()["seasonal"] == "bool"


def test_extract_single_file(tmp_path):
    path = tmp_path / "mod.py"
    path.write_text(
        "class A:\n"
        "    def run(self, a, b):\n"
        '        """Run.\n\n'
        "        Args:\n"
        "            a (int): Used with b.\n"
        "            b (int): Other.\n"
        '        """\n'
        "        return a\n"
    )
    (tmp_path / "broken.py").write_text("def f(:\n")
    units = extract_docstrings(path)
    assert len(units) == 1
    assert units[0].owner_kind == OwnerKind.METHOD
    assert units[0].owner_name == "mod.A.run"
    assert [u.owner_name for u in extract_docstrings(tmp_path)] == ["mod.A.run"]


def test_missing_tree():
    with pytest.raises(OSError):
        extract_docstrings("/nonexistent/tree")


def test_filter_candidates():
    units = {u.owner_name: u for u in extract_docstrings(TREE)}
    pairs = {(p.param_a, p.param_b): p.evidence for p in filter_candidates(units["autoreg.AutoReg"])}
    assert ("deterministic", "trend") in pairs
    assert ("deterministic", "seasonal") in pairs
    assert pairs[("period", "seasonal")] == "Only used if seasonal is True."
    assert ("trend", "seasonal") not in pairs

    spectral = {(p.param_a, p.param_b) for p in filter_candidates(units["spectral.SpectralClustering"])}
    assert ("gamma", "affinity") in spectral


def test_filter_candidates_matches_whole_words_only():
    _, params = parse_param_sections(
        """Parameters
        ----------
        n : int
            Uses n_jobs workers.
        n_jobs : int
            Parallelism.
        """
    )
    unit = DocUnit(
        owner_kind=OwnerKind.FUNCTION,
        owner_name="f",
        style=DocStyle.NUMPY,
        params=params,
        file_path="f.py",
        line_range=(1, 2),
    )
    assert [(p.param_a, p.param_b) for p in filter_candidates(unit)] == [("n", "n_jobs")]
