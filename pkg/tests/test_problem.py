import io
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elegantdesign.problem import (
    SCALES,
    DesignProblem,
    ProblemFormatError,
    ProblemValidationError,
    dumps_problem,
    generate_fixture,
    load_problem,
    parse_problem,
    save_problem,
)


def _file(obj):
    return io.BytesIO(json.dumps(obj).encode("utf-8"))


def test_load_cbs_scale_counts():
    p = generate_fixture(16, 15, 39, seed=1)
    loaded = load_problem(io.BytesIO(dumps_problem(p).encode()))
    assert (loaded.n_attributes, loaded.n_methods, len(loaded.uses)) == (16, 15, 39)
    assert loaded == p


def test_minimal_problem():
    p = load_problem(_file({"name": "min", "attributes": ["a"], "methods": ["m"], "uses": [["m", "a"]]}))
    assert p.attributes == ("a",) and p.methods == ("m",) and p.uses == (("m", "a"),)


def test_unknown_attribute_is_named():
    with pytest.raises(ProblemValidationError, match="ghost") as err:
        load_problem(_file({"name": "x", "attributes": ["a"], "methods": ["m"], "uses": [["m", "ghost"]]}))
    assert err.value.offender == "ghost"


@pytest.mark.parametrize(
    "obj, fragment",
    [
        ({"name": "x", "attributes": ["a", "a"], "methods": ["m"], "uses": [["m", "a"]]}, "duplicate identifier 'a'"),
        ({"name": "x", "attributes": ["a"], "methods": ["a"], "uses": [["a", "a"]]}, "duplicate identifier 'a'"),
        ({"name": "x", "attributes": ["a"], "methods": ["m"], "uses": [["m", "a"], ["m", "a"]]}, "duplicate use"),
        ({"name": "x", "attributes": ["a"], "methods": ["m"], "uses": [["z", "a"]]}, "unknown method 'z'"),
        ({"name": "x", "attributes": [], "methods": ["m"], "uses": []}, "no attributes"),
        ({"name": "x", "attributes": ["a"], "methods": ["m"], "uses": []}, "no uses"),
    ],
)
def test_invariant_violations(obj, fragment):
    with pytest.raises(ProblemValidationError, match=fragment):
        load_problem(_file(obj))


def test_syntax_error_reports_position():
    with pytest.raises(ProblemFormatError) as err:
        parse_problem(b'{"name": "x",\n  "attributes": [1,,]}')
    assert err.value.lineno == 2
    assert err.value.colno > 0
    assert "line 2" in str(err.value)


def test_shape_errors():
    with pytest.raises(ProblemFormatError, match="missing"):
        parse_problem(b'{"name": "x"}')
    with pytest.raises(ProblemFormatError, match="pair"):
        parse_problem(b'{"name": "x", "attributes": ["a"], "methods": ["m"], "uses": [["m"]]}')


def test_file_order_preserved():
    p = load_problem(_file({"name": "o", "attributes": ["z", "b"], "methods": ["y", "c"], "uses": [["c", "z"]]}))
    assert p.attributes == ("z", "b")
    assert p.elements == ("z", "b", "y", "c")
    assert p.use_index == ((3, 0),)


@pytest.mark.parametrize("scale", sorted(SCALES))
def test_fixture_scales(scale):
    n_a, n_m, n_u = SCALES[scale]
    p = generate_fixture(n_a, n_m, n_u, seed=1)
    assert (p.n_attributes, p.n_methods, len(p.uses)) == (n_a, n_m, n_u)
    assert len(set(p.uses)) == n_u


def test_fixture_complete_bipartite():
    for seed in (7, 8):
        p = generate_fixture(2, 2, 4, seed=seed)
        assert set(p.uses) == {(m, a) for m in p.methods for a in p.attributes}


def test_fixture_too_many_uses():
    with pytest.raises(ValueError):
        generate_fixture(2, 2, 5, seed=1)


@settings(max_examples=60, deadline=None)
@given(
    n_a=st.integers(1, 8),
    n_m=st.integers(1, 8),
    frac=st.floats(0.01, 1.0),
    seed=st.integers(0, 2**32),
)
def test_fixture_pure_and_valid(n_a, n_m, frac, seed):
    n_u = max(1, int(frac * n_a * n_m))
    p1 = generate_fixture(n_a, n_m, n_u, seed)
    p2 = generate_fixture(n_a, n_m, n_u, seed)
    assert p1 == p2
    text = dumps_problem(p1)
    assert parse_problem(text.encode()) == p1
    # canonical files round-trip byte for byte
    buf = io.BytesIO()
    save_problem(parse_problem(text.encode()), buf)
    assert buf.getvalue() == text.encode("utf-8")


def test_save_to_path(tmp_path):
    p = DesignProblem("ü-name", ("a",), ("m",), (("m", "a"),))
    save_problem(p, tmp_path / "p.json")
    assert load_problem(tmp_path / "p.json") == p
