import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latentclass.errors import DataError, SchemaError
from latentclass.responses import (
    MISSING,
    ResponseMatrix,
    drop_incomplete,
    load_responses,
    responses_to_text,
    tabulate,
)
from latentclass.schema import Indicator, SurveySchema, iesh_schema, load_schema

from conftest import make_schema
from oracles import counts


def test_iesh_schema_layout():
    schema = iesh_schema()
    assert schema.names == tuple("DEFGHIJKLMNO")
    assert schema.n_categories == (5,) * 12
    for ind in schema.indicators:
        assert ind.extreme_positive == 1
        assert ind.extreme_negative == 5
        assert ind.labels[0] == "Price increase more than current rate"
        assert ind.labels[4] == "Decline in prices"
        assert ind.negative_side() == (4, 5)


@pytest.mark.parametrize("kwargs, match", [
    (dict(name="A", n_categories=1, labels=("x",), extreme_positive=1, extreme_negative=1),
     "at least 2"),
    (dict(name="A", n_categories=3, labels=("a", "b", "c"), extreme_positive=2,
          extreme_negative=2), "must differ"),
    (dict(name="A", n_categories=3, labels=("a", "b", "c"), extreme_positive=1,
          extreme_negative=4), "out of range"),
])
def test_indicator_invariants(kwargs, match):
    with pytest.raises(SchemaError, match=match):
        Indicator(**kwargs)


def test_duplicate_indicator_names():
    ind = Indicator("A", 2, ("x", "y"), 1, 2)
    with pytest.raises(SchemaError, match="duplicate"):
        SurveySchema((ind, ind))


def test_schema_toml_roundtrip(tmp_path):
    path = tmp_path / "s.toml"
    path.write_text(
        'outcome_labels = ["yes", "no"]\n'
        '[[indicator]]\nname = "A"\n'
        '[[indicator]]\nname = "B"\nn_categories = 3\n'
        'outcome_labels = ["lo", "mid", "hi"]\nextreme_negative_outcome = 2\n'
    )
    schema = load_schema(path)
    assert schema.n_categories == (2, 3)
    assert schema.indicators[1].extreme_negative == 2
    assert SurveySchema.from_dict(schema.to_dict()) == schema


def test_load_handcrafted_three_rows():
    schema = make_schema((2, 2))
    text = "X1,X2\n1,2\n2,2\n1,1\n"
    m = load_responses(io.StringIO(text), schema)
    expected = np.array([[1, 2], [2, 2], [1, 1]])
    assert m.n == 3
    np.testing.assert_array_equal(m.codes, expected)


def test_load_matches_header_by_name_and_accepts_labels():
    schema = SurveySchema.uniform(["A", "B"], 3, labels=("low", "mid", "high"))
    text = "id\tB\tA\n7\tHigh\t1\n8\t2\t\n"
    m = load_responses(io.StringIO(text), schema, delimiter="\t")
    np.testing.assert_array_equal(m.codes, [[1, 3], [MISSING, 2]])


def test_load_errors():
    schema = make_schema((2, 2))
    with pytest.raises(DataError, match="empty dataset"):
        load_responses(io.StringIO("X1,X2\n"), schema)
    with pytest.raises(DataError, match="header missing"):
        load_responses(io.StringIO("X1,Z\n1,1\n"), schema)
    with pytest.raises(DataError, match=r"row 2, column 'X2'.*label 'maybe'"):
        load_responses(io.StringIO("X1,X2\n1,1\n1,maybe\n"), schema)
    with pytest.raises(DataError, match="outside 1..2"):
        load_responses(io.StringIO("X1,X2\n1,3\n"), schema)


def test_load_full_size_survey_file(tmp_path):
    schema = iesh_schema()
    rng = np.random.default_rng(5)
    codes = rng.integers(1, 6, size=(11793, 12))
    path = tmp_path / "survey.csv"
    path.write_text(responses_to_text(ResponseMatrix(codes, schema)))
    m = load_responses(path, schema)
    assert (m.n, m.n_indicators) == (11793, 12)


def test_codes_are_read_only():
    m = ResponseMatrix(np.ones((2, 2), dtype=int), make_schema((2, 2)))
    with pytest.raises(ValueError):
        m.codes[0, 0] = 2


def test_drop_incomplete_counts():
    schema = make_schema((3, 3))
    full = ResponseMatrix(np.ones((100, 2), dtype=int), schema)
    assert drop_incomplete(full) == full

    codes = np.ones((10, 2), dtype=int)
    codes[4, 1] = MISSING
    codes[5:, 0] = 2
    kept = drop_incomplete(ResponseMatrix(codes, schema))
    assert kept.n == 9
    np.testing.assert_array_equal(kept.codes, np.delete(codes, 4, axis=0))


def test_drop_incomplete_retains_complete_share():
    schema = make_schema((5,) * 4)
    rng = np.random.default_rng(27)
    n = 1000
    codes = rng.integers(1, 6, size=(n, 4))
    incomplete = rng.choice(n, size=52, replace=False)
    codes[incomplete, rng.integers(0, 4, size=52)] = MISSING
    kept = drop_incomplete(ResponseMatrix(codes, schema))
    assert kept.n / n == pytest.approx(0.948)


def test_drop_incomplete_all_missing():
    schema = make_schema((2,))
    with pytest.raises(DataError, match="no complete cases"):
        drop_incomplete(ResponseMatrix(np.zeros((3, 1), dtype=int), schema))


def test_tabulate_examples():
    schema = make_schema((2, 3))
    m = ResponseMatrix(np.array([[1, 2], [1, 2], [2, 2], [2, 2]]), schema)
    freq = tabulate(m)
    np.testing.assert_array_equal(freq[0], [0.5, 0.5])
    np.testing.assert_array_equal(freq[1], [0.0, 1.0, 0.0])


def test_tabulate_against_counting(rng):
    ks = (2, 4, 5)
    schema = make_schema(ks)
    codes = np.column_stack([rng.integers(1, k + 1, size=50) for k in ks])
    freq = tabulate(ResponseMatrix(codes, schema))
    for j, k in enumerate(ks):
        expected = [c / 50 for c in counts(codes[:, j].tolist(), k)]
        assert freq[j].tolist() == pytest.approx(expected, abs=1e-15)
        assert abs(freq[j].sum() - 1.0) <= 1e-12


matrices = st.lists(st.integers(2, 5), min_size=1, max_size=4).flatmap(
    lambda ks: st.tuples(
        st.just(tuple(ks)),
        st.lists(
            st.tuples(*[st.integers(0, k) for k in ks]), min_size=1, max_size=30
        ),
    )
)


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_roundtrip_and_idempotence(case):
    ks, rows = case
    schema = make_schema(ks)
    m = ResponseMatrix(np.array(rows, dtype=int).reshape(len(rows), len(ks)), schema)
    reread = load_responses(io.StringIO(responses_to_text(m)), schema)
    assert reread == m
    try:
        once = drop_incomplete(m)
    except DataError:
        return
    assert drop_incomplete(once) == once
    for vec in tabulate(once):
        assert abs(vec.sum() - 1.0) <= 1e-12
