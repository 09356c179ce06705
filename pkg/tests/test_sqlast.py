import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from nlq.sqlast import (
    Agg,
    Op,
    Predicate,
    SqlQuery,
    SqlSyntaxError,
    StatementType,
    UnsupportedSql,
    logical_form_equal,
    normalize,
    parse_sql,
    serialize,
)

from generators import gen_query


ROUND_TRIP_SAMPLES = [
    "SELECT * FROM rooms",
    "SELECT price FROM rooms",
    "SELECT COUNT(id) FROM rooms WHERE status = 'available'",
    "SELECT COUNT(*) FROM rooms WHERE floor > 2 AND price < 100",
    "SELECT AVG(price) FROM rooms WHERE floor = 2",
    "SELECT MAX(price) FROM rooms",
    "SELECT MIN(nights) FROM bookings WHERE month = 'june'",
    "SELECT SUM(nights) FROM bookings",
    "INSERT INTO rooms (id, floor) VALUES (21, 2)",
    "INSERT INTO guests (name, note) VALUES ('o''brien', 'said ''hi''')",
    "DELETE FROM rooms WHERE id = 12",
    "DELETE FROM rooms",
    "UPDATE rooms SET status = 'occupied' WHERE id = 3",
    "UPDATE rooms SET price = 99.5",
    "SELECT * FROM t WHERE x = -4 AND y > -2.5 AND z < 'm'",
]


@pytest.mark.parametrize("text", ROUND_TRIP_SAMPLES)
def test_serialize_is_canonical_fixed_point(text):
    q = parse_sql(text)
    assert serialize(q) == text
    assert parse_sql(serialize(q)) == q


def test_parse_is_case_and_whitespace_insensitive():
    q = parse_sql("select  Count( id )  from Rooms  where  Status='available'")
    assert q.kind is StatementType.SELECT_AGG
    assert q.agg is Agg.COUNT
    assert q.table == "Rooms"
    assert q.conjuncts == (Predicate("Status", Op.EQ, "available"),)


def test_statement_kinds():
    assert parse_sql("SELECT * FROM t").kind is StatementType.SELECT
    assert parse_sql("SELECT a FROM t").kind is StatementType.SELECT
    assert parse_sql("SELECT COUNT(*) FROM t").kind is StatementType.SELECT_AGG
    assert parse_sql("INSERT INTO t (a) VALUES (1)").kind is StatementType.INSERT
    assert parse_sql("DELETE FROM t").kind is StatementType.DELETE
    assert parse_sql("UPDATE t SET a = 1").kind is StatementType.UPDATE


def test_numeric_literal_types():
    q = parse_sql("SELECT * FROM t WHERE a = 3 AND b = 3.5")
    assert q.conjuncts[0].value == 3 and isinstance(q.conjuncts[0].value, int)
    assert q.conjuncts[1].value == 3.5 and isinstance(q.conjuncts[1].value, float)


def test_quoted_literal_is_always_text():
    q = parse_sql("SELECT * FROM t WHERE a = '3'")
    assert q.conjuncts[0].value == "3" and isinstance(q.conjuncts[0].value, str)


UNSUPPORTED = [
    "SELECT * FROM a JOIN b ON a.x = b.x",
    "SELECT * FROM a INNER JOIN b ON a.x = b.x",
    "SELECT * FROM a LEFT JOIN b ON a.x = b.x",
    "SELECT * FROM a CROSS JOIN b",
    "SELECT x FROM t GROUP BY x",
    "SELECT COUNT(id) FROM t GROUP BY x",
    "SELECT * FROM t ORDER BY x",
    "SELECT * FROM t WHERE a = 1 ORDER BY b",
    "SELECT * FROM t WHERE a = 1 OR b = 2",
    "SELECT * FROM t WHERE a = (SELECT b FROM u)",
    "SELECT * FROM (SELECT * FROM t)",
    "SELECT x FROM t HAVING x > 1",
]


@pytest.mark.parametrize("text", UNSUPPORTED)
def test_out_of_subset_constructs_rejected(text):
    with pytest.raises(UnsupportedSql):
        parse_sql(text)


MALFORMED = [
    "",
    "SELECT",
    "SELECT * FROM",
    "SELECT * WHERE a = 1",
    "SELECT AVG(*) FROM t",
    "SELECT * FROM t WHERE",
    "SELECT * FROM t WHERE a",
    "SELECT * FROM t WHERE a = ",
    "SELECT * FROM t WHERE a >= 1",
    "INSERT INTO t VALUES (1)",
    "INSERT INTO t (a, b) VALUES (1)",
    "UPDATE t WHERE a = 1",
    "DELETE t WHERE a = 1",
    "SELECT * FROM t extra",
    "SELECT a, b FROM t",
]


@pytest.mark.parametrize("text", MALFORMED)
def test_malformed_statements_raise_syntax_error(text):
    with pytest.raises(SqlSyntaxError):
        parse_sql(text)


def test_syntax_error_carries_position():
    with pytest.raises(SqlSyntaxError) as err:
        parse_sql("SELECT * FORM t")
    assert err.value.position >= 0
    assert "expected" in str(err.value)


def test_query_invariants_enforced():
    with pytest.raises(ValueError):
        SqlQuery(kind=StatementType.SELECT, table="t", agg=Agg.COUNT, column="x")
    with pytest.raises(ValueError):
        SqlQuery(kind=StatementType.SELECT_AGG, table="t", agg=Agg.NONE, column="x")
    with pytest.raises(ValueError):
        SqlQuery(kind=StatementType.INSERT, table="t")
    with pytest.raises(ValueError):
        SqlQuery(kind=StatementType.UPDATE, table="t")
    with pytest.raises(ValueError):
        SqlQuery(kind=StatementType.SELECT, table="")


def test_normalize_folds_case_sorts_conjuncts_and_collapses_integral_floats():
    a = parse_sql("SELECT * FROM Rooms WHERE B = 2.0 AND A = 'x'")
    b = parse_sql("SELECT * FROM rooms WHERE a = 'x' AND b = 2")
    assert normalize(a) == normalize(b)
    assert logical_form_equal(a, b)


def test_normalize_is_idempotent():
    q = parse_sql("UPDATE Rooms SET Price = 10.0 WHERE Id = 3 AND Floor = 1")
    assert normalize(normalize(q)) == normalize(q)


def test_logical_form_distinguishes_different_queries():
    a = parse_sql("SELECT COUNT(id) FROM rooms")
    b = parse_sql("SELECT COUNT(*) FROM rooms")
    c = parse_sql("SELECT COUNT(id) FROM rooms WHERE floor = 2")
    assert not logical_form_equal(a, b)
    assert not logical_form_equal(a, c)


def test_normalize_does_not_fold_literal_text_case():
    a = parse_sql("SELECT * FROM t WHERE a = 'X'")
    b = parse_sql("SELECT * FROM t WHERE a = 'x'")
    assert not logical_form_equal(a, b)


@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_random_ast_round_trip(seed):
    rng = random.Random(seed)
    q = gen_query(rng)
    assert parse_sql(serialize(q)) == q


@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_normalize_stable_under_serialization(seed):
    rng = random.Random(seed)
    q = gen_query(rng)
    assert logical_form_equal(q, parse_sql(serialize(q)))
