"""Restricted-SQL AST, parser, serializer, and logical-form comparison.

The supported grammar is a single-table subset:

    SELECT <agg>(<col>) | <col> | *  FROM t  [WHERE col op lit (AND col op lit)*]
    INSERT INTO t (col, ...) VALUES (lit, ...)
    DELETE FROM t [WHERE ...]
    UPDATE t SET col = lit [WHERE ...]

with op limited to ``=``, ``>``, ``<``. Grouping, ordering, joins, OR, and
nested queries are deliberately outside the subset and raise
:class:`UnsupportedSql`; everything else malformed raises
:class:`SqlSyntaxError` with a character position.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import Enum


class StatementType(Enum):
    SELECT = "SELECT"
    SELECT_AGG = "SELECT_AGG"
    INSERT = "INSERT"
    DELETE = "DELETE"
    UPDATE = "UPDATE"


class Agg(Enum):
    NONE = "NONE"
    COUNT = "COUNT"
    MAX = "MAX"
    MIN = "MIN"
    SUM = "SUM"
    AVG = "AVG"


class Op(Enum):
    EQ = "="
    GT = ">"
    LT = "<"

    @property
    def symbol(self) -> str:
        return self.value


Literal = str | int | float


class SqlError(ValueError):
    """Base for all parse-side SQL errors."""


class SqlSyntaxError(SqlError):
    def __init__(self, position: int, expected: str):
        super().__init__(f"syntax error at position {position}: expected {expected}")
        self.position = position
        self.expected = expected


class UnsupportedSql(SqlError):
    def __init__(self, construct: str, position: int = 0):
        super().__init__(f"unsupported construct: {construct}")
        self.construct = construct
        self.position = position


@dataclass(frozen=True)
class Predicate:
    column: str
    op: Op
    value: Literal


@dataclass(frozen=True)
class SqlQuery:
    kind: StatementType
    table: str
    agg: Agg = Agg.NONE
    column: str = "*"
    conjuncts: tuple[Predicate, ...] = ()
    insert_values: tuple[tuple[str, Literal], ...] | None = None
    set_clause: tuple[str, Literal] | None = None

    def __post_init__(self) -> None:
        if not self.table:
            raise ValueError("query must name a table")
        if (self.kind is StatementType.SELECT_AGG) != (self.agg is not Agg.NONE):
            raise ValueError("SELECT_AGG iff an aggregation is set")
        if self.kind is StatementType.INSERT:
            if self.conjuncts:
                raise ValueError("INSERT takes no WHERE clause")
            if not self.insert_values:
                raise ValueError("INSERT requires values")
        elif self.insert_values is not None:
            raise ValueError("insert_values only valid for INSERT")
        if self.kind is StatementType.UPDATE:
            if self.set_clause is None:
                raise ValueError("UPDATE requires a SET clause")
        elif self.set_clause is not None:
            raise ValueError("set_clause only valid for UPDATE")


# ---------------------------------------------------------------------------
# scanner

_KEYWORDS = {
    "SELECT", "FROM", "WHERE", "AND", "INSERT", "INTO", "VALUES",
    "DELETE", "UPDATE", "SET", "COUNT", "MAX", "MIN", "SUM", "AVG",
}
# Outside-the-subset keywords that get the dedicated error class.
_UNSUPPORTED_KEYWORDS = {
    "JOIN": "JOIN", "INNER": "JOIN", "LEFT": "JOIN", "RIGHT": "JOIN",
    "FULL": "JOIN", "CROSS": "JOIN", "OUTER": "JOIN",
    "GROUP": "GROUP BY", "ORDER": "ORDER BY", "HAVING": "GROUP BY",
    "OR": "OR",
}
_AGG_NAMES = {"COUNT", "MAX", "MIN", "SUM", "AVG"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>-?\d+(?:\.\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>'(?:[^']|'')*')
  | (?P<punct>[(),*=<>])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # ident | keyword | number | string | punct | eof
    value: str
    pos: int


_UNSUPPORTED_WORD_RE = re.compile(
    r"\b(" + "|".join(_UNSUPPORTED_KEYWORDS) + r")\b", re.IGNORECASE
)
_STRING_RE = re.compile(r"'(?:[^']|'')*'")


def _find_unsupported(text: str) -> tuple[str, int] | None:
    """First out-of-subset keyword outside string literals, if any."""
    blanked = _STRING_RE.sub(lambda m: " " * len(m.group()), text)
    m = _UNSUPPORTED_WORD_RE.search(blanked)
    if m is None:
        return None
    return _UNSUPPORTED_KEYWORDS[m.group().upper()], m.start()


def _scan(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            # A character outside the subset's lexicon (e.g. the dots in
            # "a.x = b.x") often rides along with an unsupported construct;
            # classify by the construct when one is present.
            unsupported = _find_unsupported(text)
            if unsupported is not None:
                raise UnsupportedSql(*unsupported)
            raise SqlSyntaxError(pos, "a valid SQL token")
        if m.lastgroup != "ws":
            value = m.group()
            kind = m.lastgroup or "punct"
            if kind == "ident" and value.upper() in (_KEYWORDS | _UNSUPPORTED_KEYWORDS.keys()):
                kind = "keyword"
                value = value.upper()
            toks.append(_Tok(kind, value, pos))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


# ---------------------------------------------------------------------------
# parser

class _Parser:
    def __init__(self, text: str):
        self.toks = _scan(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def advance(self) -> _Tok:
        tok = self.toks[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def expect_keyword(self, word: str) -> None:
        tok = self.peek()
        if tok.kind != "keyword" or tok.value != word:
            raise SqlSyntaxError(tok.pos, word)
        self.advance()

    def expect_punct(self, ch: str) -> None:
        tok = self.peek()
        if tok.kind != "punct" or tok.value != ch:
            raise SqlSyntaxError(tok.pos, f"'{ch}'")
        self.advance()

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "keyword" and tok.value == word

    def reject_unsupported(self) -> None:
        tok = self.peek()
        if tok.kind == "keyword" and tok.value in _UNSUPPORTED_KEYWORDS:
            raise UnsupportedSql(_UNSUPPORTED_KEYWORDS[tok.value], tok.pos)

    def identifier(self, what: str) -> str:
        self.reject_unsupported()
        tok = self.peek()
        if tok.kind != "ident":
            raise SqlSyntaxError(tok.pos, what)
        self.advance()
        return tok.value

    def literal(self) -> Literal:
        tok = self.peek()
        if tok.kind == "punct" and tok.value == "(":
            nxt = self.toks[self.i + 1]
            if nxt.kind == "keyword" and nxt.value == "SELECT":
                raise UnsupportedSql("nested query", tok.pos)
        if tok.kind == "number":
            self.advance()
            return _parse_number(tok.value)
        if tok.kind == "string":
            self.advance()
            return tok.value[1:-1].replace("''", "'")
        raise SqlSyntaxError(tok.pos, "a literal")

    # -- clauses ------------------------------------------------------------

    def parse(self) -> SqlQuery:
        tok = self.peek()
        self.reject_unsupported()
        if tok.kind != "keyword":
            raise SqlSyntaxError(tok.pos, "SELECT, INSERT, DELETE, or UPDATE")
        if tok.value == "SELECT":
            query = self.select()
        elif tok.value == "INSERT":
            query = self.insert()
        elif tok.value == "DELETE":
            query = self.delete()
        elif tok.value == "UPDATE":
            query = self.update()
        else:
            raise SqlSyntaxError(tok.pos, "SELECT, INSERT, DELETE, or UPDATE")
        self.reject_unsupported()
        trailing = self.peek()
        if trailing.kind != "eof":
            raise SqlSyntaxError(trailing.pos, "end of input")
        return query

    def select(self) -> SqlQuery:
        self.expect_keyword("SELECT")
        agg = Agg.NONE
        tok = self.peek()
        if tok.kind == "keyword" and tok.value in _AGG_NAMES:
            agg = Agg[tok.value]
            self.advance()
            self.expect_punct("(")
            if agg is Agg.COUNT and self.peek().kind == "punct" and self.peek().value == "*":
                self.advance()
                column = "*"
            else:
                column = self.identifier("a column name")
            self.expect_punct(")")
        elif tok.kind == "punct" and tok.value == "*":
            self.advance()
            column = "*"
        else:
            column = self.identifier("a column name or *")
        self.expect_keyword("FROM")
        table = self.from_table()
        conjuncts = self.where()
        kind = StatementType.SELECT_AGG if agg is not Agg.NONE else StatementType.SELECT
        return SqlQuery(kind=kind, table=table, agg=agg, column=column, conjuncts=conjuncts)

    def from_table(self) -> str:
        tok = self.peek()
        if tok.kind == "punct" and tok.value == "(":
            nxt = self.toks[self.i + 1]
            if nxt.kind == "keyword" and nxt.value == "SELECT":
                raise UnsupportedSql("nested query", tok.pos)
        table = self.identifier("a table name")
        after = self.peek()
        if after.kind == "punct" and after.value == ",":
            raise UnsupportedSql("JOIN", after.pos)
        self.reject_unsupported()
        return table

    def where(self) -> tuple[Predicate, ...]:
        if not self.at_keyword("WHERE"):
            return ()
        self.advance()
        conjuncts = [self.predicate()]
        while True:
            self.reject_unsupported()
            if self.at_keyword("AND"):
                self.advance()
                conjuncts.append(self.predicate())
            else:
                break
        return tuple(conjuncts)

    def predicate(self) -> Predicate:
        column = self.identifier("a column name")
        tok = self.peek()
        if tok.kind != "punct" or tok.value not in ("=", ">", "<"):
            raise SqlSyntaxError(tok.pos, "'=', '>' or '<'")
        self.advance()
        op = {"=": Op.EQ, ">": Op.GT, "<": Op.LT}[tok.value]
        return Predicate(column=column, op=op, value=self.literal())

    def insert(self) -> SqlQuery:
        self.expect_keyword("INSERT")
        self.expect_keyword("INTO")
        table = self.identifier("a table name")
        self.expect_punct("(")
        columns = [self.identifier("a column name")]
        while self.peek().kind == "punct" and self.peek().value == ",":
            self.advance()
            columns.append(self.identifier("a column name"))
        self.expect_punct(")")
        self.expect_keyword("VALUES")
        paren = self.peek()
        self.expect_punct("(")
        values = [self.literal()]
        while self.peek().kind == "punct" and self.peek().value == ",":
            self.advance()
            values.append(self.literal())
        self.expect_punct(")")
        if len(values) != len(columns):
            raise SqlSyntaxError(paren.pos, f"{len(columns)} values to match the column list")
        return SqlQuery(
            kind=StatementType.INSERT,
            table=table,
            insert_values=tuple(zip(columns, values)),
        )

    def delete(self) -> SqlQuery:
        self.expect_keyword("DELETE")
        self.expect_keyword("FROM")
        table = self.from_table()
        return SqlQuery(kind=StatementType.DELETE, table=table, conjuncts=self.where())

    def update(self) -> SqlQuery:
        self.expect_keyword("UPDATE")
        table = self.identifier("a table name")
        self.expect_keyword("SET")
        column = self.identifier("a column name")
        self.expect_punct("=")
        value = self.literal()
        return SqlQuery(
            kind=StatementType.UPDATE,
            table=table,
            set_clause=(column, value),
            conjuncts=self.where(),
        )


def _parse_number(text: str) -> int | float:
    return float(text) if "." in text else int(text)


def parse_sql(text: str) -> SqlQuery:
    """Parse ``text`` into a :class:`SqlQuery` or raise a :class:`SqlError`."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# serializer

def _format_literal(value: Literal) -> str:
    if isinstance(value, bool):  # bool is an int subclass; never valid here
        raise ValueError("boolean literals are not part of the grammar")
    if isinstance(value, str):
        return "'" + value.replace("'", "''") + "'"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _format_where(conjuncts: tuple[Predicate, ...]) -> str:
    if not conjuncts:
        return ""
    parts = [f"{p.column} {p.op.symbol} {_format_literal(p.value)}" for p in conjuncts]
    return " WHERE " + " AND ".join(parts)


def serialize(q: SqlQuery) -> str:
    """Canonical text form: upper-case keywords, single spaces, names as stored."""
    if q.kind in (StatementType.SELECT, StatementType.SELECT_AGG):
        target = f"{q.agg.value}({q.column})" if q.agg is not Agg.NONE else q.column
        return f"SELECT {target} FROM {q.table}" + _format_where(q.conjuncts)
    if q.kind is StatementType.INSERT:
        assert q.insert_values is not None
        cols = ", ".join(c for c, _ in q.insert_values)
        vals = ", ".join(_format_literal(v) for _, v in q.insert_values)
        return f"INSERT INTO {q.table} ({cols}) VALUES ({vals})"
    if q.kind is StatementType.DELETE:
        return f"DELETE FROM {q.table}" + _format_where(q.conjuncts)
    assert q.set_clause is not None
    col, val = q.set_clause
    return (
        f"UPDATE {q.table} SET {col} = {_format_literal(val)}" + _format_where(q.conjuncts)
    )


# ---------------------------------------------------------------------------
# normal form

def _canonical_value(value: Literal) -> Literal:
    # 10.50 and 10.5 and 10.0 vs 10: integral floats collapse to int.
    if isinstance(value, float) and value.is_integer():
        return int(value)
    return value


def _conjunct_sort_key(p: Predicate) -> tuple[str, str, str, str]:
    tag = "t" if isinstance(p.value, str) else "n"
    return (p.column, p.op.symbol, tag, str(p.value))


def normalize(q: SqlQuery) -> SqlQuery:
    """Case-fold identifiers, canonicalize numerics, sort WHERE conjuncts."""
    conjuncts = tuple(
        sorted(
            (
                Predicate(p.column.casefold(), p.op, _canonical_value(p.value))
                for p in q.conjuncts
            ),
            key=_conjunct_sort_key,
        )
    )
    insert_values = None
    if q.insert_values is not None:
        insert_values = tuple(
            sorted(
                ((c.casefold(), _canonical_value(v)) for c, v in q.insert_values),
                key=lambda cv: (cv[0], "t" if isinstance(cv[1], str) else "n", str(cv[1])),
            )
        )
    set_clause = None
    if q.set_clause is not None:
        set_clause = (q.set_clause[0].casefold(), _canonical_value(q.set_clause[1]))
    return replace(
        q,
        table=q.table.casefold(),
        column=q.column.casefold(),
        conjuncts=conjuncts,
        insert_values=insert_values,
        set_clause=set_clause,
    )


def logical_form_equal(a: SqlQuery, b: SqlQuery) -> bool:
    """Structural equality of normal forms: the logical-form accuracy criterion."""
    return normalize(a) == normalize(b)
