"""Schema catalog, CSV-backed in-memory tables, and the query executor.

Execution is a single linear row scan per statement: filter by the conjuncts,
then project, aggregate, or mutate. There are no indexes and no persistence
of mutations; a loaded store lives for the process.

Comparison semantics (applied per cell, identically for table and
previous-result sources):

* a null cell never satisfies any predicate;
* numeric cells compare numerically, coercing a numeric-looking text literal;
* text cells compare case-insensitively for ``=`` and lexicographically on
  the case-folded strings for ``>`` / ``<``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .sqlast import Agg, Literal, Op, Predicate, SqlQuery, StatementType

Cell = str | int | float | None


class ColumnType(Enum):
    TEXT = "text"
    INT = "int"
    REAL = "real"


class CatalogParseError(ValueError):
    pass


class CsvHeaderMismatch(ValueError):
    def __init__(self, table: str, detail: str):
        super().__init__(f"CSV header for table '{table}' does not match catalog: {detail}")
        self.table = table


class CellTypeError(ValueError):
    def __init__(self, table: str, row: int, column: str, detail: str):
        super().__init__(f"bad cell in {table} row {row} column {column}: {detail}")
        self.table = table
        self.row = row
        self.column = column


class UnknownTable(KeyError):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name


class UnknownColumn(KeyError):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name


class MutationOnPreviousResult(ValueError):
    pass


class TypeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class ColumnDef:
    name: str
    type: ColumnType


@dataclass(frozen=True)
class TableSchema:
    name: str
    columns: tuple[ColumnDef, ...]

    def column_index(self, name: str) -> int:
        folded = name.casefold()
        for i, col in enumerate(self.columns):
            if col.name.casefold() == folded:
                return i
        raise UnknownColumn(name)


@dataclass(frozen=True)
class SchemaCatalog:
    tables: tuple[TableSchema, ...]

    def table(self, name: str) -> TableSchema:
        folded = name.casefold()
        for t in self.tables:
            if t.name.casefold() == folded:
                return t
        raise UnknownTable(name)

    def has_table(self, name: str) -> bool:
        folded = name.casefold()
        return any(t.name.casefold() == folded for t in self.tables)

    @property
    def table_names(self) -> tuple[str, ...]:
        return tuple(t.name for t in self.tables)


@dataclass
class Table:
    schema: TableSchema
    rows: list[tuple[Cell, ...]] = field(default_factory=list)
    rowids: list[int] = field(default_factory=list)
    next_rowid: int = 0

    def append(self, row: tuple[Cell, ...]) -> None:
        self.rows.append(row)
        self.rowids.append(self.next_rowid)
        self.next_rowid += 1


@dataclass
class TableStore:
    tables: dict[str, Table] = field(default_factory=dict)

    def table(self, name: str) -> Table:
        folded = name.casefold()
        for key, t in self.tables.items():
            if key.casefold() == folded:
                return t
        raise UnknownTable(name)


@dataclass(frozen=True)
class ResultSet:
    columns: tuple[str, ...]
    rows: tuple[tuple[Cell, ...], ...]

    def __post_init__(self) -> None:
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError("row arity does not match columns")

    @property
    def is_scalar(self) -> bool:
        return len(self.columns) == 1 and len(self.rows) == 1

    @property
    def scalar(self) -> Cell:
        if not self.is_scalar:
            raise ValueError("result is not 1x1")
        return self.rows[0][0]

    def column_index(self, name: str) -> int:
        folded = name.casefold()
        for i, col in enumerate(self.columns):
            if col.casefold() == folded:
                return i
        raise UnknownColumn(name)


# ---------------------------------------------------------------------------
# loading

def load_catalog(catalog_file: str | Path) -> SchemaCatalog:
    """Parse a ``table<TAB>col:type,...`` catalog file."""
    tables: list[TableSchema] = []
    seen: set[str] = set()
    text = Path(catalog_file).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise CatalogParseError(f"line {lineno}: expected 'table<TAB>columns'")
        name, colspec = parts[0].strip(), parts[1].strip()
        if not name or name.casefold() in seen:
            raise CatalogParseError(f"line {lineno}: missing or duplicate table name")
        seen.add(name.casefold())
        columns: list[ColumnDef] = []
        colnames: set[str] = set()
        for chunk in colspec.split(","):
            if ":" not in chunk:
                raise CatalogParseError(f"line {lineno}: expected 'name:type', got '{chunk}'")
            colname, typename = (s.strip() for s in chunk.split(":", 1))
            try:
                coltype = ColumnType(typename)
            except ValueError:
                raise CatalogParseError(
                    f"line {lineno}: unknown type '{typename}' for column '{colname}'"
                ) from None
            if not colname or colname.casefold() in colnames:
                raise CatalogParseError(f"line {lineno}: missing or duplicate column name")
            colnames.add(colname.casefold())
            columns.append(ColumnDef(colname, coltype))
        tables.append(TableSchema(name, tuple(columns)))
    if not tables:
        raise CatalogParseError("catalog file declares no tables")
    return SchemaCatalog(tuple(tables))


def coerce_cell(text: str, coltype: ColumnType) -> Cell:
    """Coerce raw CSV text to the column type; empty text is null."""
    if text == "":
        return None
    if coltype is ColumnType.INT:
        return int(text)
    if coltype is ColumnType.REAL:
        return float(text)
    return text


def load_store(catalog_file: str | Path, data_dir: str | Path) -> tuple[SchemaCatalog, TableStore]:
    """Load the catalog plus one ``<table>.csv`` per declared table."""
    catalog = load_catalog(catalog_file)
    store = TableStore()
    for schema in catalog.tables:
        path = Path(data_dir) / f"{schema.name}.csv"
        table = Table(schema=schema)
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise CsvHeaderMismatch(schema.name, "file is empty") from None
            expected = [c.name for c in schema.columns]
            if header != expected:
                raise CsvHeaderMismatch(schema.name, f"got {header}, expected {expected}")
            for rowno, record in enumerate(reader, start=1):
                if len(record) != len(expected):
                    raise CellTypeError(schema.name, rowno, "", "wrong number of fields")
                cells: list[Cell] = []
                for col, text in zip(schema.columns, record):
                    try:
                        cells.append(coerce_cell(text, col.type))
                    except ValueError:
                        raise CellTypeError(
                            schema.name, rowno, col.name, f"'{text}' is not {col.type.value}"
                        ) from None
                table.append(tuple(cells))
        store.tables[schema.name] = table
    return catalog, store


# ---------------------------------------------------------------------------
# predicate evaluation

def _literal_as_text(value: Literal) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _literal_as_number(value: Literal) -> float | int | None:
    if isinstance(value, (int, float)):
        return value
    try:
        return float(value)
    except ValueError:
        return None


def cell_matches(cell: Cell, op: Op, value: Literal) -> bool:
    """One cell against one predicate; null never matches."""
    if cell is None:
        return False
    if isinstance(cell, (int, float)):
        number = _literal_as_number(value)
        if number is None:
            return False
        if op is Op.EQ:
            return cell == number
        if op is Op.GT:
            return cell > number
        return cell < number
    text = cell.casefold()
    other = _literal_as_text(value).casefold()
    if op is Op.EQ:
        return text == other
    if op is Op.GT:
        return text > other
    return text < other


def _row_matches(
    row: tuple[Cell, ...], conjuncts: tuple[Predicate, ...], index_of: dict[str, int]
) -> bool:
    for pred in conjuncts:
        try:
            idx = index_of[pred.column.casefold()]
        except KeyError:
            raise UnknownColumn(pred.column) from None
        if not cell_matches(row[idx], pred.op, pred.value):
            return False
    return True


# ---------------------------------------------------------------------------
# execution

def _aggregate(
    agg: Agg, column: str, kept: list[tuple[Cell, ...]], col_idx: int | None, numeric_ok: bool
) -> ResultSet:
    label = f"{agg.value}({column})"
    if agg is Agg.COUNT:
        return ResultSet(columns=(label,), rows=((len(kept),),))
    assert col_idx is not None
    if not numeric_ok:
        raise TypeMismatch(f"{agg.value} needs a numeric column, got text column '{column}'")
    cells = [row[col_idx] for row in kept if row[col_idx] is not None]
    for c in cells:
        if isinstance(c, str):
            raise TypeMismatch(f"{agg.value} over text value '{c}' in column '{column}'")
    if not cells:
        return ResultSet(columns=(label,), rows=((None,),))
    if agg is Agg.SUM:
        value: Cell = sum(cells)
    elif agg is Agg.AVG:
        value = sum(cells) / len(cells)
    elif agg is Agg.MAX:
        value = max(cells)
    else:
        value = min(cells)
    return ResultSet(columns=(label,), rows=((value,),))


def _execute_on_rows(
    q: SqlQuery,
    columns: tuple[str, ...],
    rows: list[tuple[Cell, ...]],
    numeric_by_decl: dict[str, bool] | None,
) -> ResultSet:
    """SELECT/SELECT_AGG over an arbitrary row block (table or previous result)."""
    index_of = {c.casefold(): i for i, c in enumerate(columns)}
    # Validate referenced columns up front so empty tables still error loudly.
    for pred in q.conjuncts:
        if pred.column.casefold() not in index_of:
            raise UnknownColumn(pred.column)
    col_idx: int | None = None
    if q.column != "*":
        if q.column.casefold() not in index_of:
            raise UnknownColumn(q.column)
        col_idx = index_of[q.column.casefold()]
    kept = [row for row in rows if _row_matches(row, q.conjuncts, index_of)]
    if q.kind is StatementType.SELECT_AGG:
        if q.agg is Agg.COUNT:
            return _aggregate(q.agg, q.column, kept, col_idx, True)
        assert col_idx is not None
        if numeric_by_decl is not None:
            numeric_ok = numeric_by_decl[q.column.casefold()]
        else:
            numeric_ok = not any(isinstance(row[col_idx], str) for row in kept)
        return _aggregate(q.agg, q.column, kept, col_idx, numeric_ok)
    if q.column == "*":
        return ResultSet(columns=columns, rows=tuple(kept))
    return ResultSet(columns=(columns[col_idx],), rows=tuple((row[col_idx],) for row in kept))


def _coerce_literal(value: Literal, col: ColumnDef, table: str) -> Cell:
    """Coerce a statement literal to a column type for INSERT/UPDATE."""
    if col.type is ColumnType.INT:
        if isinstance(value, bool):
            raise TypeMismatch(f"cannot store boolean in {table}.{col.name}")
        if isinstance(value, int):
            return value
        if isinstance(value, float):
            if value.is_integer():
                return int(value)
            raise TypeMismatch(f"cannot store {value!r} in int column {table}.{col.name}")
        try:
            return int(value)
        except ValueError:
            raise TypeMismatch(
                f"cannot store {value!r} in int column {table}.{col.name}"
            ) from None
    if col.type is ColumnType.REAL:
        if isinstance(value, (int, float)):
            return float(value)
        try:
            return float(value)
        except ValueError:
            raise TypeMismatch(
                f"cannot store {value!r} in real column {table}.{col.name}"
            ) from None
    return value if isinstance(value, str) else _literal_as_text(value)


def _affected(n: int) -> ResultSet:
    return ResultSet(columns=("affected",), rows=((n,),))


def execute(q: SqlQuery, source: TableStore | ResultSet) -> ResultSet:
    """Run one restricted-SQL statement against a store or a previous result."""
    if isinstance(source, ResultSet):
        if q.kind not in (StatementType.SELECT, StatementType.SELECT_AGG):
            raise MutationOnPreviousResult(f"{q.kind.value} cannot target a previous result")
        return _execute_on_rows(q, source.columns, list(source.rows), None)

    table = source.table(q.table)
    schema = table.schema
    columns = tuple(c.name for c in schema.columns)
    numeric_by_decl = {
        c.name.casefold(): c.type in (ColumnType.INT, ColumnType.REAL)
        for c in schema.columns
    }
    if q.kind in (StatementType.SELECT, StatementType.SELECT_AGG):
        return _execute_on_rows(q, columns, table.rows, numeric_by_decl)

    index_of = {c.casefold(): i for i, c in enumerate(columns)}
    for pred in q.conjuncts:
        if pred.column.casefold() not in index_of:
            raise UnknownColumn(pred.column)

    if q.kind is StatementType.INSERT:
        assert q.insert_values is not None
        cells: list[Cell] = [None] * len(columns)
        for colname, value in q.insert_values:
            idx = schema.column_index(colname)
            cells[idx] = _coerce_literal(value, schema.columns[idx], schema.name)
        table.append(tuple(cells))
        return _affected(1)

    if q.kind is StatementType.DELETE:
        keep_rows: list[tuple[Cell, ...]] = []
        keep_ids: list[int] = []
        removed = 0
        for row, rowid in zip(table.rows, table.rowids):
            if _row_matches(row, q.conjuncts, index_of):
                removed += 1
            else:
                keep_rows.append(row)
                keep_ids.append(rowid)
        table.rows = keep_rows
        table.rowids = keep_ids
        return _affected(removed)

    assert q.set_clause is not None
    colname, value = q.set_clause
    idx = schema.column_index(colname)
    new_cell = _coerce_literal(value, schema.columns[idx], schema.name)
    changed = 0
    for i, row in enumerate(table.rows):
        if _row_matches(row, q.conjuncts, index_of):
            mutable = list(row)
            mutable[idx] = new_cell
            table.rows[i] = tuple(mutable)
            changed += 1
    return _affected(changed)
