"""Brute-force reference executor for differential testing.

Everything here is written the slowest, most obvious way on purpose: rows are
materialized as dicts, every predicate is re-evaluated from first principles,
and nothing is shared with :mod:`nlq.engine` beyond the public data types and
error classes. Keep it that way; the value of the differential suite is that
the two executors can only agree by both being right.
"""

from __future__ import annotations

from .engine import (
    Cell,
    ColumnType,
    MutationOnPreviousResult,
    ResultSet,
    TableStore,
    TypeMismatch,
    UnknownColumn,
)
from .sqlast import Agg, Literal, Op, SqlQuery, StatementType


def _as_dict_rows(columns: tuple[str, ...], rows: list[tuple[Cell, ...]]) -> list[dict[str, Cell]]:
    out = []
    for row in rows:
        d: dict[str, Cell] = {}
        for name, cell in zip(columns, row):
            d[name.casefold()] = cell
        out.append(d)
    return out


def _canonical_text(value: Literal) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _holds(cell: Cell, op: Op, literal: Literal) -> bool:
    if cell is None:
        return False
    if isinstance(cell, (int, float)):
        if isinstance(literal, (int, float)):
            number = literal
        else:
            try:
                number = float(literal)
            except ValueError:
                return False
        if op is Op.EQ:
            return cell == number
        if op is Op.GT:
            return cell > number
        if op is Op.LT:
            return cell < number
        raise AssertionError(op)
    left = cell.casefold()
    right = _canonical_text(literal).casefold()
    if op is Op.EQ:
        return left == right
    if op is Op.GT:
        return left > right
    if op is Op.LT:
        return left < right
    raise AssertionError(op)


def _filter(q: SqlQuery, columns: tuple[str, ...], dict_rows: list[dict[str, Cell]]):
    known = {c.casefold() for c in columns}
    for pred in q.conjuncts:
        if pred.column.casefold() not in known:
            raise UnknownColumn(pred.column)
    kept = []
    for row in dict_rows:
        ok = True
        for pred in q.conjuncts:
            if not _holds(row[pred.column.casefold()], pred.op, pred.value):
                ok = False
                break
        if ok:
            kept.append(row)
    return kept


def _select(
    q: SqlQuery,
    columns: tuple[str, ...],
    dict_rows: list[dict[str, Cell]],
    text_columns: set[str] | None,
) -> ResultSet:
    kept = _filter(q, columns, dict_rows)
    known = {c.casefold() for c in columns}
    if q.column != "*" and q.column.casefold() not in known:
        raise UnknownColumn(q.column)

    if q.kind is StatementType.SELECT:
        if q.column == "*":
            rows = tuple(tuple(row[c.casefold()] for c in columns) for row in kept)
            return ResultSet(columns=columns, rows=rows)
        for c in columns:
            if c.casefold() == q.column.casefold():
                label = c
        return ResultSet(
            columns=(label,), rows=tuple((row[q.column.casefold()],) for row in kept)
        )

    label = f"{q.agg.value}({q.column})"
    if q.agg is Agg.COUNT:
        return ResultSet(columns=(label,), rows=((len(kept),),))
    key = q.column.casefold()
    if text_columns is not None and key in text_columns:
        raise TypeMismatch(f"{q.agg.value} over text column '{q.column}'")
    values = []
    for row in kept:
        cell = row[key]
        if cell is None:
            continue
        if isinstance(cell, str):
            raise TypeMismatch(f"{q.agg.value} over text column '{q.column}'")
        values.append(cell)
    if len(values) == 0:
        return ResultSet(columns=(label,), rows=((None,),))
    if q.agg is Agg.SUM:
        total: Cell = 0
        for v in values:
            total = total + v
        return ResultSet(columns=(label,), rows=((total,),))
    if q.agg is Agg.AVG:
        total = 0
        for v in values:
            total = total + v
        return ResultSet(columns=(label,), rows=((total / len(values),),))
    if q.agg is Agg.MAX:
        best = values[0]
        for v in values[1:]:
            if v > best:
                best = v
        return ResultSet(columns=(label,), rows=((best,),))
    best = values[0]
    for v in values[1:]:
        if v < best:
            best = v
    return ResultSet(columns=(label,), rows=((best,),))


def oracle_execute(q: SqlQuery, source: TableStore | ResultSet) -> ResultSet:
    """Same contract as :func:`nlq.engine.execute`, naive implementation."""
    if isinstance(source, ResultSet):
        if q.kind not in (StatementType.SELECT, StatementType.SELECT_AGG):
            raise MutationOnPreviousResult(f"{q.kind.value} cannot target a previous result")
        return _select(q, source.columns, _as_dict_rows(source.columns, list(source.rows)), None)

    table = source.table(q.table)
    columns = tuple(c.name for c in table.schema.columns)
    text_columns = {
        c.name.casefold() for c in table.schema.columns if c.type is ColumnType.TEXT
    }
    dict_rows = _as_dict_rows(columns, table.rows)

    if q.kind in (StatementType.SELECT, StatementType.SELECT_AGG):
        return _select(q, columns, dict_rows, text_columns)

    known = {c.casefold(): i for i, c in enumerate(columns)}
    for pred in q.conjuncts:
        if pred.column.casefold() not in known:
            raise UnknownColumn(pred.column)

    if q.kind is StatementType.INSERT:
        assert q.insert_values is not None
        new_row: list[Cell] = [None] * len(columns)
        for colname, value in q.insert_values:
            if colname.casefold() not in known:
                raise UnknownColumn(colname)
            idx = known[colname.casefold()]
            coltype = table.schema.columns[idx].type
            if coltype is ColumnType.INT:
                if isinstance(value, int) and not isinstance(value, bool):
                    new_row[idx] = value
                elif isinstance(value, float) and value == int(value):
                    new_row[idx] = int(value)
                else:
                    try:
                        new_row[idx] = int(str(value))
                    except ValueError:
                        raise TypeMismatch(f"{value!r} not an int") from None
            elif coltype is ColumnType.REAL:
                try:
                    new_row[idx] = float(value)  # type: ignore[arg-type]
                except ValueError:
                    raise TypeMismatch(f"{value!r} not a real") from None
            else:
                new_row[idx] = value if isinstance(value, str) else _canonical_text(value)
        table.append(tuple(new_row))
        return ResultSet(columns=("affected",), rows=((1,),))

    if q.kind is StatementType.DELETE:
        survivors = []
        survivor_ids = []
        removed = 0
        for row, rowid in zip(list(table.rows), list(table.rowids)):
            as_dict = {c.casefold(): cell for c, cell in zip(columns, row)}
            matched = True
            for pred in q.conjuncts:
                if not _holds(as_dict[pred.column.casefold()], pred.op, pred.value):
                    matched = False
                    break
            if matched:
                removed += 1
            else:
                survivors.append(row)
                survivor_ids.append(rowid)
        table.rows = survivors
        table.rowids = survivor_ids
        return ResultSet(columns=("affected",), rows=((removed,),))

    assert q.set_clause is not None
    colname, value = q.set_clause
    if colname.casefold() not in known:
        raise UnknownColumn(colname)
    idx = known[colname.casefold()]
    coltype = table.schema.columns[idx].type
    if coltype is ColumnType.INT:
        if isinstance(value, int) and not isinstance(value, bool):
            cell: Cell = value
        elif isinstance(value, float) and value == int(value):
            cell = int(value)
        else:
            try:
                cell = int(str(value))
            except ValueError:
                raise TypeMismatch(f"{value!r} not an int") from None
    elif coltype is ColumnType.REAL:
        try:
            cell = float(value)  # type: ignore[arg-type]
        except ValueError:
            raise TypeMismatch(f"{value!r} not a real") from None
    else:
        cell = value if isinstance(value, str) else _canonical_text(value)
    changed = 0
    for i, row in enumerate(list(table.rows)):
        as_dict = {c.casefold(): cellv for c, cellv in zip(columns, row)}
        matched = True
        for pred in q.conjuncts:
            if not _holds(as_dict[pred.column.casefold()], pred.op, pred.value):
                matched = False
                break
        if matched:
            updated = list(row)
            updated[idx] = cell
            table.rows[i] = tuple(updated)
            changed += 1
    return ResultSet(columns=("affected",), rows=((changed,),))
