"""Accuracy and timing evaluation over question/gold-SQL corpora.

Datasets are tab-separated scripts of sessions; each session is replayed
through a fresh dialogue context so follow-up turns exercise the
previous-result path.  A turn counts as execution-correct when the produced
result multiset equals the gold query executed against the same source the
turn actually ran on, and as logical-form-correct when generated and gold
SQL normalize to the same query.

Datasets are expected to be read-only (SELECT/SELECT_AGG golds): replaying a
mutation would change the store for the sessions after it, so a mutation gold
is scored by logical form alone rather than re-executed.
"""

from __future__ import annotations

import csv
import io
from collections.abc import Mapping
from dataclasses import dataclass
from pathlib import Path

from .dialogue import Assets, handle_turn, new_context
from .engine import Cell, ResultSet, execute
from .sqlast import SqlError, SqlQuery, StatementType, logical_form_equal, parse_sql
from .templates import Target

_READ_KINDS = (StatementType.SELECT, StatementType.SELECT_AGG)


class DatasetParseError(ValueError):
    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


class MissingFixture(KeyError):
    def __init__(self, db: str) -> None:
        super().__init__(f"no fixture loaded for database {db!r}")
        self.db = db


@dataclass(frozen=True)
class EvalExample:
    session: str
    turn: int
    question: str
    gold_sql: str
    db: str
    line: int = 0  # source line, for error reporting


@dataclass(frozen=True)
class EvalReport:
    dataset: str
    statements_executed: int
    correct_execution: int
    correct_logical_form: int
    skipped: int
    avg_latency_ms: float
    multi_turn: bool


def load_dataset(path: str | Path) -> list[EvalExample]:
    """Parse ``session<TAB>turn<TAB>db<TAB>question<TAB>gold_sql`` lines,
    group by session (first-appearance order), and order turns; turns within
    a session must be consecutive from 1."""
    raw_examples: list[EvalExample] = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 5:
            raise DatasetParseError(lineno, f"expected 5 tab-separated fields, got {len(fields)}")
        session, turn_text, db, question, gold_sql = (f.strip() for f in fields)
        if not session or not db or not question or not gold_sql:
            raise DatasetParseError(lineno, "empty field")
        try:
            turn = int(turn_text)
        except ValueError:
            raise DatasetParseError(lineno, f"turn is not an integer: {turn_text!r}") from None
        if turn < 1:
            raise DatasetParseError(lineno, f"turn must be >= 1, got {turn}")
        raw_examples.append(
            EvalExample(session=session, turn=turn, question=question, gold_sql=gold_sql, db=db, line=lineno)
        )

    by_session: dict[str, list[EvalExample]] = {}
    for ex in raw_examples:
        by_session.setdefault(ex.session, []).append(ex)
    ordered: list[EvalExample] = []
    for session, group in by_session.items():
        group.sort(key=lambda e: e.turn)
        for expected, ex in enumerate(group, 1):
            if ex.turn != expected:
                raise DatasetParseError(
                    ex.line,
                    f"session {session!r}: turns must be consecutive from 1, got {ex.turn}",
                )
        ordered.extend(group)
    return ordered


def _row_key(row: tuple[Cell, ...]) -> tuple:
    key = []
    for cell in row:
        if cell is None:
            key.append(("z", ""))
        elif isinstance(cell, (int, float)):
            key.append(("n", repr(float(cell))))
        else:
            key.append(("s", cell))
    return tuple(key)


def results_equal(a: ResultSet, b: ResultSet) -> bool:
    """Row-order-insensitive multiset equality; column names are ignored so
    e.g. COUNT(id) and COUNT(*) results compare equal."""
    return sorted(map(_row_key, a.rows)) == sorted(map(_row_key, b.rows))


def evaluate(
    examples: list[EvalExample],
    assets: Mapping[str, Assets],
    dataset: str = "dataset",
) -> EvalReport:
    for db in {ex.db for ex in examples}:
        if db not in assets:
            raise MissingFixture(db)

    statements_executed = 0
    correct_execution = 0
    correct_logical_form = 0
    skipped = 0
    latency_total = 0.0
    session_sizes: dict[str, int] = {}

    current_session: str | None = None
    ctx = None
    for ex in examples:
        session_sizes[ex.session] = session_sizes.get(ex.session, 0) + 1
        if ex.session != current_session:
            current_session = ex.session
            ctx = new_context(ex.session)
        try:
            gold = parse_sql(ex.gold_sql)
        except SqlError:
            skipped += 1
            continue

        db_assets = assets[ex.db]
        prev_rows = ctx.last_full_rows
        outcome, ctx = handle_turn(ctx, ex.question, db_assets)
        statements_executed += 1
        latency_total += outcome.elapsed_ms
        if not outcome.ok:
            continue

        assert outcome.sql is not None
        if logical_form_equal(outcome.sql, gold):
            correct_logical_form += 1
            lf_equal = True
        else:
            lf_equal = False

        if gold.kind not in _READ_KINDS:
            if lf_equal:
                correct_execution += 1
            continue
        if outcome.target == Target.PREVIOUS_RESULT:
            source = prev_rows
        else:
            source = db_assets.store
        if source is None:
            continue
        try:
            gold_result = execute(gold, source)
        except Exception:
            continue
        if outcome.result is not None and results_equal(outcome.result, gold_result):
            correct_execution += 1

    avg_latency = latency_total / statements_executed if statements_executed else 0.0
    return EvalReport(
        dataset=dataset,
        statements_executed=statements_executed,
        correct_execution=correct_execution,
        correct_logical_form=correct_logical_form,
        skipped=skipped,
        avg_latency_ms=avg_latency,
        multi_turn=any(n > 1 for n in session_sizes.values()),
    )


_CSV_FIELDS = (
    "dataset",
    "statements_executed",
    "correct_execution",
    "correct_logical_form",
    "skipped",
    "avg_latency_ms",
    "multi_turn",
)


def render_report(reports: list[EvalReport], format: str = "table") -> str:
    """Two-table text layout (accuracy, then timing) or a flat CSV."""
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(_CSV_FIELDS)
        for r in reports:
            writer.writerow(
                [
                    r.dataset,
                    r.statements_executed,
                    r.correct_execution,
                    r.correct_logical_form,
                    r.skipped,
                    repr(r.avg_latency_ms),
                    "true" if r.multi_turn else "false",
                ]
            )
        return buf.getvalue()
    if format != "table":
        raise ValueError(f"unknown report format {format!r}")
    lines = ["Dataset | Statements executed | No. of correct results"]
    for r in reports:
        lines.append(f"{r.dataset} | {r.statements_executed} | {r.correct_execution}")
    lines.append("")
    lines.append("Dataset | Average Computation time | Multi-turn")
    for r in reports:
        lines.append(f"{r.dataset} | {r.avg_latency_ms:.2f} ms | {'Yes' if r.multi_turn else 'No'}")
    return "\n".join(lines) + "\n"
