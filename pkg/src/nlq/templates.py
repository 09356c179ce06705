"""Field-specific query templates.

Each database field ships a pipe-delimited template file whose rows pair a
required-tag pattern with a SQL skeleton and an answer skeleton.  Matching
picks the most specific satisfiable row; building substitutes slot markers
from the tagged question, left to right in sentence order; rendering fills
the answer skeleton from the executed result.

An extension beyond the three-column scheme: value tags left unconsumed by
explicit ``$VALUE`` slots become equality conjuncts on their linked column,
so a count template with no WHERE clause still honours "... are available".
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, replace
from pathlib import Path

from .linking import SchemaBinding
from .sqlast import (
    Op,
    Predicate,
    SqlError,
    SqlQuery,
    StatementType,
    parse_sql,
)
from .tagging import TagKind, TaggedToken

log = logging.getLogger(__name__)


class TemplateParseError(ValueError):
    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


class TemplateSqlError(ValueError):
    def __init__(self, template_id: str, message: str) -> None:
        super().__init__(f"template {template_id}: {message}")
        self.template_id = template_id


class NoTemplateMatch(LookupError):
    def __init__(self, kinds_present: tuple[str, ...]) -> None:
        super().__init__(
            "no template matches; tag kinds present: "
            + (", ".join(kinds_present) if kinds_present else "(none)")
        )
        self.kinds_present = kinds_present


class UnfilledSlot(ValueError):
    def __init__(self, slot: str) -> None:
        super().__init__(f"no source tag for slot {slot}")
        self.slot = slot


class PlaceholderUnavailable(ValueError):
    pass


class Target:
    DATABASE = "DATABASE"
    PREVIOUS_RESULT = "PREVIOUS_RESULT"
    AUTO = "AUTO"
    ALL = (DATABASE, PREVIOUS_RESULT, AUTO)


@dataclass(frozen=True)
class PatternItem:
    kind: TagKind
    constraint: str | None = None  # aggregate name, operator symbol, or surface text

    def admits(self, tt: TaggedToken) -> bool:
        tag = tt.tag
        if self.kind is TagKind.VALUE:
            if tag.kind not in (TagKind.VALUE, TagKind.NUMBER):
                return False
        elif tag.kind is not self.kind:
            return False
        if self.constraint is None:
            return True
        if tag.kind is TagKind.AGG_CUE and tag.agg is not None:
            return tag.agg.name == self.constraint
        if tag.kind is TagKind.OP_CUE and tag.op is not None:
            return tag.op.symbol == self.constraint
        return tt.text == self.constraint.casefold()


@dataclass(frozen=True)
class Template:
    id: str
    statement_type: StatementType
    pattern: tuple[PatternItem, ...]
    sql_skeleton: str
    answer_skeleton: str
    target: str

    @property
    def specificity(self) -> int:
        return len(self.pattern) + sum(1 for p in self.pattern if p.constraint is not None)


@dataclass(frozen=True)
class TemplateCatalog:
    templates: tuple[Template, ...]  # specificity descending, then id ascending


_SLOT = re.compile(r"\$(TABLE|AGG|COLUMN|OP|VALUE)(\d*)")

_SLOT_SOURCES = {
    "AGG": (TagKind.AGG_CUE,),
    "COLUMN": (TagKind.COLUMN,),
    "OP": (TagKind.OP_CUE,),
    "VALUE": (TagKind.VALUE, TagKind.NUMBER),
}


def _parse_pattern(text: str, lineno: int) -> tuple[PatternItem, ...]:
    text = text.strip()
    if not text or text == "-":
        return ()
    items: list[PatternItem] = []
    for part in text.split(","):
        part = part.strip()
        m = re.fullmatch(r"([A-Z_]+)(?:\(([^)]*)\))?", part)
        if not m:
            raise TemplateParseError(lineno, f"bad pattern item {part!r}")
        kind_name, constraint = m.group(1), m.group(2)
        try:
            kind = TagKind[kind_name]
        except KeyError:
            raise TemplateParseError(lineno, f"unknown tag kind {kind_name!r}") from None
        items.append(PatternItem(kind=kind, constraint=constraint))
    return tuple(items)


def _check_slots_covered(template: Template, lineno: int) -> None:
    for m in _SLOT.finditer(template.sql_skeleton):
        base = m.group(1)
        if base == "TABLE":
            continue
        sources = _SLOT_SOURCES[base]
        if not any(item.kind in sources for item in template.pattern):
            raise TemplateParseError(
                lineno, f"slot ${base} has no supplying pattern item in template {template.id}"
            )


def _validate_skeleton(template: Template) -> None:
    def dummy(m: re.Match[str]) -> str:
        base = m.group(1)
        if base == "TABLE":
            return "t0"
        if base == "COLUMN":
            return "c0"
        if base == "AGG":
            return "COUNT"
        if base == "OP":
            return "="
        return "'v0'"

    probe = _SLOT.sub(dummy, template.sql_skeleton)
    try:
        q = parse_sql(probe)
    except SqlError as exc:
        raise TemplateSqlError(template.id, str(exc)) from exc
    if q.kind is not template.statement_type:
        raise TemplateSqlError(
            template.id,
            f"skeleton parses as {q.kind.name}, row declares {template.statement_type.name}",
        )


def load_templates(path: str | Path) -> TemplateCatalog:
    templates: list[Template] = []
    seen_ids: set[str] = set()
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f.strip() for f in line.split("|")]
        if len(fields) != 6:
            raise TemplateParseError(lineno, f"expected 6 pipe-delimited fields, got {len(fields)}")
        tid, stype_text, pattern_text, sql_skeleton, answer_skeleton, target = fields
        if not tid:
            raise TemplateParseError(lineno, "empty template id")
        if tid in seen_ids:
            raise TemplateParseError(lineno, f"duplicate template id {tid!r}")
        seen_ids.add(tid)
        try:
            stype = StatementType[stype_text]
        except KeyError:
            raise TemplateParseError(lineno, f"unknown statement type {stype_text!r}") from None
        if target not in Target.ALL:
            raise TemplateParseError(lineno, f"unknown target {target!r}")
        template = Template(
            id=tid,
            statement_type=stype,
            pattern=_parse_pattern(pattern_text, lineno),
            sql_skeleton=sql_skeleton,
            answer_skeleton=answer_skeleton,
            target=target,
        )
        _check_slots_covered(template, lineno)
        _validate_skeleton(template)
        templates.append(template)
    if not templates:
        log.warning("template file %s contains no rows", path)
    templates.sort(key=lambda t: (-t.specificity, t.id))
    return TemplateCatalog(templates=tuple(templates))


def _satisfiable(pattern: tuple[PatternItem, ...], tagged: list[TaggedToken]) -> bool:
    """Each pattern item claims a distinct tag; backtracking keeps it exact."""

    def assign(item_index: int, used: set[int]) -> bool:
        if item_index == len(pattern):
            return True
        item = pattern[item_index]
        for ti, tt in enumerate(tagged):
            if ti in used or not item.admits(tt):
                continue
            if assign(item_index + 1, used | {ti}):
                return True
        return False

    return assign(0, set())


def match_template(
    tagged: list[TaggedToken],
    stype: StatementType,
    catalog: TemplateCatalog,
) -> Template:
    for template in catalog.templates:
        if template.statement_type is not stype:
            continue
        if _satisfiable(template.pattern, tagged):
            return template
    present = tuple(sorted({tt.tag.kind.name for tt in tagged}))
    raise NoTemplateMatch(present)


def _quote(value: str) -> str:
    return "'" + value.replace("'", "''") + "'"


def _number_text(number: int | float) -> str:
    return repr(number) if isinstance(number, float) else str(number)


def build_query(
    template: Template,
    binding: SchemaBinding,
    tagged: list[TaggedToken],
) -> SqlQuery:
    """Fill skeleton slots from tags in sentence order, then attach residual
    value tags as equality conjuncts on their linked columns.

    A numbered slot like ``$VALUE2`` names the second value-compatible tag in
    sentence order (so a skeleton can use entities in a different order than
    the question states them); an unnumbered slot consumes the next
    still-unclaimed tag of its kind.
    """
    streams: dict[str, list[int]] = {
        base: [i for i, tt in enumerate(tagged) if tt.tag.kind in kinds]
        for base, kinds in _SLOT_SOURCES.items()
    }
    cursors = {base: 0 for base in _SLOT_SOURCES}
    consumed: set[int] = set()

    def take_next(base: str, slot: str) -> int:
        stream = streams[base]
        cur = cursors[base]
        while cur < len(stream) and stream[cur] in consumed:
            cur += 1
        if cur >= len(stream):
            raise UnfilledSlot(slot)
        cursors[base] = cur + 1
        index = stream[cur]
        consumed.add(index)
        return index

    def take_at(base: str, slot: str, position: int) -> int:
        stream = streams[base]
        if not 1 <= position <= len(stream):
            raise UnfilledSlot(slot)
        index = stream[position - 1]
        consumed.add(index)
        return index

    def render(m: re.Match[str]) -> str:
        base, num = m.group(1), m.group(2)
        slot = m.group(0)
        if base == "TABLE":
            return binding.table
        index = take_at(base, slot, int(num)) if num else take_next(base, slot)
        tag = tagged[index].tag
        if base == "AGG":
            assert tag.agg is not None
            text = tag.agg.name
        elif base == "COLUMN":
            assert tag.column is not None
            text = tag.column
        elif base == "OP":
            assert tag.op is not None
            text = tag.op.symbol
        elif tag.kind is TagKind.NUMBER:
            assert tag.number is not None
            text = _number_text(tag.number)
        else:
            assert tag.value is not None
            text = _quote(tag.value)
        return text

    sql_text = _SLOT.sub(render, template.sql_skeleton)
    query = parse_sql(sql_text)

    if query.kind is StatementType.INSERT:
        return query
    extra: list[Predicate] = []
    for i, tt in enumerate(tagged):
        tag = tt.tag
        if tag.kind is not TagKind.VALUE or i in consumed:
            continue
        if tag.column is None or tag.value is None:
            continue
        candidate = Predicate(column=tag.column, op=Op.EQ, value=tag.value)
        duplicate = any(
            p.column.casefold() == candidate.column.casefold()
            and p.op is Op.EQ
            and str(p.value).casefold() == candidate.value.casefold()
            for p in (*query.conjuncts, *extra)
        )
        if not duplicate:
            extra.append(candidate)
    if extra:
        query = replace(query, conjuncts=(*query.conjuncts, *extra))
    return query


_SCALAR_PLACEHOLDERS = ("(COUNT)", "(VALUE)")


def _render_cell(cell: object) -> str:
    if cell is None:
        return "NULL"
    if isinstance(cell, float):
        return repr(cell)
    return str(cell)


def render_answer(result, template: Template, binding: SchemaBinding) -> str:
    """Substitute answer-skeleton placeholders from the executed result."""
    skeleton = template.answer_skeleton
    wants_scalar = any(p in skeleton for p in _SCALAR_PLACEHOLDERS)
    if wants_scalar and not result.is_scalar:
        raise PlaceholderUnavailable(
            f"answer needs a single value but result is {len(result.rows)}x{len(result.columns)}"
        )
    if not result.rows and not wants_scalar:
        return "NO RESULTS"
    text = skeleton
    if wants_scalar:
        scalar_text = _render_cell(result.scalar)
        for p in _SCALAR_PLACEHOLDERS:
            text = text.replace(p, scalar_text)
    text = text.replace("<OBJECT>", binding.table.upper())
    if "(ROWS)" in text:
        rendered_rows = "; ".join(
            ", ".join(f"{col}={_render_cell(cell)}" for col, cell in zip(result.columns, row))
            for row in result.rows
        )
        text = text.replace("(ROWS)", rendered_rows)
    return text
