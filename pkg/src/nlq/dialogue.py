"""Per-turn pipeline orchestration and multi-turn context.

A turn flows tokenize → tag entities → classify statement type →
link schema → match template → build query → decide target → execute →
render answer.  The context retains the last SELECT's query, projected
result, and the unprojected matching rows, so follow-up questions can
filter or aggregate over any column of the previous result instead of
re-querying the database.

The database-vs-previous-result decision is a small closed rule: an
explicit template target wins; otherwise a follow-up runs over the
previous result exactly when an anaphora cue is present, a previous
result exists, and the statement only reads.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from pathlib import Path

from .classify import LinearModel, fit, load_corpus, load_model, predict
from .engine import (
    ResultSet,
    SchemaCatalog,
    TableStore,
    execute,
    load_store,
)
from .linking import link_schema
from .sqlast import Agg, SqlQuery, StatementType, serialize
from .tagging import (
    CueLexicon,
    TagKind,
    ValueIndex,
    build_value_index,
    load_cue_lexicon,
    tag_entities,
)
from .templates import (
    Target,
    Template,
    TemplateCatalog,
    build_query,
    load_templates,
    match_template,
    render_answer,
)
from .tokens import tokenize

_READ_KINDS = (StatementType.SELECT, StatementType.SELECT_AGG)

BUNDLED_DATA_DIR = Path(__file__).parent / "data"


@dataclass(frozen=True)
class DialogueContext:
    session_id: str
    last_query: SqlQuery | None = None
    last_result: ResultSet | None = None
    last_full_rows: ResultSet | None = None
    turn_count: int = 0


def new_context(session_id: str) -> DialogueContext:
    return DialogueContext(session_id=session_id)


@dataclass(frozen=True)
class TraceRecord:
    stage: str
    detail: str


@dataclass(frozen=True)
class TurnOutcome:
    question: str
    sql: SqlQuery | None
    target: str | None
    result: ResultSet | None
    answer: str | None
    elapsed_ms: float
    trace: tuple[TraceRecord, ...]
    error_stage: str | None = None
    error_message: str | None = None

    @property
    def ok(self) -> bool:
        return self.error_stage is None


@dataclass
class Assets:
    """Everything a turn needs, loaded once.  The value index is the only
    member rebuilt at runtime (after a successful mutation)."""

    name: str
    catalog: SchemaCatalog
    store: TableStore
    value_index: ValueIndex
    lexicon: CueLexicon
    stmt_model: LinearModel
    link_model: LinearModel
    templates: TemplateCatalog


def load_assets(
    db_dir: str | Path,
    *,
    name: str | None = None,
    catalog_path: str | Path | None = None,
    templates_path: str | Path | None = None,
    cues_path: str | Path | None = None,
    stmt_model_path: str | Path | None = None,
    link_model_path: str | Path | None = None,
    stmt_corpus_path: str | Path | None = None,
    link_corpus_path: str | Path | None = None,
) -> Assets:
    """Load one database fixture directory into a ready Assets bundle.

    Models are loaded from files when paths are given, otherwise fitted once
    here from their corpora; turn handling never trains.
    """
    db_dir = Path(db_dir)
    catalog, store = load_store(catalog_path or db_dir / "catalog.tsv", db_dir)
    lexicon = load_cue_lexicon(cues_path or BUNDLED_DATA_DIR / "cues.tsv")
    templates = load_templates(templates_path or db_dir / "templates.txt")
    if stmt_model_path is not None:
        stmt_model = load_model(stmt_model_path)
    else:
        stmt_model = fit(load_corpus(stmt_corpus_path or BUNDLED_DATA_DIR / "stmt_corpus.tsv"))
    for cls in stmt_model.classes:
        if cls not in StatementType.__members__:
            raise ValueError(f"statement model class {cls!r} is not a statement type")
    if link_model_path is not None:
        link_model = load_model(link_model_path)
    else:
        link_model = fit(load_corpus(link_corpus_path or db_dir / "link_corpus.tsv"))
    return Assets(
        name=name or db_dir.name,
        catalog=catalog,
        store=store,
        value_index=build_value_index(store),
        lexicon=lexicon,
        stmt_model=stmt_model,
        link_model=link_model,
        templates=templates,
    )


def bundled_assets(db_name: str) -> Assets:
    return load_assets(BUNDLED_DATA_DIR / db_name)


def decide_target(tagged: list, template: Template, ctx: DialogueContext) -> str:
    """Explicit template target wins; AUTO goes to the previous result only
    for read statements with an anaphora cue and a retained result."""
    if template.target != Target.AUTO:
        return template.target
    has_anaphora = any(tt.tag.kind is TagKind.ANAPHORA_CUE for tt in tagged)
    if (
        has_anaphora
        and ctx.last_full_rows is not None
        and template.statement_type in _READ_KINDS
    ):
        return Target.PREVIOUS_RESULT
    return Target.DATABASE


def handle_turn(
    ctx: DialogueContext, text: str, assets: Assets
) -> tuple[TurnOutcome, DialogueContext]:
    """Run the full pipeline for one question.

    Errors at any stage produce an error-shaped outcome naming the stage and
    carrying the trace of the stages that did complete; the context is
    returned unchanged in that case.
    """
    start = time.perf_counter()
    trace: list[TraceRecord] = []
    query: SqlQuery | None = None
    target: str | None = None

    def done(stage: str, detail: str) -> None:
        trace.append(TraceRecord(stage=stage, detail=detail))

    stage = "tokenize"
    try:
        tokens = tokenize(text)
        done(stage, f"{len(tokens)} token(s)")

        stage = "tag_entities"
        tagged = tag_entities(tokens, assets.catalog, assets.value_index, assets.lexicon)
        kinds = ",".join(tt.tag.kind.name for tt in tagged if tt.tag.kind is not TagKind.OTHER)
        done(stage, kinds or "no entities")

        stage = "classify_statement"
        label, score = predict(assets.stmt_model, text)
        stype = StatementType[label]
        done(stage, f"{label} (score {score:g})")

        stage = "link_schema"
        binding = link_schema(tagged, assets.catalog, assets.link_model)
        done(stage, f"{binding.table} via {binding.method}")

        stage = "match_template"
        template = match_template(list(binding.tags), stype, assets.templates)
        done(stage, template.id)

        stage = "build_query"
        query = build_query(template, binding, list(binding.tags))
        done(stage, serialize(query))

        stage = "decide_target"
        target = decide_target(list(binding.tags), template, ctx)
        detail = target
        if (
            template.target == Target.AUTO
            and target == Target.DATABASE
            and ctx.last_full_rows is None
            and any(tt.tag.kind is TagKind.ANAPHORA_CUE for tt in binding.tags)
        ):
            detail += " (warning: no previous result retained; falling back to database)"
        done(stage, detail)

        stage = "execute"
        if target == Target.PREVIOUS_RESULT:
            if ctx.last_full_rows is None:
                raise ValueError("no previous result retained for this session")
            source: TableStore | ResultSet = ctx.last_full_rows
        else:
            source = assets.store
        result = execute(query, source)
        full_rows: ResultSet | None = None
        if query.kind in _READ_KINDS:
            full_query = replace(query, kind=StatementType.SELECT, agg=Agg.NONE, column="*")
            full_rows = execute(full_query, source)
        done(stage, f"{len(result.rows)} row(s)")

        stage = "render_answer"
        answer = render_answer(result, template, binding)
        done(stage, answer)
    except Exception as exc:
        elapsed_ms = (time.perf_counter() - start) * 1000.0
        outcome = TurnOutcome(
            question=text,
            sql=query,
            target=target,
            result=None,
            answer=None,
            elapsed_ms=elapsed_ms,
            trace=tuple(trace),
            error_stage=stage,
            error_message=str(exc),
        )
        return outcome, ctx

    if query.kind not in _READ_KINDS and target == Target.DATABASE:
        assets.value_index = build_value_index(assets.store)

    elapsed_ms = (time.perf_counter() - start) * 1000.0
    outcome = TurnOutcome(
        question=text,
        sql=query,
        target=target,
        result=result,
        answer=answer,
        elapsed_ms=elapsed_ms,
        trace=tuple(trace),
    )
    if query.kind in _READ_KINDS:
        new_ctx = replace(
            ctx,
            last_query=query,
            last_result=result,
            last_full_rows=full_rows,
            turn_count=ctx.turn_count + 1,
        )
    else:
        new_ctx = replace(ctx, turn_count=ctx.turn_count + 1)
    return outcome, new_ctx
