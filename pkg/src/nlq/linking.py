"""Two-stage schema linking.

Stage 1 picks the table: a single table named in the question wins outright;
otherwise the linking classifier chooses among the catalog's tables.  Stage 2
drills down, re-scoping every column and value tag to the chosen table so
later stages only ever see that table's columns.  Tags that cannot be
re-scoped are kept on an explicit unresolved list rather than dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .classify import LinearModel, featurize
from .engine import SchemaCatalog
from .tagging import TagKind, TaggedToken


class NoTableResolved(ValueError):
    pass


@dataclass(frozen=True)
class SchemaBinding:
    table: str
    tags: tuple[TaggedToken, ...]  # sentence order, column/value tags re-scoped
    unresolved: tuple[TaggedToken, ...]
    method: str  # "tag" or "model"


def _model_table(text_tokens_joined: str, catalog: SchemaCatalog, model: LinearModel) -> str:
    candidates = [c for c in model.classes if catalog.has_table(c)]
    if not candidates:
        raise NoTableResolved("linking model shares no classes with the catalog")
    features = featurize(text_tokens_joined)
    scores: list[float] = []
    for cls in candidates:
        scores.append(model.score(features, model.classes.index(cls)))
    best = max(scores)
    if best == 0.0 and all(s == 0.0 for s in scores) and len(candidates) > 1:
        raise NoTableResolved("all candidate tables tied at zero score")
    return candidates[scores.index(best)]


def link_schema(
    tagged: list[TaggedToken],
    catalog: SchemaCatalog,
    model: LinearModel,
) -> SchemaBinding:
    """Choose a table, then resolve column/value tags against it only."""
    if not catalog.table_names:
        raise ValueError("catalog is empty")

    named = []
    for tt in tagged:
        if tt.tag.kind is TagKind.TABLE and tt.tag.table not in named:
            named.append(tt.tag.table)
    if len(named) == 1:
        table, method = named[0], "tag"
    else:
        question = " ".join(tt.text for tt in tagged)
        table, method = _model_table(question, catalog, model), "model"

    schema = catalog.table(table)
    resolved: list[TaggedToken] = []
    unresolved: list[TaggedToken] = []
    for tt in tagged:
        tag = tt.tag
        if tag.kind in (TagKind.COLUMN, TagKind.VALUE):
            kept = tuple(loc for loc in tag.locations if loc[0] == schema.name)
            if not kept:
                unresolved.append(tt)
                continue
            narrowed = replace(tag, table=schema.name, column=kept[0][1], locations=kept)
            resolved.append(replace(tt, tag=narrowed))
        else:
            resolved.append(tt)
    return SchemaBinding(
        table=schema.name,
        tags=tuple(resolved),
        unresolved=tuple(unresolved),
        method=method,
    )
