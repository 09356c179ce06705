"""Schema-grounded entity tagging.

Every token span gets exactly one tag, assigned by fixed precedence:

1. cue phrases from the lexicon (aggregations, comparison words, anaphora),
   longest phrase first;
2. exact table or column names from the catalog;
3. exact cell values from the value index (multi-word values supported);
4. fuzzy single-token match against names and values at normalized
   Levenshtein similarity >= 0.8, ties to the lexicographically smallest
   candidate;
5. numeric literals;
6. OTHER.

The tag inventory is deliberately grounded in the connected schema rather
than generic NER classes: tags that nothing downstream consumes are noise in
a single-scope database.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .engine import SchemaCatalog, TableStore, ColumnType
from .fuzzy import SIMILARITY_THRESHOLD, similarity
from .sqlast import Agg, Op
from .tokens import Token, tokenize


class TagKind(Enum):
    TABLE = "TABLE"
    COLUMN = "COLUMN"
    VALUE = "VALUE"
    NUMBER = "NUMBER"
    AGG_CUE = "AGG_CUE"
    OP_CUE = "OP_CUE"
    ANAPHORA_CUE = "ANAPHORA_CUE"
    OTHER = "OTHER"


@dataclass(frozen=True)
class EntityTag:
    """Tag kind plus whichever linkage payload the kind calls for."""

    kind: TagKind
    table: str | None = None
    column: str | None = None
    value: str | None = None
    number: int | float | None = None
    agg: Agg | None = None
    op: Op | None = None
    # All (table, column) locations holding this value; first is the default.
    locations: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class TaggedToken:
    """A tagged span: one or more consecutive tokens sharing one tag."""

    tokens: tuple[Token, ...]
    tag: EntityTag
    confidence: float

    @property
    def text(self) -> str:
        return " ".join(t.lower for t in self.tokens)

    @property
    def start(self) -> int:
        return self.tokens[0].index


class LexiconParseError(ValueError):
    pass


_CUE_KINDS = {TagKind.AGG_CUE, TagKind.OP_CUE, TagKind.ANAPHORA_CUE}
_OP_SYMBOLS = {"=": Op.EQ, ">": Op.GT, "<": Op.LT}


@dataclass(frozen=True)
class CueLexicon:
    """Cue phrases mapped to their tag; phrases stored pre-tokenized."""

    entries: tuple[tuple[tuple[str, ...], EntityTag], ...]

    @property
    def max_len(self) -> int:
        return max((len(p) for p, _ in self.entries), default=0)

    def lookup(self, phrase: tuple[str, ...]) -> EntityTag | None:
        for p, tag in self.entries:
            if p == phrase:
                return tag
        return None


def load_cue_lexicon(path: str | Path) -> CueLexicon:
    """Parse ``phrase<TAB>TAGKIND<TAB>payload`` lines; '#' starts a comment."""
    entries: list[tuple[tuple[str, ...], EntityTag]] = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            raise LexiconParseError(f"line {lineno}: expected phrase<TAB>TAGKIND<TAB>payload")
        phrase_text = parts[0].strip()
        kind_text = parts[1].strip()
        payload = parts[2].strip() if len(parts) > 2 else ""
        try:
            kind = TagKind(kind_text)
        except ValueError:
            raise LexiconParseError(f"line {lineno}: unknown tag kind '{kind_text}'") from None
        if kind not in _CUE_KINDS:
            raise LexiconParseError(f"line {lineno}: '{kind_text}' is not a cue kind")
        phrase = tuple(t.lower for t in tokenize(phrase_text))
        if not phrase:
            raise LexiconParseError(f"line {lineno}: empty phrase")
        if kind is TagKind.AGG_CUE:
            try:
                tag = EntityTag(kind=kind, agg=Agg[payload.upper()])
            except KeyError:
                raise LexiconParseError(
                    f"line {lineno}: unknown aggregation '{payload}'"
                ) from None
        elif kind is TagKind.OP_CUE:
            if payload not in _OP_SYMBOLS:
                raise LexiconParseError(f"line {lineno}: unknown operator '{payload}'")
            tag = EntityTag(kind=kind, op=_OP_SYMBOLS[payload])
        else:
            tag = EntityTag(kind=kind)
        entries.append((phrase, tag))
    # Longest phrase first so spans are greedy; stable beyond that.
    entries.sort(key=lambda e: -len(e[0]))
    return CueLexicon(entries=tuple(entries))


@dataclass(frozen=True)
class ValueIndex:
    """Case-folded distinct text cell values mapped to their (table, column) homes."""

    entries: dict[str, tuple[tuple[str, str], ...]]
    phrases: dict[tuple[str, ...], str]  # tokenized value -> entry key

    @property
    def max_len(self) -> int:
        return max((len(p) for p in self.phrases), default=0)


def build_value_index(store: TableStore) -> ValueIndex:
    """Index every distinct text cell value; rebuild after any data mutation."""
    collected: dict[str, set[tuple[str, str]]] = {}
    for table_name in sorted(store.tables):
        table = store.tables[table_name]
        for idx, col in enumerate(table.schema.columns):
            if col.type is not ColumnType.TEXT:
                continue
            for row in table.rows:
                cell = row[idx]
                if cell is None:
                    continue
                key = str(cell).casefold()
                collected.setdefault(key, set()).add((table.schema.name, col.name))
    entries: dict[str, tuple[tuple[str, str], ...]] = {}
    phrases: dict[tuple[str, ...], str] = {}
    for key in sorted(collected):
        entries[key] = tuple(sorted(collected[key]))
        phrase = tuple(t.lower for t in tokenize(key))
        if phrase:
            phrases[phrase] = key
    return ValueIndex(entries=entries, phrases=phrases)


_NUMBER_RE = re.compile(r"-?\d+(\.\d+)?$")


def _parse_number(text: str) -> int | float | None:
    if not _NUMBER_RE.match(text):
        return None
    return float(text) if "." in text else int(text)


def _column_locations(lower: str, catalog: SchemaCatalog) -> tuple[tuple[str, str], ...]:
    return tuple(
        (table.name, col.name)
        for table in catalog.tables
        for col in table.columns
        if col.name.casefold() == lower
    )


def _column_tag(locations: tuple[tuple[str, str], ...]) -> EntityTag:
    return EntityTag(
        kind=TagKind.COLUMN,
        table=locations[0][0],
        column=locations[0][1],
        locations=locations,
    )


def _exact_name_tag(lower: str, catalog: SchemaCatalog) -> EntityTag | None:
    for table in catalog.tables:
        if table.name.casefold() == lower:
            return EntityTag(kind=TagKind.TABLE, table=table.name)
    locations = _column_locations(lower, catalog)
    if locations:
        return _column_tag(locations)
    return None


def _value_tag(key: str, index: ValueIndex) -> EntityTag:
    locations = index.entries[key]
    return EntityTag(
        kind=TagKind.VALUE,
        table=locations[0][0],
        column=locations[0][1],
        value=key,
        locations=locations,
    )


def _fuzzy_tag(
    lower: str, catalog: SchemaCatalog, index: ValueIndex
) -> tuple[EntityTag, float] | None:
    # Candidate pool: (folded name, priority rank, ready-made tag); rank breaks
    # exact name collisions between kinds the same way rule 2 does.
    candidates: list[tuple[str, int, EntityTag]] = []
    column_names: dict[str, tuple[tuple[str, str], ...]] = {}
    for table in catalog.tables:
        candidates.append(
            (table.name.casefold(), 0, EntityTag(kind=TagKind.TABLE, table=table.name))
        )
        for col in table.columns:
            folded = col.name.casefold()
            if folded not in column_names:
                column_names[folded] = _column_locations(folded, catalog)
    for folded, locations in column_names.items():
        candidates.append((folded, 1, _column_tag(locations)))
    for phrase, key in index.phrases.items():
        if len(phrase) == 1:
            candidates.append((key, 2, _value_tag(key, index)))

    best: tuple[float, str, int, EntityTag] | None = None
    for name, rank, tag in candidates:
        score = similarity(lower, name)
        if score < SIMILARITY_THRESHOLD:
            continue
        if best is None or (-score, name, rank) < (-best[0], best[1], best[2]):
            best = (score, name, rank, tag)
    if best is None:
        return None
    return best[3], best[0]


def tag_entities(
    tokens: list[Token],
    catalog: SchemaCatalog,
    index: ValueIndex,
    lexicon: CueLexicon,
) -> list[TaggedToken]:
    """Assign one tag per token span; deterministic for identical inputs."""
    out: list[TaggedToken] = []
    pos = 0
    n = len(tokens)
    while pos < n:
        # 1. cue phrases, longest first
        matched = False
        for length in range(min(lexicon.max_len, n - pos), 0, -1):
            phrase = tuple(t.lower for t in tokens[pos : pos + length])
            tag = lexicon.lookup(phrase)
            if tag is not None:
                out.append(
                    TaggedToken(tokens=tuple(tokens[pos : pos + length]), tag=tag, confidence=1.0)
                )
                pos += length
                matched = True
                break
        if matched:
            continue

        token = tokens[pos]

        # 2. exact table/column name
        name_tag = _exact_name_tag(token.lower, catalog)
        if name_tag is not None:
            out.append(TaggedToken(tokens=(token,), tag=name_tag, confidence=1.0))
            pos += 1
            continue

        # 3. exact value, longest span first
        for length in range(min(index.max_len, n - pos), 0, -1):
            phrase = tuple(t.lower for t in tokens[pos : pos + length])
            key = index.phrases.get(phrase)
            if key is not None:
                out.append(
                    TaggedToken(
                        tokens=tuple(tokens[pos : pos + length]),
                        tag=_value_tag(key, index),
                        confidence=1.0,
                    )
                )
                pos += length
                matched = True
                break
        if matched:
            continue

        # 4. fuzzy single-token match
        fuzzy = _fuzzy_tag(token.lower, catalog, index)
        if fuzzy is not None:
            out.append(TaggedToken(tokens=(token,), tag=fuzzy[0], confidence=fuzzy[1]))
            pos += 1
            continue

        # 5. numeric literal
        number = _parse_number(token.lower)
        if number is not None:
            out.append(
                TaggedToken(
                    tokens=(token,),
                    tag=EntityTag(kind=TagKind.NUMBER, number=number),
                    confidence=1.0,
                )
            )
            pos += 1
            continue

        # 6. everything else
        out.append(
            TaggedToken(tokens=(token,), tag=EntityTag(kind=TagKind.OTHER), confidence=0.0)
        )
        pos += 1
    return out
