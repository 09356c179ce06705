import csv

import pytest

import nlq.classify as classify
from nlq.dialogue import (
    BUNDLED_DATA_DIR,
    bundled_assets,
    decide_target,
    handle_turn,
    load_assets,
    new_context,
)
from nlq.engine import execute
from nlq.sqlast import StatementType, parse_sql, serialize
from nlq.templates import Target


EXPECTED_STAGES = [
    "tokenize",
    "tag_entities",
    "classify_statement",
    "link_schema",
    "match_template",
    "build_query",
    "decide_target",
    "execute",
    "render_answer",
]


def count_available_rooms_in_csv():
    with open(BUNDLED_DATA_DIR / "hotel" / "rooms.csv", newline="", encoding="utf-8") as fh:
        return sum(1 for row in csv.DictReader(fh) if row["status"] == "available")


# ---------------------------------------------------------------------------
# the golden turn


def test_counting_question_end_to_end(fresh_hotel_assets):
    outcome, ctx = handle_turn(
        new_context("t"), "How many rooms are available?", fresh_hotel_assets
    )
    assert outcome.ok
    assert serialize(outcome.sql) == "SELECT COUNT(id) FROM rooms WHERE status = 'available'"
    expected = count_available_rooms_in_csv()
    assert outcome.result.scalar == expected
    assert outcome.answer == f"THERE ARE {expected} ROOMS AVAILABLE"
    assert outcome.target == Target.DATABASE
    assert ctx.turn_count == 1


def test_trace_covers_every_stage_once(fresh_hotel_assets):
    outcome, _ = handle_turn(
        new_context("t"), "How many rooms are available?", fresh_hotel_assets
    )
    assert [r.stage for r in outcome.trace] == EXPECTED_STAGES


def test_elapsed_is_non_negative(fresh_hotel_assets):
    outcome, _ = handle_turn(new_context("t"), "show all rooms", fresh_hotel_assets)
    assert outcome.elapsed_ms >= 0


# ---------------------------------------------------------------------------
# context across turns


def test_select_turn_retains_query_result_and_full_rows(fresh_hotel_assets):
    outcome, ctx = handle_turn(
        new_context("t"), "show all available rooms", fresh_hotel_assets
    )
    assert outcome.ok
    assert ctx.last_query == outcome.sql
    assert ctx.last_result == outcome.result
    assert ctx.last_full_rows is not None
    assert ctx.last_full_rows.columns == ("id", "floor", "price", "status", "category")


def test_projected_turn_retains_unprojected_rows(fresh_hotel_assets):
    # the kept full rows must include columns the projection dropped
    _, ctx = handle_turn(
        new_context("t"), "what is the average price of the rooms", fresh_hotel_assets
    )
    assert ctx.last_full_rows is not None
    assert "status" in ctx.last_full_rows.columns


def test_follow_up_filters_previous_result(fresh_hotel_assets):
    assets = fresh_hotel_assets
    _, ctx = handle_turn(new_context("t"), "show all available rooms", assets)
    outcome, ctx = handle_turn(ctx, "of those, which are on floor 2", assets)
    assert outcome.ok
    assert outcome.target == Target.PREVIOUS_RESULT
    compound = parse_sql("SELECT * FROM rooms WHERE status = 'available' AND floor = 2")
    direct = execute(compound, assets.store)
    assert sorted(map(repr, outcome.result.rows)) == sorted(map(repr, direct.rows))
    assert ctx.turn_count == 2


def test_follow_up_aggregates_previous_result(fresh_hotel_assets):
    assets = fresh_hotel_assets
    _, ctx = handle_turn(new_context("t"), "show all available rooms", assets)
    outcome, _ = handle_turn(ctx, "of those, how many are on floor 2", assets)
    assert outcome.ok
    assert outcome.target == Target.PREVIOUS_RESULT
    direct = execute(
        parse_sql("SELECT COUNT(*) FROM rooms WHERE status = 'available' AND floor = 2"),
        assets.store,
    )
    assert outcome.result.scalar == direct.scalar


def test_anaphora_without_context_falls_back_to_database(fresh_hotel_assets):
    outcome, _ = handle_turn(
        new_context("t"), "of those, how many rooms are available", fresh_hotel_assets
    )
    assert outcome.ok
    assert outcome.target == Target.DATABASE
    decide = next(r for r in outcome.trace if r.stage == "decide_target")
    assert "warning" in decide.detail


def test_error_turn_leaves_context_unchanged(fresh_hotel_assets):
    _, ctx = handle_turn(new_context("t"), "show all available rooms", fresh_hotel_assets)
    before = ctx
    outcome, after = handle_turn(ctx, "flurble womp", fresh_hotel_assets)
    assert not outcome.ok
    assert outcome.error_stage == "match_template"
    assert outcome.error_message
    assert after == before


def test_error_trace_covers_only_completed_stages(fresh_hotel_assets):
    outcome, _ = handle_turn(new_context("t"), "flurble womp", fresh_hotel_assets)
    stages = [r.stage for r in outcome.trace]
    assert stages == EXPECTED_STAGES[: len(stages)]
    assert "match_template" not in stages  # the failing stage never completes


def test_turn_count_increases_only_on_success(fresh_hotel_assets):
    ctx = new_context("t")
    _, ctx = handle_turn(ctx, "show all rooms", fresh_hotel_assets)
    _, ctx = handle_turn(ctx, "flurble womp", fresh_hotel_assets)
    _, ctx = handle_turn(ctx, "show all bookings", fresh_hotel_assets)
    assert ctx.turn_count == 2


# ---------------------------------------------------------------------------
# mutations


def test_delete_turn_changes_the_store(fresh_hotel_assets):
    assets = fresh_hotel_assets
    before = len(assets.store.table("rooms").rows)
    outcome, ctx = handle_turn(new_context("t"), "delete room 12", assets)
    assert outcome.ok
    assert serialize(outcome.sql) == "DELETE FROM rooms WHERE id = 12"
    assert outcome.target == Target.DATABASE
    assert len(assets.store.table("rooms").rows) == before - 1
    # mutations retain no previous-result context
    assert ctx.last_full_rows is None


def test_mutation_rebuilds_value_index(fresh_products_assets):
    assets = fresh_products_assets
    before = assets.value_index
    assert "drone" in before.entries  # product 5's unique name
    outcome, _ = handle_turn(new_context("t"), "delete product 5", assets)
    assert outcome.ok, outcome.error_message
    assert serialize(outcome.sql) == "DELETE FROM products WHERE id = 5"
    assert assets.value_index is not before
    assert "drone" not in assets.value_index.entries
    # the vanished value no longer tags, so the question stops resolving
    follow, _ = handle_turn(new_context("t2"), "show the drone products", assets)
    assert follow.ok
    assert serialize(follow.sql) == "SELECT * FROM products"


def test_mutation_never_targets_previous_result(fresh_hotel_assets):
    assets = fresh_hotel_assets
    _, ctx = handle_turn(new_context("t"), "show all available rooms", assets)
    outcome, _ = handle_turn(ctx, "delete room 12", assets)
    assert outcome.ok
    assert outcome.target == Target.DATABASE


# ---------------------------------------------------------------------------
# decide_target in isolation


class _Tpl:
    def __init__(self, target, stype):
        self.target = target
        self.statement_type = stype


def _anaphora_tag():
    from nlq.tagging import EntityTag, TagKind, TaggedToken
    from nlq.tokens import Token

    tok = Token(text="those", lower="those", index=0)
    return TaggedToken(
        tokens=(tok,), tag=EntityTag(kind=TagKind.ANAPHORA_CUE), confidence=1.0
    )


def test_decide_target_explicit_wins(fresh_hotel_assets):
    ctx = new_context("t")
    tpl = _Tpl(Target.DATABASE, StatementType.SELECT)
    assert decide_target([_anaphora_tag()], tpl, ctx) == Target.DATABASE


def test_decide_target_auto_needs_all_three_conditions(fresh_hotel_assets):
    assets = fresh_hotel_assets
    _, ctx_with = handle_turn(new_context("t"), "show all rooms", assets)
    auto_select = _Tpl(Target.AUTO, StatementType.SELECT)
    auto_delete = _Tpl(Target.AUTO, StatementType.DELETE)
    # all three hold → previous result
    assert decide_target([_anaphora_tag()], auto_select, ctx_with) == Target.PREVIOUS_RESULT
    # no anaphora cue
    assert decide_target([], auto_select, ctx_with) == Target.DATABASE
    # no retained context
    assert decide_target([_anaphora_tag()], auto_select, new_context("x")) == Target.DATABASE
    # not a read statement
    assert decide_target([_anaphora_tag()], auto_delete, ctx_with) == Target.DATABASE


# ---------------------------------------------------------------------------
# asset loading and training hygiene


def test_bundled_assets_loads_all_three_databases():
    for name, table_count in (("hotel", 2), ("products", 1), ("employees", 1)):
        assets = bundled_assets(name)
        assert assets.name == name
        assert len(assets.catalog.tables) == table_count


def test_statement_model_classes_are_statement_types():
    assets = bundled_assets("hotel")
    assert set(assets.stmt_model.classes) <= set(StatementType.__members__)


def test_load_assets_accepts_pretrained_model_files(tmp_path):
    from nlq.classify import fit, load_corpus, save_model

    stmt = tmp_path / "stmt.model"
    link = tmp_path / "link.model"
    save_model(fit(load_corpus(BUNDLED_DATA_DIR / "stmt_corpus.tsv")), stmt)
    save_model(fit(load_corpus(BUNDLED_DATA_DIR / "hotel" / "link_corpus.tsv")), link)
    assets = load_assets(
        BUNDLED_DATA_DIR / "hotel", stmt_model_path=stmt, link_model_path=link
    )
    outcome, _ = handle_turn(new_context("t"), "show all rooms", assets)
    assert outcome.ok


def test_handle_turn_never_trains(fresh_hotel_assets):
    assets = fresh_hotel_assets  # assets loading itself may train
    before = classify.FIT_INVOCATIONS
    ctx = new_context("t")
    for question in (
        "How many rooms are available?",
        "of those, which are on floor 2",
        "delete room 12",
        "flurble womp",
    ):
        _, ctx = handle_turn(ctx, question, assets)
    assert classify.FIT_INVOCATIONS == before
