"""Command-line entry points: repl, serve, eval, train, validate-templates.

Asset flags are shared: --data-dir names a fixture directory (catalog.tsv,
one CSV per table, templates.txt, link_corpus.tsv); --catalog/--templates
override individual files; --stmt-model/--link-model load persisted
classifiers instead of fitting from the bundled corpora at startup.
The NLQ_LOG environment variable sets the log level.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .classify import EmptyTrainingSet, fit, load_corpus, save_model
from .dialogue import BUNDLED_DATA_DIR, Assets, handle_turn, load_assets, new_context
from .evalharness import evaluate, load_dataset, render_report
from .server import serve
from .sqlast import serialize
from .templates import load_templates


def _add_asset_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--data-dir",
        default=str(BUNDLED_DATA_DIR / "hotel"),
        help="fixture directory with catalog.tsv, table CSVs, templates.txt (default: bundled hotel fixture)",
    )
    parser.add_argument("--catalog", default=None, help="catalog file (default: <data-dir>/catalog.tsv)")
    parser.add_argument("--templates", default=None, help="template file (default: <data-dir>/templates.txt)")
    parser.add_argument("--stmt-model", default=None, help="persisted statement-type model file")
    parser.add_argument("--link-model", default=None, help="persisted table-linking model file")


def _assets_from_args(args: argparse.Namespace) -> Assets:
    return load_assets(
        args.data_dir,
        catalog_path=args.catalog,
        templates_path=args.templates,
        stmt_model_path=args.stmt_model,
        link_model_path=args.link_model,
    )


def _cmd_repl(args: argparse.Namespace) -> int:
    assets = _assets_from_args(args)
    ctx = new_context("repl")
    print(f"database '{assets.name}' loaded; :reset clears context, :quit exits")
    while True:
        try:
            line = input("nlq> ")
        except EOFError:
            print()
            return 0
        line = line.strip()
        if not line:
            continue
        if line == ":quit":
            return 0
        if line == ":reset":
            ctx = new_context("repl")
            print("context cleared")
            continue
        outcome, ctx = handle_turn(ctx, line, assets)
        if outcome.ok:
            assert outcome.sql is not None
            print(f"  sql:    {serialize(outcome.sql)}")
            print(f"  target: {outcome.target}")
            for record in outcome.trace:
                if record.stage == "decide_target" and "warning" in record.detail:
                    print(f"  note:   {record.detail}")
            print(f"  answer: {outcome.answer}")
            print(f"  took:   {outcome.elapsed_ms:.1f} ms")
        else:
            print(f"  error at {outcome.error_stage}: {outcome.error_message}")


def _cmd_serve(args: argparse.Namespace) -> int:
    assets = _assets_from_args(args)
    static_dir = args.static_dir
    if static_dir is None:
        default_build = Path("frontend") / "dist"
        if default_build.is_dir():
            static_dir = str(default_build)
    serve(assets, args.port, static_dir=static_dir)
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    examples = load_dataset(args.dataset)
    db_dir = Path(args.db_dir)
    assets: dict[str, Assets] = {}
    for db in sorted({ex.db for ex in examples}):
        assets[db] = load_assets(
            db_dir / db,
            stmt_model_path=args.stmt_model,
            link_model_path=args.link_model,
        )
    report = evaluate(examples, assets, dataset=Path(args.dataset).stem)
    sys.stdout.write(render_report([report], format=args.format))
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    try:
        examples = load_corpus(args.corpus)
        model = fit(examples)
    except EmptyTrainingSet as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    save_model(model, args.out)
    print(
        f"trained {args.kind} model: {len(model.classes)} classes, "
        f"{len(model.vocabulary)} features -> {args.out}"
    )
    return 0


def _cmd_validate_templates(args: argparse.Namespace) -> int:
    catalog = load_templates(args.templates)
    print(f"{len(catalog.templates)} template(s) OK")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nlq", description="natural-language questions over small databases")
    sub = parser.add_subparsers(dest="command", required=True)

    p_repl = sub.add_parser("repl", help="interactive question loop")
    _add_asset_flags(p_repl)
    p_repl.set_defaults(func=_cmd_repl)

    p_serve = sub.add_parser("serve", help="HTTP JSON API + chat UI host")
    _add_asset_flags(p_serve)
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--static-dir", default=None, help="directory of built UI assets (default: frontend/dist if present)")
    p_serve.set_defaults(func=_cmd_serve)

    p_eval = sub.add_parser("eval", help="run a question/gold-SQL dataset and report accuracy")
    p_eval.add_argument("--dataset", required=True, help="TSV: session, turn, db, question, gold_sql")
    p_eval.add_argument("--db-dir", default=str(BUNDLED_DATA_DIR), help="directory containing one fixture subdirectory per database")
    p_eval.add_argument("--format", choices=("table", "csv"), default="table")
    p_eval.add_argument("--stmt-model", default=None, help="persisted statement-type model file")
    p_eval.add_argument("--link-model", default=None, help="persisted table-linking model file")
    p_eval.set_defaults(func=_cmd_eval)

    p_train = sub.add_parser("train", help="fit a classifier from a label<TAB>text corpus")
    p_train.add_argument("corpus", help="training corpus file")
    p_train.add_argument("out", help="output model file")
    p_train.add_argument("--kind", choices=("statement", "linking"), required=True)
    p_train.set_defaults(func=_cmd_train)

    p_validate = sub.add_parser("validate-templates", help="parse and grammar-check a template file")
    p_validate.add_argument("templates", help="template file to validate")
    p_validate.set_defaults(func=_cmd_validate_templates)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("NLQ_LOG", "WARNING").upper())
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return 130
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
