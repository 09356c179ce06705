"""Fit the statement-type and per-database table-linking classifiers from
the bundled corpora and write them as ``linmodel v1`` text files.

Usage:
    python3 scripts/train_models.py [--out-dir models]

Training is deterministic: rerunning produces byte-identical files.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from nlq.classify import fit, load_corpus, save_model
from nlq.dialogue import BUNDLED_DATA_DIR

DATABASES = ("hotel", "products", "employees")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="models", help="directory for model files")
    args = parser.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    stmt = fit(load_corpus(BUNDLED_DATA_DIR / "stmt_corpus.tsv"))
    save_model(stmt, out_dir / "statement.model")
    print(f"statement.model: {len(stmt.classes)} classes, {len(stmt.vocabulary)} features")

    for db in DATABASES:
        model = fit(load_corpus(BUNDLED_DATA_DIR / db / "link_corpus.tsv"))
        save_model(model, out_dir / f"link_{db}.model")
        print(f"link_{db}.model: {len(model.classes)} classes, {len(model.vocabulary)} features")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
