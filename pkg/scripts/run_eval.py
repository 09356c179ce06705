"""Run the three bundled question corpora and print the accuracy report.

Usage:
    python3 scripts/run_eval.py [--format table|csv]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from nlq.dialogue import BUNDLED_DATA_DIR, load_assets
from nlq.evalharness import evaluate, load_dataset, render_report

CORPORA = (
    ("hotel_50", "hotel"),
    ("products_40", "products"),
    ("employees_40", "employees"),
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--format", choices=("table", "csv"), default="table")
    args = parser.parse_args()

    reports = []
    for dataset, db in CORPORA:
        examples = load_dataset(BUNDLED_DATA_DIR / "datasets" / f"{dataset}.tsv")
        assets = {db: load_assets(BUNDLED_DATA_DIR / db)}
        reports.append(evaluate(examples, assets, dataset=dataset))
    sys.stdout.write(render_report(reports, format=args.format))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
