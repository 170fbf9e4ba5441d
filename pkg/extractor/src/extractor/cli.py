"""Command-line entry points.

codesum-extract --input PATH --language java|python  (JSONL on stdout)
codesum-extract-stats DATASET.jsonl                  (stats JSON on stdout)
"""

from __future__ import annotations

import argparse
import json
import sys

from .extract import ExtractionError, extract
from .stats import StatsError, compute_stats


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="codesum-extract",
        description="Extract code/summary pairs with AST records from sources.",
    )
    parser.add_argument("--input", required=True,
                        help="source directory or JSONL of raw code/comment pairs")
    parser.add_argument("--language", required=True, choices=("java", "python"))
    args = parser.parse_args(argv)
    try:
        extract(args.input, args.language)
    except (ExtractionError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    return 0


def stats_main(argv=None):
    parser = argparse.ArgumentParser(
        prog="codesum-extract-stats",
        description="Report corpus statistics for an extracted dataset.",
    )
    parser.add_argument("dataset", help="dataset JSONL path")
    args = parser.parse_args(argv)
    try:
        report = compute_stats(args.dataset)
    except (StatsError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    json.dump(report, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
