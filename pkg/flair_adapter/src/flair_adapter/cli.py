"""Command-line entry point."""

from __future__ import annotations

import argparse
import sys

from .adapter import AdapterConfig, run_adapter
from .models import AdapterError


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="flair-adapter",
        description="Run a sequence-labeling model over a corpus JSON-lines "
        "file and emit tag-interchange JSON lines.",
    )
    parser.add_argument(
        "--model",
        required=True,
        help="model identifier: 'flair:<name-or-path>' or 'pattern:<rules.json>'",
    )
    parser.add_argument("--corpus", required=True, help="corpus JSON-lines file")
    parser.add_argument("--out", required=True, help="tag-interchange output path")
    parser.add_argument("--batch-size", type=int, default=32)
    args = parser.parse_args(argv)
    config = AdapterConfig(
        model=args.model, corpus=args.corpus, out=args.out, batch_size=args.batch_size
    )
    try:
        summary = run_adapter(config)
    except AdapterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(summary.format())
    return 0


if __name__ == "__main__":
    sys.exit(main())
