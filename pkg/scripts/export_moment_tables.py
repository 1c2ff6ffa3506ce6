#!/usr/bin/env python3
"""
Export the derived moment tables (trigonometric expansions, θ-diffusion and drift
couplings) to JSON, for the documentation and for review in diffs.
"""
import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from core.processing.moment_tables import export_tables  # noqa: E402

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-order", type=int, default=6)
    parser.add_argument("--output", type=Path,
                        default=Path(__file__).parent.parent / "docs" / "assets" / "moment_tables.json")
    args = parser.parse_args()

    args.output.parent.mkdir(parents=True, exist_ok=True)
    tables = export_tables(args.max_order)
    with open(args.output, "w") as f:
        json.dump(tables, f, indent=2, default=str)
    print(f"Moment tables up to order {args.max_order} exported to {args.output}")
