"""
Rewrite the golden enumeration tables under `tests/golden/`.

Run this after an intentional change to the admissibility classification or
to the CSV layout, then review the diff before committing:

    python tools/regenerate_golden.py
    git diff tests/golden
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT))

from polyharm.deformation import enumerate_admissible  # noqa: E402
from polyharm.reports import admissibility_csv  # noqa: E402

# (file name, kind, ell_max, m_max, require_map)
GOLDEN_TABLES = (
    ("enumerate_bih_6x6.csv", "bih", 6, 6, True),
    ("enumerate_bih_10x30.csv", "bih", 10, 30, True),
    ("enumerate_tri_10x30.csv", "tri", 10, 30, False),
)


def main():
    parser = argparse.ArgumentParser(description="Regenerate golden CSV tables")
    parser.add_argument(
        "--outdir",
        default=str(ROOT / "tests" / "golden"),
        help="Directory to write the CSV files to",
    )
    args = parser.parse_args()

    out_dir = os.path.abspath(args.outdir)
    os.makedirs(out_dir, exist_ok=True)
    for name, kind, ell_max, m_max, require_map in GOLDEN_TABLES:
        records = enumerate_admissible(kind, ell_max, m_max, require_map=require_map)
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(admissibility_csv(records))
        print(f"wrote {len(records)} rows to {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
