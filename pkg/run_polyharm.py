import sys
from pathlib import Path

# Ensure the polyharm package can be imported when running from project root
ROOT = Path(__file__).parent
sys.path.insert(0, str(ROOT))

from polyharm.cli import main  # noqa: E402

if __name__ == "__main__":
    raise SystemExit(main())
