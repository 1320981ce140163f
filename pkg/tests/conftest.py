import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

SUMMARY_PATH = Path(__file__).parent.parent / "acceptance_summary.txt"


@pytest.fixture(scope="session")
def acceptance_log():
    lines = []
    yield lines
    if lines:
        SUMMARY_PATH.write_text("\n".join(lines) + "\n", encoding="utf-8")
        print("\n".join(["", "=" * 72] + lines + ["=" * 72]))
