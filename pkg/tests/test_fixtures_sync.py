"""The packaged fixtures must match what the build script would regenerate.

A drift here means the prompt templates changed without rerunning
scripts/build_fixtures.py.
"""

from __future__ import annotations

import sys
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parent.parent


def test_packaged_fixtures_are_in_sync():
    sys.path.insert(0, str(REPO_ROOT / "scripts"))
    try:
        import build_fixtures
    finally:
        sys.path.pop(0)
    outputs = build_fixtures.build_all()
    for name, expected in outputs.items():
        on_disk = (build_fixtures.FIXTURE_DIR / name).read_text(encoding="utf-8")
        assert on_disk == expected, f"{name} is stale; rerun scripts/build_fixtures.py"
