from __future__ import annotations

from pathlib import Path

import pytest

from xmaint.config import load_config
from xmaint.profiles import ProfileRegistry

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def registry():
    return ProfileRegistry()


@pytest.fixture
def default_config():
    return load_config()


@pytest.fixture
def parity_roots():
    return FIXTURES / "parity" / "cfam", FIXTURES / "parity" / "py"


def write_tree(root: Path, files: dict[str, str]) -> Path:
    for rel, content in files.items():
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content, encoding="utf-8")
    return root
