import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
if str(TESTS_DIR) not in sys.path:
    sys.path.insert(0, str(TESTS_DIR))

FIXTURES = TESTS_DIR.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


def load_fixture(name: str):
    from pnid.netformat import parse_net

    return parse_net((FIXTURES / name).read_text())


@pytest.fixture(scope="session")
def retail():
    return load_fixture("retail_shop.pnid")
