from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def ticks_3day_path():
    return FIXTURES / "ticks_3day.csv"
