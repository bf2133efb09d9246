import sys
from datetime import date
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tariffgrid.timeseries import PowerSeries, TimeGrid


@pytest.fixture
def grid4():
    """Four 15-minute steps starting Jan 1."""
    return TimeGrid.from_calendar(900, 4, date(2018, 1, 1))


@pytest.fixture
def day_grid():
    """One 96-step day."""
    return TimeGrid.from_calendar(900, 96, date(2018, 1, 1))


@pytest.fixture
def year_grid():
    """The full reference grid: 35040 15-minute steps, 12 months."""
    return TimeGrid.from_calendar(900, 35040, date(2018, 1, 1))


def series(values, kind="load"):
    return PowerSeries(np.asarray(values, dtype=float), kind)
