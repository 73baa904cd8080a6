import os
import sys
from datetime import datetime

import pandas as pd
import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

from egoshift.core import UTC, PeriodSchedule
from egoshift.ingest import normalize_frame, with_periods

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def schedule():
    return PeriodSchedule()


def make_frame(rows, schedule=None):
    """rows: (ego, alter, 'YYYY-MM-DD', kind[, polarity[, topic]])"""
    recs = []
    for i, row in enumerate(rows):
        ego, alter, day, kind, *rest = row
        pol = rest[0] if len(rest) > 0 else None
        topic = rest[1] if len(rest) > 1 else None
        recs.append(
            {
                "record_id": f"r{i}",
                "ego_id": ego,
                "alter_id": alter,
                "timestamp": pd.Timestamp(day, tz="UTC"),
                "kind": kind,
                "polarity": pol,
                "topic": topic,
                "text": None,
            }
        )
    frame = normalize_frame(pd.DataFrame(recs))
    if schedule is not None:
        frame = with_periods(frame, schedule)
    return frame


def ts(*args):
    return datetime(*args, tzinfo=UTC)


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
