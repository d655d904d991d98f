from __future__ import annotations

import numpy as np
import pandas as pd
import pytest
from hypothesis import strategies as st

from trafficgraph.features import READING_COLUMNS, SENSOR_COLUMNS
from trafficgraph.graph import from_index_edges


@st.composite
def graphs(draw, min_nodes: int = 1, max_nodes: int = 12, connected: bool = False):
    """Random simple graphs; ``connected`` adds a random spanning tree first."""
    n = draw(st.integers(min_nodes, max_nodes))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = set(draw(st.lists(st.sampled_from(pairs), max_size=len(pairs))) if pairs else [])
    if connected:
        for k in range(1, n):
            parent = draw(st.integers(0, k - 1))
            chosen.add((parent, k))
    return from_index_edges(n, chosen)


def hourly_readings(sensor_ids, n_hours: int, speed=30.0, count=10, start="2024-01-01") -> pd.DataFrame:
    ts = pd.date_range(start, periods=n_hours, freq="h", tz="UTC")
    rows = []
    for sid in sensor_ids:
        for k, t in enumerate(ts):
            v = speed(sid, k) if callable(speed) else speed
            rows.append((sid, t, v, v * 0.5, v * 1.5, count))
    return pd.DataFrame(rows, columns=list(READING_COLUMNS))


def sensor_meta(sensor_ids) -> pd.DataFrame:
    rows = []
    for k, sid in enumerate(sensor_ids):
        rows.append((sid, 41.0 + 0.01 * k, 29.0 + 0.01 * k, "europe" if k % 2 == 0 else "asia", f"D{k % 3}", k % 2, 1000.0 + k))
    return pd.DataFrame(rows, columns=list(SENSOR_COLUMNS))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
