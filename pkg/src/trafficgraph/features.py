"""Congestion labels, lag features and assembly of the per-(sensor, hour) table.

A sample is keyed by ``(sensor_id, t)`` and labelled from the reading at
hour ``t``. Its traffic measurement columns come from the reading at
``t - observation_offset_hours``: with the default offset of one hour the
model only sees what was measured before the hour it predicts (an offset of
0 puts the labelled reading itself in the features, which makes the label a
deterministic function of ``avg_speed``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import pandas as pd

from .errors import EmbeddingSizeMismatch, MissingMeta, ZeroVehicles

READING_COLUMNS = ("sensor_id", "timestamp", "avg_speed", "min_speed", "max_speed", "vehicle_count")
SENSOR_COLUMNS = ("sensor_id", "lat", "lon", "continent", "district", "is_highway", "pop_density")

TRAFFIC_COLUMNS = ("avg_speed", "min_speed", "max_speed", "vehicle_count")
SENSOR_FEATURE_COLUMNS = ("continent", "district", "is_highway", "pop_density")
CALENDAR_COLUMNS = ("hour_of_day", "day_of_week")
BASE_COLUMNS = TRAFFIC_COLUMNS + SENSOR_FEATURE_COLUMNS + CALENDAR_COLUMNS
LAG_HOURS = {"density_lag_1h": 1, "density_lag_168h": 168}
LAG_COLUMNS = tuple(LAG_HOURS)

_HOUR = pd.Timedelta(hours=1)
_EPOCH = pd.Timestamp("1970-01-01", tz="UTC")


@dataclass(frozen=True)
class SensorReading:
    sensor_id: str
    timestamp: datetime
    avg_speed: float
    min_speed: float
    max_speed: float
    vehicle_count: int

    def __post_init__(self):
        if min(self.avg_speed, self.min_speed, self.max_speed) < 0 or self.vehicle_count < 0:
            raise ValueError("speeds and vehicle_count must be non-negative")
        if not self.min_speed <= self.avg_speed <= self.max_speed:
            raise ValueError("expected min_speed <= avg_speed <= max_speed")
        ts = self.timestamp
        if ts.minute or ts.second or ts.microsecond:
            raise ValueError(f"timestamp {ts.isoformat()} is not hour-aligned")


@dataclass(frozen=True)
class SensorMeta:
    sensor_id: str
    latitude: float
    longitude: float
    continent: str
    district: str
    is_highway: bool
    population_density: float

    def __post_init__(self):
        if not -90 <= self.latitude <= 90 or not -180 <= self.longitude <= 180:
            raise ValueError("latitude/longitude out of range")
        if self.continent not in ("europe", "asia"):
            raise ValueError(f"unknown continent {self.continent!r}")
        if self.population_density < 0:
            raise ValueError("population_density must be non-negative")


@dataclass(frozen=True)
class LabelingConfig:
    """``speed_only``: score ``exp(-s)``; ``speed_volume``: score ``sigmoid(s / v)``.

    ``s`` is the raw speed divided by ``speed_unit_scale``. A row is congested
    (label 1) when its score is at least ``tau``; ``invert_label`` flips that.
    """

    mode: str = "speed_only"
    tau: float = 0.5
    speed_unit_scale: float = 1.0
    invert_label: bool = False

    def __post_init__(self):
        if self.mode not in ("speed_only", "speed_volume"):
            raise ValueError(f"unknown labeling mode {self.mode!r}")
        if not 0.0 < self.tau < 1.0:
            raise ValueError("tau must lie strictly between 0 and 1")
        if self.speed_unit_scale <= 0:
            raise ValueError("speed_unit_scale must be positive")


def _sigmoid(x):
    # two-sided form avoids overflow in exp for large |x|
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid(x: float) -> float:
    return float(_sigmoid(np.array([x]))[0])


def congestion_label_speed(s: float, tau: float) -> int:
    return 0 if math.exp(-s) < tau else 1


def congestion_label_speed_volume(s: float, v: float, tau: float) -> int:
    if v == 0:
        raise ZeroVehicles("speed/volume label undefined for zero vehicles")
    return 0 if sigmoid(s / v) < tau else 1


def density_score(reading: SensorReading, config: LabelingConfig) -> float:
    s = reading.avg_speed / config.speed_unit_scale
    if config.mode == "speed_only":
        return math.exp(-s)
    if reading.vehicle_count == 0:
        raise ZeroVehicles(f"{reading.sensor_id} at {reading.timestamp}: zero vehicles")
    return sigmoid(s / reading.vehicle_count)


def label_reading(reading: SensorReading, config: LabelingConfig) -> int:
    """Label one reading; zero-vehicle rows in speed_volume mode fall back to speed only."""
    try:
        score = density_score(reading, config)
    except ZeroVehicles:
        score = math.exp(-reading.avg_speed / config.speed_unit_scale)
    lab = int(score >= config.tau)
    return 1 - lab if config.invert_label else lab


def density_scores(avg_speed, vehicle_count, config: LabelingConfig) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised scores plus a mask of rows that used the speed-only fallback."""
    s = np.asarray(avg_speed, dtype=np.float64) / config.speed_unit_scale
    if config.mode == "speed_only":
        return np.exp(-s), np.zeros(s.shape, dtype=bool)
    v = np.asarray(vehicle_count, dtype=np.float64)
    zero = v == 0
    score = np.exp(-s)
    score[~zero] = _sigmoid(s[~zero] / v[~zero])
    return score, zero


def labels_from_scores(scores: np.ndarray, config: LabelingConfig) -> np.ndarray:
    lab = (np.asarray(scores) >= config.tau).astype(np.int8)
    return 1 - lab if config.invert_label else lab


# --- tabular helpers -------------------------------------------------------


def readings_frame(readings: Iterable[SensorReading]) -> pd.DataFrame:
    rows = [
        (r.sensor_id, r.timestamp, r.avg_speed, r.min_speed, r.max_speed, r.vehicle_count) for r in readings
    ]
    df = pd.DataFrame(rows, columns=list(READING_COLUMNS))
    df["timestamp"] = pd.to_datetime(df["timestamp"], utc=True)
    df["sensor_id"] = df["sensor_id"].astype(str)
    return df


def meta_frame(meta: Iterable[SensorMeta]) -> pd.DataFrame:
    rows = [
        (m.sensor_id, m.latitude, m.longitude, m.continent, m.district, int(m.is_highway), m.population_density)
        for m in meta
    ]
    df = pd.DataFrame(rows, columns=list(SENSOR_COLUMNS))
    df["sensor_id"] = df["sensor_id"].astype(str)
    return df


def hour_index(timestamps: pd.Series) -> np.ndarray:
    """Whole hours since the Unix epoch."""
    return ((pd.to_datetime(timestamps, utc=True) - _EPOCH) // _HOUR).to_numpy(dtype=np.int64)


class _HourLookup:
    """Position of ``(sensor_code, hour)`` in the readings frame, or -1."""

    def __init__(self, codes: np.ndarray, hours: np.ndarray, margin: int):
        self.h0 = int(hours.min()) if len(hours) else 0
        self.span = (int(hours.max()) - self.h0 if len(hours) else 0) + margin + 1
        keys = codes * self.span + (hours - self.h0)
        self.keys = keys
        self.index = pd.Index(keys)
        if not self.index.is_unique:
            raise ValueError("readings contain duplicate (sensor_id, timestamp) rows")

    def shifted(self, hours_back: int) -> np.ndarray:
        return self.index.get_indexer(self.keys - hours_back)


def build_lag_features(readings: pd.DataFrame, config: LabelingConfig, lag_mode: str = "score") -> pd.DataFrame:
    """Previous-hour and previous-week density for every reading.

    Returns the readings' ``sensor_id``/``timestamp`` with ``density`` (the
    row's own score) and the two lag columns; rows whose lag source is
    missing are dropped.
    """
    df = _sorted_readings(readings)
    codes = pd.factorize(df["sensor_id"], sort=True)[0].astype(np.int64)
    lookup = _HourLookup(codes, hour_index(df["timestamp"]), margin=max(LAG_HOURS.values()) + 1)
    score, _ = density_scores(df["avg_speed"], df["vehicle_count"], config)
    value = _lag_values(score, config, lag_mode)
    out = df[["sensor_id", "timestamp"]].copy()
    out["density"] = score
    keep = np.ones(len(df), dtype=bool)
    for name, h in LAG_HOURS.items():
        pos = lookup.shifted(h)
        keep &= pos >= 0
        out[name] = np.where(pos >= 0, value[np.maximum(pos, 0)], np.nan)
    return out.loc[keep].reset_index(drop=True)


def _lag_values(score: np.ndarray, config: LabelingConfig, lag_mode: str) -> np.ndarray:
    if lag_mode == "score":
        return score
    if lag_mode == "label":
        return labels_from_scores(score, config).astype(np.float64)
    raise ValueError(f"unknown lag_mode {lag_mode!r}")


def _sorted_readings(readings: pd.DataFrame) -> pd.DataFrame:
    missing = set(READING_COLUMNS) - set(readings.columns)
    if missing:
        raise ValueError(f"readings frame lacks columns {sorted(missing)}")
    df = readings.loc[:, list(READING_COLUMNS)].copy()
    df["sensor_id"] = df["sensor_id"].astype(str)
    df["timestamp"] = pd.to_datetime(df["timestamp"], utc=True)
    return df.sort_values(["sensor_id", "timestamp"], kind="stable").reset_index(drop=True)


@dataclass(frozen=True, eq=False)
class FeatureTable:
    """Feature matrix with one row per ``(sensor_id, timestamp)`` sample."""

    sensor_ids: np.ndarray
    timestamps: np.ndarray  # datetime64[ns], UTC
    X: np.ndarray
    label: np.ndarray
    columns: tuple[str, ...]
    fallback: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))

    def __post_init__(self):
        if self.X.shape != (len(self.label), len(self.columns)):
            raise ValueError("X shape does not match labels/columns")
        if self.fallback.shape != self.label.shape:
            object.__setattr__(self, "fallback", np.zeros(len(self.label), dtype=bool))

    def __len__(self) -> int:
        return len(self.label)

    @property
    def column_manifest(self) -> tuple[str, ...]:
        return self.columns

    def row_keys(self) -> list[str]:
        ts = pd.DatetimeIndex(self.timestamps).strftime("%Y-%m-%dT%H:%M:%SZ")
        return [f"{s}|{t}" for s, t in zip(self.sensor_ids, ts)]

    def select(self, mask_or_index) -> "FeatureTable":
        return FeatureTable(
            self.sensor_ids[mask_or_index],
            self.timestamps[mask_or_index],
            self.X[mask_or_index],
            self.label[mask_or_index],
            self.columns,
            self.fallback[mask_or_index],
        )

    def without_columns(self, names: Sequence[str]) -> "FeatureTable":
        drop = set(names)
        keep = [i for i, c in enumerate(self.columns) if c not in drop]
        return FeatureTable(
            self.sensor_ids,
            self.timestamps,
            self.X[:, keep],
            self.label,
            tuple(self.columns[i] for i in keep),
            self.fallback,
        )

    def to_frame(self) -> pd.DataFrame:
        df = pd.DataFrame(self.X, columns=list(self.columns))
        df.insert(0, "timestamp", pd.DatetimeIndex(self.timestamps).strftime("%Y-%m-%dT%H:%M:%SZ"))
        df.insert(0, "sensor_id", self.sensor_ids)
        df["label"] = self.label.astype(np.int64)
        return df

    def to_csv(self, path: str | Path) -> None:
        self.to_frame().to_csv(path, index=False, lineterminator="\n")

    @classmethod
    def from_csv(cls, path: str | Path) -> "FeatureTable":
        df = pd.read_csv(path, dtype={"sensor_id": str}, float_precision="round_trip")
        cols = tuple(c for c in df.columns if c not in ("sensor_id", "timestamp", "label"))
        ts = pd.to_datetime(df["timestamp"], utc=True).dt.tz_convert(None).to_numpy(dtype="datetime64[ns]")
        return cls(
            df["sensor_id"].to_numpy(dtype=object),
            ts,
            df.loc[:, list(cols)].to_numpy(dtype=np.float64),
            df["label"].to_numpy(dtype=np.int8),
            cols,
        )


def encode_categories(meta: pd.DataFrame) -> dict[str, dict[str, int]]:
    """Integer codes for continent/district in first-seen order over sorted sensor ids."""
    ordered = meta.sort_values("sensor_id", kind="stable")
    codes: dict[str, dict[str, int]] = {}
    for col in ("continent", "district"):
        mapping: dict[str, int] = {}
        for value in ordered[col].astype(str):
            mapping.setdefault(value, len(mapping))
        codes[col] = mapping
    return codes


def assemble_features(
    readings: pd.DataFrame,
    meta: pd.DataFrame,
    config: LabelingConfig,
    embedding=None,
    *,
    include_lags: bool = True,
    observation_offset_hours: int = 1,
    lag_mode: str = "score",
) -> FeatureTable:
    """Build the sample table.

    A sample exists for every reading whose previous-hour, previous-week and
    observation-hour readings are all present, whichever ``include_lags`` is,
    so tables built with and without the lag columns share the same rows.
    ``embedding`` (an :class:`EmbeddingMatrix` carrying ``node_ids``) appends
    columns ``e0..e{d-1}`` constant per sensor.
    """
    if not 0 <= observation_offset_hours <= 168:
        raise ValueError("observation_offset_hours must lie in [0, 168]")
    columns = list(BASE_COLUMNS) + (list(LAG_COLUMNS) if include_lags else [])
    emb_rows = None
    if embedding is not None:
        columns += [f"e{k}" for k in range(embedding.dim)]
        if embedding.node_ids is None:
            raise EmbeddingSizeMismatch("embedding carries no node ids")
        emb_rows = pd.Index(list(embedding.node_ids))

    df = _sorted_readings(readings)
    meta = meta.copy()
    meta["sensor_id"] = meta["sensor_id"].astype(str)
    meta_by_id = meta.set_index("sensor_id")
    unknown = sorted(set(df["sensor_id"]) - set(meta_by_id.index))
    if unknown:
        raise MissingMeta(f"no sensor metadata for {unknown[:5]}")
    if emb_rows is not None:
        uncovered = sorted(set(df["sensor_id"]) - set(emb_rows.tolist()))
        if uncovered:
            raise EmbeddingSizeMismatch(f"embedding lacks sensors {uncovered[:5]}")

    if df.empty:
        return FeatureTable(
            np.zeros(0, dtype=object),
            np.zeros(0, dtype="datetime64[ns]"),
            np.zeros((0, len(columns))),
            np.zeros(0, dtype=np.int8),
            tuple(columns),
        )

    codes = pd.factorize(df["sensor_id"], sort=True)[0].astype(np.int64)
    hours = hour_index(df["timestamp"])
    lookup = _HourLookup(codes, hours, margin=max(max(LAG_HOURS.values()), observation_offset_hours) + 1)
    score, fallback = density_scores(df["avg_speed"], df["vehicle_count"], config)
    label = labels_from_scores(score, config)
    lag_value = _lag_values(score, config, lag_mode)

    keep = np.ones(len(df), dtype=bool)
    lag_pos = {}
    for name, h in LAG_HOURS.items():
        lag_pos[name] = lookup.shifted(h)
        keep &= lag_pos[name] >= 0
    obs_pos = lookup.shifted(observation_offset_hours) if observation_offset_hours else np.arange(len(df))
    keep &= obs_pos >= 0
    rows = np.flatnonzero(keep)
    obs = obs_pos[rows]

    cat = encode_categories(meta)
    m = meta_by_id.loc[df["sensor_id"].to_numpy()[rows]]
    ts = pd.DatetimeIndex(df["timestamp"].to_numpy()[rows])
    parts = [df.loc[:, list(TRAFFIC_COLUMNS)].to_numpy(dtype=np.float64)[obs]]
    parts.append(
        np.column_stack(
            [
                m["continent"].astype(str).map(cat["continent"]).to_numpy(dtype=np.float64),
                m["district"].astype(str).map(cat["district"]).to_numpy(dtype=np.float64),
                m["is_highway"].to_numpy(dtype=np.float64),
                m["pop_density"].to_numpy(dtype=np.float64),
                ts.hour.to_numpy(dtype=np.float64),
                ts.dayofweek.to_numpy(dtype=np.float64),
            ]
        )
    )
    if include_lags:
        parts.append(np.column_stack([lag_value[lag_pos[name][rows]] for name in LAG_COLUMNS]))
    if emb_rows is not None:
        parts.append(embedding.rows[emb_rows.get_indexer(df["sensor_id"].to_numpy()[rows])])
    X = np.hstack(parts)
    return FeatureTable(
        df["sensor_id"].to_numpy(dtype=object)[rows],
        ts.tz_convert(None).to_numpy(dtype="datetime64[ns]"),
        X,
        label[rows],
        tuple(columns),
        fallback[rows],
    )
