"""Reading and writing the three CSV schemas, coordinate-based edge
construction and a seeded synthetic two-continent city."""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from .errors import EmptyDataset, ParseError, SchemaError, TooFewSensors
from .features import READING_COLUMNS, SENSOR_COLUMNS, LabelingConfig, density_scores, labels_from_scores
from .graph import Graph, build_graph, connected_components, from_index_edges, read_edge_csv

EARTH_RADIUS_KM = 6371.0
CONTINENTS = ("europe", "asia")
TIMESTAMP_FORMAT = "%Y-%m-%dT%H:%M:%SZ"

# Labelling used for synthetic data and the benchmark: congested below
# 30 * ln 2 ~ 20.8 km/h. The raw-km/h default (scale 1) is degenerate there.
SYNTH_LABELING = LabelingConfig(mode="speed_only", tau=0.5, speed_unit_scale=30.0)


# --- geography -------------------------------------------------------------


def haversine_km(lat1, lon1, lat2, lon2):
    """Great-circle distance in km (broadcasts)."""
    p1, p2 = np.radians(lat1), np.radians(lat2)
    dphi = p2 - p1
    dlmb = np.radians(lon2) - np.radians(lon1)
    h = np.sin(dphi / 2) ** 2 + np.cos(p1) * np.cos(p2) * np.sin(dlmb / 2) ** 2
    return 2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0)))


def distance_matrix_km(lat: np.ndarray, lon: np.ndarray) -> np.ndarray:
    lat = np.asarray(lat, dtype=np.float64)
    lon = np.asarray(lon, dtype=np.float64)
    d = haversine_km(lat[:, None], lon[:, None], lat[None, :], lon[None, :])
    np.fill_diagonal(d, 0.0)
    return d


@dataclass(frozen=True)
class EdgeConstructionConfig:
    strategy: str = "knn"  # file | knn | radius
    k: int = 3
    radius_m: float | None = None
    symmetrize: bool = True

    def __post_init__(self):
        if self.strategy not in ("file", "knn", "radius"):
            raise ValueError(f"unknown edge strategy {self.strategy!r}")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.strategy == "radius" and (self.radius_m is None or self.radius_m <= 0):
            raise ValueError("radius strategy needs radius_m > 0")
        if not self.symmetrize:
            raise ValueError("edges are always symmetrised")


def knn_index_edges(dist: np.ndarray, k: int) -> set[tuple[int, int]]:
    """Union of each row's ``k`` nearest columns; ties go to the lower index."""
    n = dist.shape[0]
    k = min(k, n - 1)
    idx = np.arange(n)
    edges: set[tuple[int, int]] = set()
    for i in range(n):
        order = np.lexsort((idx, dist[i]))
        picked = [int(j) for j in order if j != i][:k]
        edges.update((min(i, j), max(i, j)) for j in picked)
    return edges


def build_edges_from_coords(meta: pd.DataFrame, config: EdgeConstructionConfig) -> list[tuple[str, str]]:
    """Edge list over sensor ids; independent of the input row order."""
    if len(meta) < 2:
        raise TooFewSensors(f"need at least 2 sensors, got {len(meta)}")
    if config.strategy == "file":
        raise ValueError("the file strategy reads edges instead of constructing them")
    m = meta.assign(sensor_id=meta["sensor_id"].astype(str)).sort_values("sensor_id", kind="stable")
    ids = m["sensor_id"].tolist()
    dist = distance_matrix_km(m["lat"].to_numpy(), m["lon"].to_numpy())
    if config.strategy == "knn":
        pairs = knn_index_edges(dist, config.k)
    else:
        iu, ju = np.nonzero(np.triu(dist * 1000.0 <= config.radius_m, k=1))
        pairs = set(zip(iu.tolist(), ju.tolist()))
    return [(ids[i], ids[j]) for i, j in sorted(pairs)]


# --- loading ----------------------------------------------------------------


@dataclass
class LoadReport:
    n_readings: int = 0
    n_sensors: int = 0
    skipped_readings: int = 0
    skipped_sensors: int = 0
    reasons: Counter = field(default_factory=Counter)
    first_skipped_lines: list[int] = field(default_factory=list)

    def _skip(self, lines: np.ndarray, reason: str, which: str) -> None:
        if len(lines) == 0:
            return
        self.reasons[reason] += len(lines)
        if which == "readings":
            self.skipped_readings += len(lines)
        else:
            self.skipped_sensors += len(lines)
        self.first_skipped_lines = sorted(self.first_skipped_lines + [int(x) for x in lines[:10]])[:10]

    def summary(self) -> str:
        parts = [f"{self.n_readings} readings", f"{self.n_sensors} sensors"]
        if self.skipped_readings or self.skipped_sensors:
            why = ", ".join(f"{k}={v}" for k, v in sorted(self.reasons.items()))
            parts.append(f"skipped {self.skipped_readings} readings / {self.skipped_sensors} sensors ({why})")
        return "; ".join(parts)


@dataclass(frozen=True, eq=False)
class Dataset:
    readings: pd.DataFrame
    meta: pd.DataFrame
    graph: Graph
    report: LoadReport


def _read_rows(path: str | Path, expected: Sequence[str]) -> pd.DataFrame:
    """All cells as strings plus a ``_line`` column (1-based, header is line 1)."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyDataset(f"{path}: file is empty")
        header = [h.strip() for h in header]
        if header != list(expected):
            raise SchemaError(f"{path}: expected header {','.join(expected)}, got {','.join(header)}")
        rows, lines = [], []
        for row in reader:
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(expected):
                raise ParseError(f"{path}: expected {len(expected)} fields, got {len(row)}", reader.line_num)
            rows.append(row)
            lines.append(reader.line_num)
    df = pd.DataFrame(rows, columns=list(expected), dtype=object)
    df["_line"] = np.array(lines, dtype=np.int64)
    return df


def _drop(df: pd.DataFrame, bad: np.ndarray, reason: str, report: LoadReport, which: str, strict: bool, path) -> pd.DataFrame:
    bad = np.asarray(bad, dtype=bool)
    if not bad.any():
        return df
    lines = df["_line"].to_numpy()[bad]
    if strict:
        raise ParseError(f"{path}: {reason}", int(lines[0]))
    report._skip(lines, reason, which)
    return df.loc[~bad].reset_index(drop=True)


def _parse_sensors(path, report: LoadReport, strict: bool) -> pd.DataFrame:
    raw = _read_rows(path, SENSOR_COLUMNS)
    df = raw.copy()
    df["sensor_id"] = df["sensor_id"].str.strip()
    for col in ("lat", "lon", "pop_density", "is_highway"):
        df[col] = pd.to_numeric(df[col], errors="coerce")
    df = _drop(df, df[["lat", "lon", "pop_density", "is_highway"]].isna().any(axis=1).to_numpy(), "unparsable number", report, "sensors", strict, path)
    bad = ~df["lat"].between(-90, 90) | ~df["lon"].between(-180, 180)
    df = _drop(df, bad.to_numpy(), "coordinates out of range", report, "sensors", strict, path)
    df = _drop(df, ~df["continent"].isin(CONTINENTS).to_numpy(), "unknown continent", report, "sensors", strict, path)
    df = _drop(df, ~df["is_highway"].isin([0, 1]).to_numpy(), "is_highway not 0/1", report, "sensors", strict, path)
    df = _drop(df, (df["pop_density"] < 0).to_numpy(), "negative pop_density", report, "sensors", strict, path)
    df = _drop(df, (df["sensor_id"] == "").to_numpy(), "empty sensor_id", report, "sensors", strict, path)
    df = _drop(df, df["sensor_id"].duplicated().to_numpy(), "duplicate sensor_id", report, "sensors", strict, path)
    df["is_highway"] = df["is_highway"].astype(np.int64)
    df["lat"] = df["lat"].astype(np.float64)
    df["lon"] = df["lon"].astype(np.float64)
    df["pop_density"] = df["pop_density"].astype(np.float64)
    return df.drop(columns="_line").reset_index(drop=True)


def _parse_readings(path, known_ids: set[str], report: LoadReport, strict: bool) -> pd.DataFrame:
    df = _read_rows(path, READING_COLUMNS)
    df["sensor_id"] = df["sensor_id"].str.strip()
    ts = pd.to_datetime(df["timestamp"], utc=True, errors="coerce", format="ISO8601")
    df["timestamp"] = ts
    num = ["avg_speed", "min_speed", "max_speed", "vehicle_count"]
    for col in num:
        df[col] = pd.to_numeric(df[col], errors="coerce")
    df = _drop(df, df["timestamp"].isna().to_numpy(), "unparsable timestamp", report, "readings", strict, path)
    df = _drop(df, df[num].isna().any(axis=1).to_numpy(), "unparsable number", report, "readings", strict, path)
    t = df["timestamp"]
    aligned = (t.dt.minute == 0) & (t.dt.second == 0) & (t.dt.microsecond == 0) & (t.dt.nanosecond == 0)
    df = _drop(df, ~aligned.to_numpy(), "timestamp not hour-aligned", report, "readings", strict, path)
    df = _drop(df, (df[num] < 0).any(axis=1).to_numpy(), "negative value", report, "readings", strict, path)
    vc = df["vehicle_count"].to_numpy(dtype=np.float64)
    df = _drop(df, vc != np.floor(vc), "fractional vehicle_count", report, "readings", strict, path)
    order_bad = ~((df["min_speed"] <= df["avg_speed"]) & (df["avg_speed"] <= df["max_speed"]))
    df = _drop(df, order_bad.to_numpy(), "speed order violated", report, "readings", strict, path)
    df = _drop(df, ~df["sensor_id"].isin(known_ids).to_numpy(), "unknown sensor_id", report, "readings", strict, path)
    dup = df.duplicated(subset=["sensor_id", "timestamp"]).to_numpy()
    df = _drop(df, dup, "duplicate (sensor_id, timestamp)", report, "readings", strict, path)
    df["vehicle_count"] = df["vehicle_count"].astype(np.int64)
    for col in num[:3]:
        df[col] = df[col].astype(np.float64)
    return df.drop(columns="_line").reset_index(drop=True)


def load_sensors(path: str | Path, *, strict: bool = False) -> pd.DataFrame:
    meta = _parse_sensors(path, LoadReport(), strict)
    if meta.empty:
        raise EmptyDataset(f"{path}: no valid sensors")
    return meta


def load_dataset(
    readings_path: str | Path,
    sensors_path: str | Path,
    edges_path: str | Path | None = None,
    edge_config: EdgeConstructionConfig | None = None,
    *,
    strict: bool = False,
) -> Dataset:
    """Parse and validate the three files.

    Rows that violate a value rule are skipped and counted in the report
    (``strict=True`` raises ParseError on the first instead). Malformed CSV
    structure always raises. Without ``edges_path`` the graph is built from
    coordinates per ``edge_config`` (default knn, k=3).
    """
    edge_config = edge_config or EdgeConstructionConfig(strategy="file" if edges_path else "knn")
    report = LoadReport()
    meta = _parse_sensors(sensors_path, report, strict)
    if meta.empty:
        raise EmptyDataset(f"{sensors_path}: no valid sensors")
    readings = _parse_readings(readings_path, set(meta["sensor_id"]), report, strict)
    if readings.empty:
        raise EmptyDataset(f"{readings_path}: no valid readings")
    report.n_readings = len(readings)
    report.n_sensors = len(meta)
    ids = sorted(meta["sensor_id"])
    if edge_config.strategy == "file":
        if edges_path is None:
            raise ValueError("edge strategy 'file' needs an edges path")
        graph = build_graph(read_edge_csv(edges_path), ids)
    else:
        graph = build_graph(build_edges_from_coords(meta, edge_config), ids)
    return Dataset(readings, meta, graph, report)


# --- writing ----------------------------------------------------------------


def write_readings_csv(readings: pd.DataFrame, path: str | Path) -> None:
    df = readings.loc[:, list(READING_COLUMNS)].copy()
    df["timestamp"] = pd.to_datetime(df["timestamp"], utc=True).dt.strftime(TIMESTAMP_FORMAT)
    df.to_csv(path, index=False, lineterminator="\n")


def write_sensors_csv(meta: pd.DataFrame, path: str | Path) -> None:
    meta.loc[:, list(SENSOR_COLUMNS)].to_csv(path, index=False, lineterminator="\n")


def write_edges_csv(edges: Sequence[tuple[str, str]], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("src,dst\n")
        for a, b in edges:
            fh.write(f"{a},{b}\n")


# --- synthetic city --------------------------------------------------------

# (lat_min, lat_max, lon_min, lon_max) per continent, a strait apart
_BOXES = {"europe": (40.95, 41.25, 28.60, 29.00), "asia": (40.85, 41.15, 29.05, 29.45)}
_START = pd.Timestamp("2024-01-01T00:00:00Z")


@dataclass(frozen=True)
class SynthConfig:
    n_sensors: int = 400
    n_days: int = 90
    seed: int = 0
    congestion_rate: float = 0.25
    n_districts: int = 8
    highway_fraction: float = 0.3
    knn_k: int = 2
    n_bridges: int = 3
    europe_fraction: float = 0.55
    weekly_persistence: float = 0.8

    def __post_init__(self):
        if self.n_sensors < 4 or self.n_days < 1 or self.n_districts < 2:
            raise ValueError("need n_sensors >= 4, n_days >= 1, n_districts >= 2")
        if not 0.0 < self.congestion_rate < 1.0:
            raise ValueError("congestion_rate must lie in (0, 1)")
        if not 0.0 <= self.highway_fraction <= 1.0:
            raise ValueError("highway_fraction must lie in [0, 1]")
        if self.knn_k < 1 or self.n_bridges < 1:
            raise ValueError("knn_k and n_bridges must be >= 1")


@dataclass(frozen=True, eq=False)
class SynthDataset:
    readings: pd.DataFrame
    meta: pd.DataFrame
    edges: list[tuple[str, str]]
    graph: Graph
    config: SynthConfig

    def write(self, directory: str | Path) -> dict[str, Path]:
        out = Path(directory)
        out.mkdir(parents=True, exist_ok=True)
        paths = {"readings": out / "readings.csv", "sensors": out / "sensors.csv", "edges": out / "edges.csv"}
        write_readings_csv(self.readings, paths["readings"])
        write_sensors_csv(self.meta, paths["sensors"])
        write_edges_csv(self.edges, paths["edges"])
        return paths


def _place_sensors(cfg: SynthConfig, rng: np.random.Generator):
    n_eu = min(max(2, round(cfg.n_sensors * cfg.europe_fraction)), cfg.n_sensors - 2)
    continent = np.array(["europe"] * n_eu + ["asia"] * (cfg.n_sensors - n_eu))
    lat = np.empty(cfg.n_sensors)
    lon = np.empty(cfg.n_sensors)
    for name, (a, b, c, d) in _BOXES.items():
        m = continent == name
        lat[m] = rng.uniform(a, b, m.sum())
        lon[m] = rng.uniform(c, d, m.sum())
    return continent, np.round(lat, 6), np.round(lon, 6)


def _city_edges(continent: np.ndarray, dist: np.ndarray, cfg: SynthConfig) -> set[tuple[int, int]]:
    edges: set[tuple[int, int]] = set()
    for name in CONTINENTS:
        members = np.flatnonzero(continent == name)
        local = knn_index_edges(dist[np.ix_(members, members)], cfg.knn_k)
        edges |= {(int(members[i]), int(members[j])) for i, j in local}
        # join components inside the continent through their closest pair
        while True:
            comp = connected_components(from_index_edges(len(continent), edges))[members]
            labels = np.unique(comp)
            if len(labels) == 1:
                break
            inside = members[comp == labels[0]]
            outside = members[comp != labels[0]]
            sub = dist[np.ix_(inside, outside)]
            i, j = np.unravel_index(np.argmin(sub), sub.shape)
            a, b = int(inside[i]), int(outside[j])
            edges.add((min(a, b), max(a, b)))
    # bridges: the closest cross-strait pairs with distinct endpoints
    eu = np.flatnonzero(continent == "europe")
    asia = np.flatnonzero(continent == "asia")
    cross = dist[np.ix_(eu, asia)]
    used_a, used_b = set(), set()
    for flat in np.argsort(cross, axis=None, kind="stable"):
        i, j = np.unravel_index(flat, cross.shape)
        if i in used_a or j in used_b:
            continue
        a, b = int(eu[i]), int(asia[j])
        edges.add((min(a, b), max(a, b)))
        used_a.add(i)
        used_b.add(j)
        if len(used_a) == cfg.n_bridges:
            break
    return edges


def _hop_distance(g: Graph, sources: Sequence[int]) -> np.ndarray:
    hops = np.full(g.n_nodes, np.inf)
    frontier = list(sources)
    hops[frontier] = 0
    level = 0
    while frontier:
        level += 1
        nxt = []
        for u in frontier:
            for v in g.neighbors(u):
                if hops[v] == np.inf:
                    hops[v] = level
                    nxt.append(int(v))
        frontier = nxt
    return hops


def _smooth_on_graph(g: Graph, x: np.ndarray, rounds: int) -> np.ndarray:
    deg = g.degrees.astype(np.float64)
    rows = np.repeat(np.arange(g.n_nodes), g.degrees)
    for _ in range(rounds):
        acc = x.copy()
        np.add.at(acc, rows, x[g.indices])
        x = acc / (1.0 + deg)
    return (x - x.mean()) / (x.std() + 1e-12)


def _hour_of_week_profile() -> np.ndarray:
    how = np.arange(168)
    day, hour = how // 24, how % 24
    bump = lambda c, w: np.exp(-0.5 * ((hour - c) / w) ** 2)
    weekday = day < 5
    prof = np.where(weekday, 2.2 * bump(8.0, 1.0) + 2.6 * bump(18.0, 1.2), 1.0 * bump(14.0, 2.0))
    return prof - 1.5


def _calibrate_shift(drive: np.ndarray, sporadic: np.ndarray, target: float) -> float:
    frac = lambda s: float(np.mean((drive + s > 0) | sporadic))
    lo, hi = -20.0, 20.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if frac(mid) < target:
            lo = mid
        else:
            hi = mid
    return hi


def synth_generate(config: SynthConfig | None = None) -> SynthDataset:
    """Seeded synthetic city.

    Sensors sit in two coordinate boxes joined by ``n_bridges`` edges; each
    continent is a kNN-union graph (repaired to be connected). Congestion
    episodes follow a weekly hour-of-week schedule whose intensity depends on
    a per-node propensity (graph-smoothed noise, degree, closeness to a
    bridge, district, highway) plus noise that persists from week to week,
    with some sporadic multi-hour incidents on top. The schedule is shifted
    so the congested fraction matches ``congestion_rate`` under
    ``SYNTH_LABELING``.
    """
    cfg = config or SynthConfig()
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed & (2**64 - 1), 0x5EED]))
    n = cfg.n_sensors
    width = max(4, len(str(n)))
    ids = [f"S{i:0{width}d}" for i in range(n)]

    continent, lat, lon = _place_sensors(cfg, rng)
    dist = distance_matrix_km(lat, lon)
    index_edges = _city_edges(continent, dist, cfg)
    graph = from_index_edges(n, index_edges, ids)

    # districts: nearest of per-continent centres
    n_eu_d = max(1, round(cfg.n_districts * cfg.europe_fraction))
    centre_cont = np.array(["europe"] * n_eu_d + ["asia"] * (cfg.n_districts - n_eu_d))
    centre_lat = np.empty(cfg.n_districts)
    centre_lon = np.empty(cfg.n_districts)
    for name, (a, b, c, d) in _BOXES.items():
        m = centre_cont == name
        centre_lat[m] = rng.uniform(a, b, m.sum())
        centre_lon[m] = rng.uniform(c, d, m.sum())
    district = np.empty(n, dtype=np.int64)
    for name in CONTINENTS:
        nodes = np.flatnonzero(continent == name)
        cents = np.flatnonzero(centre_cont == name)
        if len(cents) == 0:
            cents = np.arange(cfg.n_districts)
        dd = haversine_km(lat[nodes, None], lon[nodes, None], centre_lat[None, cents], centre_lon[None, cents])
        district[nodes] = cents[np.argmin(dd, axis=1)]
    district_pop = np.round(rng.uniform(2000.0, 30000.0, cfg.n_districts), 1)
    district_effect = rng.normal(0.0, 0.4, cfg.n_districts)
    is_highway = (rng.random(n) < cfg.highway_fraction).astype(np.int64)

    deg = graph.degrees.astype(np.float64)
    bridge_nodes = sorted({i for i, j in index_edges if continent[i] != continent[j]} | {j for i, j in index_edges if continent[i] != continent[j]})
    hops = _hop_distance(graph, bridge_nodes)
    propensity = (
        1.0 * _smooth_on_graph(graph, rng.normal(size=n), rounds=3)
        + 0.3 * (deg - deg.mean()) / (deg.std() + 1e-12)
        + 0.8 * np.exp(-hops / 2.0)
        + district_effect[district]
        - 0.3 * is_highway
    )

    # weekly schedule with week-to-week persistent deviations
    n_hours = 24 * cfg.n_days
    n_weeks = math.ceil(n_hours / 168)
    node_how = rng.normal(0.0, 0.7, (n, 168))
    node_how = 0.25 * np.roll(node_how, 1, axis=1) + 0.5 * node_how + 0.25 * np.roll(node_how, -1, axis=1)
    rho = cfg.weekly_persistence
    week_dev = np.empty((n, n_weeks, 168))
    week_dev[:, 0] = rng.normal(size=(n, 168))
    for w in range(1, n_weeks):
        week_dev[:, w] = rho * week_dev[:, w - 1] + math.sqrt(1 - rho * rho) * rng.normal(size=(n, 168))
    week_dev = week_dev.reshape(n, n_weeks * 168)[:, :n_hours]
    how = np.arange(n_hours) % 168
    drive = (
        _hour_of_week_profile()[how][None, :]
        + propensity[:, None]
        + node_how[:, how]
        + 0.9 * week_dev
        + rng.normal(0.0, 0.4, (n, n_hours))
    )

    # sporadic incidents lasting 1-4 hours
    starts = rng.random((n, n_hours)) < 0.004 * np.exp(0.5 * propensity)[:, None]
    durations = rng.integers(1, 5, (n, n_hours))
    sporadic = np.zeros((n, n_hours), dtype=bool)
    for d in range(4):
        shifted = np.zeros_like(starts)
        shifted[:, d:] = (starts & (durations > d))[:, : n_hours - d]
        sporadic |= shifted
    shift = _calibrate_shift(drive, sporadic, cfg.congestion_rate)
    congested = (drive + shift > 0) | sporadic

    # speeds: free flow stays above the label threshold; congestion well below
    free_flow = np.where(is_highway == 1, rng.uniform(70.0, 95.0, n), rng.uniform(38.0, 55.0, n))
    hour = np.arange(n_hours) % 24
    daily = 1.0 - 0.12 * np.sin(2 * np.pi * (hour - 3) / 24.0)
    weekly = 1.0 + 0.05 * np.cos(2 * np.pi * np.arange(n_hours) / 168.0)
    floor = SYNTH_LABELING.speed_unit_scale * math.log(1.0 / SYNTH_LABELING.tau) + 4.0
    free = np.maximum(free_flow[:, None] * daily[None, :] * weekly[None, :] + rng.normal(0.0, 3.0, (n, n_hours)), floor)
    jam = rng.uniform(5.0, 18.0, (n, n_hours))
    avg = np.round(np.where(congested, jam, free), 2)
    min_speed = np.round(avg * rng.uniform(0.5, 0.9, (n, n_hours)), 2)
    max_speed = np.round(avg * rng.uniform(1.1, 1.5, (n, n_hours)), 2)
    base_count = np.where(is_highway == 1, 300.0, 90.0) * (district_pop[district] / 15000.0) ** 0.3
    diurnal = 0.55 + 0.45 * np.sin(np.pi * np.clip(hour - 5, 0, 18) / 18.0)
    lam = base_count[:, None] * diurnal[None, :] * np.where(congested, 1.6, 1.0)
    count = rng.poisson(lam)

    ts = _START + pd.to_timedelta(np.arange(n_hours), unit="h")
    readings = pd.DataFrame(
        {
            "sensor_id": np.repeat(ids, n_hours),
            "timestamp": np.tile(ts, n),
            "avg_speed": avg.ravel(),
            "min_speed": min_speed.ravel(),
            "max_speed": max_speed.ravel(),
            "vehicle_count": count.ravel().astype(np.int64),
        }
    )
    meta = pd.DataFrame(
        {
            "sensor_id": ids,
            "lat": lat,
            "lon": lon,
            "continent": continent,
            "district": [f"D{d + 1:02d}" for d in district],
            "is_highway": is_highway,
            "pop_density": district_pop[district],
        }
    )
    edges = [(ids[i], ids[j]) for i, j in sorted(index_edges)]
    return SynthDataset(readings, meta, edges, graph, cfg)


def synth_label_rate(ds: SynthDataset, labeling: LabelingConfig = SYNTH_LABELING) -> float:
    score, _ = density_scores(ds.readings["avg_speed"], ds.readings["vehicle_count"], labeling)
    return float(labels_from_scores(score, labeling).mean())
