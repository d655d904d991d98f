import shutil
import subprocess

import numpy as np
import pytest

from trafficgraph.cli import main, parse_synth_spec, read_config_file
from trafficgraph.embeddings import read_embedding_csv
from trafficgraph.errors import ConfigError
from trafficgraph.features import FeatureTable

SYNTH = "n=40,days=9,seed=2"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    assert main(["synth", "--spec", SYNTH, "--out", str(out)]) == 0
    return out


def test_synth_writes_three_files(data_dir):
    assert sorted(p.name for p in data_dir.iterdir()) == ["edges.csv", "readings.csv", "sensors.csv"]


def test_stats_variants(capsys, data_dir):
    code, out, _ = run(capsys, "stats", "--edges", str(data_dir / "edges.csv"))
    assert code == 0
    lines = dict(line.split() for line in out.strip().split("\n"))
    assert lines["nodes"] == "40" and lines["components"] == "1"
    code, full, _ = run(capsys, "stats", "--readings", str(data_dir / "readings.csv"), "--sensors", str(data_dir / "sensors.csv"), "--edges", str(data_dir / "edges.csv"))
    assert code == 0 and full == out
    code, out, _ = run(capsys, "stats", "--sensors", str(data_dir / "sensors.csv"), "--knn-k", "1")
    assert code == 0 and "nodes 40" in out


def test_embed_and_features(capsys, data_dir, tmp_path):
    data = ["--readings", str(data_dir / "readings.csv"), "--sensors", str(data_dir / "sensors.csv"), "--edges", str(data_dir / "edges.csv")]
    emb_path = tmp_path / "glee.csv"
    code, _, err = run(capsys, "embed", *data, "--method", "glee", "--dim", "4", "--out", str(emb_path))
    assert code == 0, err
    ids, rows = read_embedding_csv(emb_path)
    assert len(ids) == 40 and rows.shape == (40, 4)
    table_path = tmp_path / "table.csv"
    code, _, err = run(capsys, "features", *data, "--embed", "glee", "--dim", "4", "--out", str(table_path))
    assert code == 0, err
    table = FeatureTable.from_csv(table_path)
    assert table.column_manifest[-4:] == ("e0", "e1", "e2", "e3")
    assert len(table) == 40 * (9 * 24 - 168)


def test_bench_smoke(capsys, tmp_path):
    code, out, err = run(capsys, "bench", "--synth", "n=50,days=14", "--embed", "glee", "--clf", "extra_trees", "--n-trees", "3")
    assert code == 0, err
    assert out.startswith("| embedding | classifier |")
    assert "| glee | extra_trees |" in out
    report = tmp_path / "r.csv"
    code, out, _ = run(capsys, "bench", "--synth", "n=50,days=14", "--embed", "none", "--clf", "knn", "--format", "csv", "--out", str(report))
    assert code == 0 and report.read_text() == out


def test_unknown_flag_exits_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bench", "--bogus"])
    assert exc.value.code == 2
    err = capsys.readouterr().err
    assert err.startswith("usage:")
    assert err.strip().split("\n")[-1].startswith("error: UsageError:")


def test_runtime_error_is_one_line(capsys, tmp_path):
    code, out, err = run(capsys, "stats", "--edges", str(tmp_path / "missing.csv"))
    assert code == 1 and out == ""
    assert len(err.strip().split("\n")) == 1 and err.startswith("error: ")
    code, _, err = run(capsys, "bench", "--synth", "n=50,days=14", "--embed", "word2vec")
    assert code == 1 and err.startswith("error: ConfigError:")
    bad = tmp_path / "r.csv"
    bad.write_text("sensor_id,timestamp,avg_speed,min_speed,max_speed,vehicle_count\ns1,2024-01-01T00:00:00Z,1\n")
    sensors = tmp_path / "s.csv"
    sensors.write_text("sensor_id,lat,lon,continent,district,is_highway,pop_density\ns1,41,29,europe,F,0,1\n")
    code, _, err = run(capsys, "stats", "--readings", str(bad), "--sensors", str(sensors))
    assert code == 1 and err.startswith("error: ParseError:") and "line 2" in err


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "bench.conf"
    cfg.write_text("# small grid\nsynth = n=50,days=14\nembed = none\nclf = logreg\nformat = csv\n")
    code, out, err = run(capsys, "--config", str(cfg), "bench")
    assert code == 0, err
    assert out.startswith("embedding,classifier,")
    assert out.split("\n")[1].startswith("none,logreg,")
    code, md, _ = run(capsys, "--config", str(cfg), "bench", "--format", "markdown")
    assert code == 0 and md.startswith("|")
    (tmp_path / "bad.conf").write_text("colour = blue\n")
    code, _, err = run(capsys, "--config", str(tmp_path / "bad.conf"), "bench")
    assert code == 1 and "unknown key" in err


def test_config_parsers(tmp_path):
    path = tmp_path / "c.conf"
    path.write_text("a = 1  # trailing\n\n# only comment\nn-trees = 5\n")
    assert read_config_file(path) == {"a": "1", "n_trees": "5"}
    path.write_text("novalue\n")
    with pytest.raises(ConfigError):
        read_config_file(path)
    spec = parse_synth_spec("n=60, days=10, seed=4, rate=0.3")
    assert (spec.n_sensors, spec.n_days, spec.seed, spec.congestion_rate) == (60, 10, 4, 0.3)
    for bad in ("n=abc", "colour=1", "rate=2"):
        with pytest.raises(ConfigError):
            parse_synth_spec(bad)


def test_oracle_quick(capsys):
    code, out, _ = run(capsys, "oracle", "--quick")
    assert code == 0
    lines = out.strip().split("\n")
    assert all(line.startswith("PASS ") for line in lines)
    assert any("walk_law" in line for line in lines) and any("auroc" in line for line in lines)


@pytest.mark.skipif(shutil.which("trafficgraph") is None, reason="console script not installed")
def test_console_script(tmp_path):
    proc = subprocess.run(["trafficgraph", "bench", "--nope"], capture_output=True, text=True)
    assert proc.returncode == 2
    proc = subprocess.run(["trafficgraph", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "bench" in proc.stdout
