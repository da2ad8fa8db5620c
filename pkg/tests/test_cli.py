import csv
import json
from pathlib import Path

import numpy as np
import pytest

from opgp.cli import main
from opgp.config import read_config_data

FIG2 = Path(__file__).parents[1] / "src" / "opgp" / "data" / "fig2.toml"


def _read(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def _write_json(tmp_path, data):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(data))
    return path


@pytest.fixture(scope="module")
def fig2_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("fig2")
    assert main(["run", str(FIG2), "--out-dir", str(out)]) == 0
    return out


def test_run_writes_checkpoints(fig2_run):
    names = sorted(p.name for p in fig2_run.glob("posterior_batch*.csv"))
    assert names == [f"posterior_batch{i}.csv" for i in (1, 2, 3, 4)]
    report = json.loads((fig2_run / "report.json").read_text())
    assert report["status"] == "PASSED"
    assert max(cp["max_fiber"] for cp in report["checkpoints"]) <= 1e-8
    header, data = _read(fig2_run / "posterior_batch1.csv")
    assert header == ["s", "mean", "sd", "prior_sd"]
    assert data.shape == (401, 4)


def test_checkpoint_bands_shrink(fig2_run):
    sds = [_read(fig2_run / f"posterior_batch{i}.csv")[1][:, 2] for i in (1, 2, 3, 4)]
    prior = _read(fig2_run / "posterior_batch1.csv")[1][:, 3]
    for before, after in zip([prior] + sds[:-1], sds):
        assert np.all(after <= before + 1e-5)


def test_run_is_deterministic(fig2_run, tmp_path):
    assert main(["run", str(FIG2), "--out-dir", str(tmp_path)]) == 0
    for i in (1, 2, 3, 4):
        name = f"posterior_batch{i}.csv"
        assert (tmp_path / name).read_bytes() == (fig2_run / name).read_bytes()


def test_json_encoding_matches_toml(fig2_run, tmp_path):
    path = _write_json(tmp_path, read_config_data(FIG2))
    assert main(["run", str(path), "--out-dir", str(tmp_path / "out")]) == 0
    name = "posterior_batch4.csv"
    assert (tmp_path / "out" / name).read_bytes() == (fig2_run / name).read_bytes()


def test_no_observations(tmp_path):
    data = read_config_data(FIG2)
    data["batches"] = []
    assert main(["run", str(_write_json(tmp_path, data)), "--out-dir", str(tmp_path)]) == 0
    _, table = _read(tmp_path / "posterior_batch0.csv")
    assert np.array_equal(table[:, 2], table[:, 3])
    assert np.all(table[:, 1] == 0)


def test_duplicate_observation_fails(tmp_path, capsys):
    data = read_config_data(FIG2)
    data["batches"].append({"observations": [{"kind": "point", "site": 0.15}]})
    code = main(["run", str(_write_json(tmp_path, data)), "--out-dir", str(tmp_path)])
    assert code == 3
    assert "RedundantBatch" in capsys.readouterr().err
    assert json.loads((tmp_path / "report.json").read_text())["status"] == "FAILED"


@pytest.mark.parametrize("mutate", [
    lambda d: d["kernel"].update(family="rational"),
    lambda d: d["kernel"].update(lengthscale=-1.0),
    lambda d: d.update(domain=[1.0, -1.0]),
    lambda d: d["batches"][0]["observations"][0].update(site=3.0),
    lambda d: d.pop("kernel"),
])
def test_config_errors(tmp_path, mutate, capsys):
    data = read_config_data(FIG2)
    mutate(data)
    assert main(["run", str(_write_json(tmp_path, data)), "--out-dir", str(tmp_path)]) == 2
    assert "config error" in capsys.readouterr().err


def test_missing_config(tmp_path):
    assert main(["run", str(tmp_path / "absent.toml"), "--out-dir", str(tmp_path)]) == 2


def test_verify(tmp_path, capsys):
    assert main(["verify", str(FIG2), "--out-dir", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "status: PASSED" in out
    assert "FAIL " not in out


def test_sample_prior(tmp_path):
    args = ["sample-prior", str(FIG2), "--count", "3", "--seed", "7", "--out-dir", str(tmp_path)]
    assert main(args) == 0
    first = (tmp_path / "prior_samples.csv").read_bytes()
    header, data = _read(tmp_path / "prior_samples.csv")
    assert header == ["s", "sample_0", "sample_1", "sample_2"]
    assert data.shape == (401, 4)
    assert main(args) == 0
    assert (tmp_path / "prior_samples.csv").read_bytes() == first


def test_spectrum(tmp_path, capsys):
    assert main(["spectrum", str(FIG2), "--theta", "0.5", "--n", "64", "--out-dir", str(tmp_path)]) == 0
    meta = json.loads((tmp_path / "spectrum.json").read_text())
    assert meta["measure"] == "uniform" and meta["grid_size"] == 64
    _, table = _read(tmp_path / "spectrum.csv")
    assert table.shape == (64, 4)
    assert "verdict=" in capsys.readouterr().out


def test_out_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("OPGP_OUT_DIR", str(tmp_path / "env"))
    assert main(["sample-prior", str(FIG2), "--count", "1"]) == 0
    assert (tmp_path / "env" / "prior_samples.csv").exists()


def test_flags_override_config(tmp_path):
    assert main(["run", str(FIG2), "--out-dir", str(tmp_path), "--quad-order", "50",
                 "--tolerance", "1e-6"]) == 0
    meta = json.loads((tmp_path / "report.json").read_text())["metadata"]
    assert meta["quad_order"] == 50 and meta["tolerance"] == 1e-6


def test_strict_tolerance_fails_checks(tmp_path):
    assert main(["run", str(FIG2), "--out-dir", str(tmp_path), "--tolerance", "1e-30"]) == 1
