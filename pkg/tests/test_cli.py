import csv
import json

import numpy as np
import pytest

from liouvep.cli import main


def _read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def _read_json(path):
    with open(path) as fh:
        return json.load(fh)


@pytest.fixture(autouse=True)
def _outdir(tmp_path, monkeypatch):
    monkeypatch.setenv("LIOUVEP_OUTDIR", str(tmp_path))
    return tmp_path


def test_spectrum_command(_outdir):
    rc = main(
        [
            "spectrum",
            "--model", "example1",
            "--q", "1.0",
            "--sweep-min", "0.0",
            "--sweep-max", "3.0",
            "--sweep-steps", "301",
            "--out", "sweep.csv",
        ]
    )
    assert rc == 0
    rows = _read_csv(_outdir / "sweep.csv")
    assert len(rows) == 301 * 4
    assert list(rows[0]) == ["param", "q", "branch", "re_lambda", "im_lambda", "residual"]
    # the tracked pair collides at gamma = omega
    by_param = {}
    for r in rows:
        by_param.setdefault(float(r["param"]), []).append(
            complex(float(r["re_lambda"]), float(r["im_lambda"]))
        )
    def min_gap(vals):
        return min(
            abs(a - b) for i, a in enumerate(vals) for b in vals[i + 1 :]
        )
    # skip the unitary corner gamma ~ 0, where the two zero modes are exactly
    # degenerate without any eigenmatrix coalescence
    params = [p for p in sorted(by_param) if p >= 0.5]
    gaps = [min_gap(by_param[p]) for p in params]
    assert params[int(np.argmin(gaps))] == pytest.approx(1.0, abs=0.011)
    manifest = _read_json(_outdir / "sweep.csv.manifest.json")
    assert manifest["command"] == "spectrum"
    assert manifest["output_files"] == ["sweep.csv"]
    assert "parameters" in manifest and manifest["parameters"]["sweep_steps"] == 301


def test_spectrum_single_step_dump(_outdir):
    rc = main(
        [
            "spectrum", "--model", "example2", "--q", "0.0",
            "--sweep-min", "2.0", "--sweep-max", "2.0", "--sweep-steps", "1",
            "--out", "single.csv",
        ]
    )
    assert rc == 0
    assert len(_read_csv(_outdir / "single.csv")) == 4


def test_ep_command_found(_outdir):
    rc = main(
        [
            "ep", "--model", "example1", "--q", "0.5",
            "--sweep-min", "1.0", "--sweep-max", "3.0", "--out", "ep.json",
        ]
    )
    assert rc == 0
    report = _read_json(_outdir / "ep.json")
    assert report["found"] is True
    assert report["param_value"] == pytest.approx(2.0, rel=1e-6)
    assert report["order"] == 2
    assert set(report) == {"found", "param_value", "eigenvalue", "order", "gap", "overlap", "branches"}


def test_ep_command_not_found_is_success(_outdir):
    rc = main(
        [
            "ep", "--model", "example1", "--q", "0.0",
            "--sweep-min", "0.5", "--sweep-max", "10.0", "--out", "noep.json",
        ]
    )
    assert rc == 0
    assert _read_json(_outdir / "noep.json")["found"] is False


def test_evolve_command(_outdir):
    rc = main(
        [
            "evolve", "--model", "example1", "--gamma", "1.0", "--q", "1.0",
            "--theta", "1.0", "--phi", "0.5", "--t-max", "30.0",
            "--samples", "31", "--out", "ev.csv",
        ]
    )
    assert rc == 0
    rows = _read_csv(_outdir / "ev.csv")
    assert list(rows[0]) == ["t", "sx", "sy", "sz", "raw_trace"]
    assert len(rows) == 31
    last = rows[-1]
    for key in ("sx", "sy", "sz"):
        assert abs(float(last[key])) < 1e-6  # steady state I/2
    assert float(last["raw_trace"]) == pytest.approx(1.0, abs=1e-10)


def test_evolve_tmax_zero_gives_initial_expectations(_outdir):
    theta = 1.1
    rc = main(
        [
            "evolve", "--model", "example1", "--gamma", "0.5", "--q", "0.3",
            "--theta", str(theta), "--t-max", "0.0", "--samples", "3",
            "--out", "init.csv",
        ]
    )
    assert rc == 0
    rows = _read_csv(_outdir / "init.csv")
    for r in rows:
        assert float(r["sz"]) == pytest.approx(np.cos(theta), abs=1e-12)


def test_trajectories_command_with_events(_outdir):
    rc = main(
        [
            "trajectories", "--model", "example1", "--gamma", "0.5", "--q", "0.5",
            "--theta", "0.9", "--phi", "0.3", "--n-traj", "200", "--seed", "5",
            "--t-max", "3.0", "--samples", "10",
            "--out", "traj.csv", "--events", "events.csv",
        ]
    )
    assert rc == 0
    rows = _read_csv(_outdir / "traj.csv")
    assert list(rows[0]) == ["t", "obs", "mean", "sem", "n_accepted", "n_total"]
    assert {r["obs"] for r in rows} == {"sx", "sy", "sz"}
    assert len(rows) == 3 * 10
    manifest = _read_json(_outdir / "traj.csv.manifest.json")
    acc = manifest["acceptance"]
    assert acc["total"] == 200 and 0 < acc["accepted"] <= 200
    events = _read_csv(_outdir / "events.csv")
    assert list(events[0]) == ["traj_id", "t_jump", "channel", "detector"]
    assert {r["detector"] for r in events} <= {"1", "2"}


def test_trajectories_eta_variant(_outdir):
    rc = main(
        [
            "trajectories", "--model", "example1", "--gamma", "0.5", "--eta", "0.5",
            "--n-traj", "100", "--seed", "2", "--t-max", "2.0", "--samples", "5",
            "--out", "eta.csv",
        ]
    )
    assert rc == 0
    assert len(_read_csv(_outdir / "eta.csv")) == 15


def test_trajectories_requires_exactly_one_protocol(_outdir):
    rc = main(
        [
            "trajectories", "--model", "example1", "--gamma", "0.5",
            "--q", "0.5", "--eta", "0.5", "--out", "x.csv",
        ]
    )
    assert rc == 1


def test_trajectories_empty_postselection_reported(_outdir):
    # gamma large and q = 0 makes zero-jump trajectories overwhelmingly rare
    rc = main(
        [
            "trajectories", "--model", "example1", "--gamma", "4.0", "--q", "0.0",
            "--n-traj", "50", "--seed", "3", "--t-max", "5.0", "--samples", "5",
            "--out", "empty.csv",
        ]
    )
    assert rc == 0
    manifest = _read_json(_outdir / "empty.csv.manifest.json")
    assert manifest["acceptance"]["accepted"] == 0
    rows = _read_csv(_outdir / "empty.csv")
    assert all(r["mean"] == "nan" for r in rows)


def test_rerun_reproduces_outputs_byte_identically(_outdir):
    args = [
        "trajectories", "--model", "example1", "--gamma", "0.5", "--q", "0.25",
        "--n-traj", "150", "--seed", "9", "--t-max", "2.0", "--samples", "7",
    ]
    assert main(args + ["--out", "a.csv"]) == 0
    assert main(args + ["--out", "b.csv"]) == 0
    assert (_outdir / "a.csv").read_bytes() == (_outdir / "b.csv").read_bytes()
    ma = _read_json(_outdir / "a.csv.manifest.json")
    mb = _read_json(_outdir / "b.csv.manifest.json")
    for m in (ma, mb):
        m.pop("timestamps")
        m["parameters"].pop("out")
        m["output_files"] = None
    assert ma == mb


def test_verify_command(_outdir):
    rc = main(["verify", "--model", "example1", "--samples", "5", "--seed", "1", "--out", "v.json"])
    assert rc == 0
    report = _read_json(_outdir / "v.json")
    assert report["reports"][0]["passed"] is True
    deviations = _read_json(_outdir / "v.deviations.json")
    assert isinstance(deviations, list)
    # the tabulated corner formula deviates away from q = 1 and must be logged
    assert any(d["quantity"] == "hybrid-eigenmatrix-corner" for d in deviations)


def test_model_json_file_input(_outdir, tmp_path):
    doc = {"preset": "example1", "omega": 1.0, "gamma": 0.5}
    path = tmp_path / "model.json"
    path.write_text(json.dumps(doc))
    rc = main(
        [
            "evolve", "--model", str(path), "--gamma", "0.5", "--q", "1.0",
            "--t-max", "1.0", "--samples", "5", "--out", "fromjson.csv",
        ]
    )
    assert rc == 0
    assert len(_read_csv(_outdir / "fromjson.csv")) == 5


def test_plot_flag_writes_figure(_outdir):
    pytest.importorskip("matplotlib")
    rc = main(
        [
            "spectrum", "--model", "example1", "--q", "1.0",
            "--sweep-min", "0.5", "--sweep-max", "1.5", "--sweep-steps", "11",
            "--out", "plot.csv", "--plot",
        ]
    )
    assert rc == 0
    assert (_outdir / "plot.svg").exists()