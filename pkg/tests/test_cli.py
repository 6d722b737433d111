"""End-to-end command-line behavior: outputs, metadata, exit codes."""

import json

import numpy as np
import pytest

from confres import __version__
from confres.cli import main


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    rng = np.random.default_rng(0)
    root = tmp_path_factory.mktemp("cli")
    pts = np.concatenate([rng.normal(0, 1, (40, 2)),
                          rng.normal(9, 1, (40, 2))])
    np.savetxt(root / "points.csv", pts, delimiter=",")
    np.savetxt(root / "truth.csv", np.repeat([0, 1], 40), fmt="%d")
    return root


def test_cluster_writes_partition(data_dir, tmp_path):
    out = tmp_path / "part.json"
    code = main(["cluster", "--input", str(data_dir / "points.csv"),
                 "--k", "8", "--gamma", "1.0", "--seed", "0",
                 "--out", str(out)])
    assert code == 0
    data = json.loads(out.read_text())
    assert len(data["labels"]) == 80
    meta = data["metadata"]
    assert meta["version"] == __version__
    assert meta["seed"] == 0
    assert len(meta["input_hashes"]["input"]) == 64
    assert data["energy"]["total"] == pytest.approx(
        data["energy"]["h_a"] + data["energy"]["gamma"] * data["energy"]["h_r"])


def test_cluster_deterministic_bytes(data_dir, tmp_path):
    args = ["cluster", "--input", str(data_dir / "points.csv"),
            "--k", "8", "--gamma", "1.0", "--seed", "7"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_cluster_missing_input(tmp_path):
    code = main(["cluster", "--input", str(tmp_path / "nope.csv"),
                 "--out", str(tmp_path / "o.json")])
    assert code == 2


def test_sweep_plateaus_tile(data_dir, tmp_path):
    out = tmp_path / "cfg.json"
    land = tmp_path / "landscape.csv"
    code = main(["sweep", "--input", str(data_dir / "points.csv"),
                 "--k", "8", "--gamma-max", "3.0",
                 "--out", str(out), "--landscape", str(land)])
    assert code == 0
    data = json.loads(out.read_text())
    plateaus = data["plateaus"]
    assert len(plateaus) >= 2
    assert plateaus[0]["lo"] == 0.0
    assert plateaus[-1]["hi"] == 3.0
    for prev, cur in zip(plateaus, plateaus[1:]):
        assert prev["hi"] == cur["lo"]
    assert any(p["k"] == 2 for p in plateaus)
    assert land.read_text().startswith("id,h_a,h_r,lo,hi")


def test_sweep_bad_gamma_max(data_dir, tmp_path):
    code = main(["sweep", "--input", str(data_dir / "points.csv"),
                 "--gamma-max", "-1", "--out", str(tmp_path / "o.json")])
    assert code == 2


def test_eval_perfect_prediction(data_dir, tmp_path):
    part = tmp_path / "pred.json"
    part.write_text(json.dumps({"labels": [0] * 40 + [1] * 40}))
    out = tmp_path / "metrics.json"
    svg = tmp_path / "mosaic.svg"
    code = main(["eval", "--pred", str(part),
                 "--truth", str(data_dir / "truth.csv"),
                 "--mosaic", str(svg), "--out", str(out)])
    assert code == 0
    metrics = json.loads(out.read_text())
    assert metrics["ari"] == 1.0
    assert metrics["accuracy"] == 1.0
    assert set(metrics) >= {"ari", "nmi", "v", "accuracy", "auc"}
    assert svg.read_text().startswith("<?xml")


def test_eval_align_none_same_ari(data_dir, tmp_path):
    part = tmp_path / "pred.json"
    rng = np.random.default_rng(1)
    part.write_text(json.dumps({"labels": rng.integers(0, 3, 80).tolist()}))
    outs = {}
    for align in ("rms", "none"):
        out = tmp_path / f"m_{align}.json"
        assert main(["eval", "--pred", str(part),
                     "--truth", str(data_dir / "truth.csv"),
                     "--align", align, "--out", str(out)]) == 0
        outs[align] = json.loads(out.read_text())
    assert outs["rms"]["ari"] == outs["none"]["ari"]
    assert outs["rms"]["nmi"] == outs["none"]["nmi"]
    assert outs["none"]["accuracy"] is None


def test_eval_malformed_truth(data_dir, tmp_path):
    part = tmp_path / "pred.json"
    part.write_text(json.dumps({"labels": [0, 1]}))
    bad = tmp_path / "bad.csv"
    bad.write_text("x\ny\n")
    code = main(["eval", "--pred", str(part), "--truth", str(bad),
                 "--out", str(tmp_path / "o.json")])
    assert code == 2


def test_config_file_defaults_and_flag_override(data_dir, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("k = 8\ngamma = 0.5\n# comment\n")
    out = tmp_path / "part.json"
    code = main(["cluster", "--input", str(data_dir / "points.csv"),
                 "--config", str(cfg), "--gamma", "1.5",
                 "--out", str(out)])
    assert code == 0
    params = json.loads(out.read_text())["metadata"]["params"]
    assert params["k"] == 8        # from the file
    assert params["gamma"] == 1.5  # flag wins


def test_experiment_novelty_fraction_zero(tmp_path):
    code = main(["experiment", "novelty", "--fraction", "0",
                 "--out", str(tmp_path / "r.json")])
    assert code == 2


def test_experiment_evolve_beats_kmeans(tmp_path):
    out = tmp_path / "r.json"
    assert main(["experiment", "evolve", "--out", str(out)]) == 0
    series = json.loads(out.read_text())["report"]["inverse_ari"]
    assert (np.mean(series["configurations"]) < np.mean(series["kmeans"]))
