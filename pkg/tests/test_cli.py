import json
import subprocess
import sys

import numpy as np
import pytest

from cfgen.cli import main
from cfgen.formats import read_sample_csv


def _write(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def _config(tmp_path, target=None, **train):
    tr = {"n": 128, "m": 128, "epochs": 50, "lr_decay_epochs": [], "hidden_widths": [16, 16], "log_every": 5}
    tr.update(train)
    doc = {
        "seed": 11,
        "output_dir": str(tmp_path / "run"),
        "target": target or {"type": "gaussian_mixture", "mus": [[0.0, 0.0]], "sigmas": [np.eye(2).tolist()]},
        "train": tr,
        "eval": {"sample_size": 2000, "mmd_sample_size": 400, "permutations": 20, "grid_resolution": 41},
    }
    return _write(tmp_path / "config.json", doc)


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("train")
    cfg = _config(tmp)
    assert main(["train", "--config", cfg]) == 0
    return tmp, cfg


def test_train_writes_three_artifacts(trained):
    tmp, _ = trained
    names = sorted(p.name for p in (tmp / "run").iterdir())
    assert names == ["checkpoint.bin", "resolved_config.json", "train_log.csv"]
    head = (tmp / "run" / "train_log.csv").read_text().splitlines()
    assert head[0].startswith("# config_hash=") and head[1].startswith("# git=")


def test_rerun_gives_identical_log(trained, tmp_path):
    tmp, cfg = trained
    assert main(["train", "--config", cfg, "--out", str(tmp_path / "again")]) == 0
    assert (tmp_path / "again" / "train_log.csv").read_bytes() == (tmp / "run" / "train_log.csv").read_bytes()


def test_resolved_config_reproduces_run(trained, tmp_path):
    tmp, _ = trained
    resolved = tmp / "run" / "resolved_config.json"
    assert main(["train", "--config", str(resolved), "--out", str(tmp_path / "re")]) == 0
    assert (tmp_path / "re" / "checkpoint.bin").read_bytes() == (tmp / "run" / "checkpoint.bin").read_bytes()
    assert (tmp_path / "re" / "train_log.csv").read_bytes() == (tmp / "run" / "train_log.csv").read_bytes()


def test_negative_bandwidth_is_config_error(tmp_path, capsys):
    cfg = _config(tmp_path, kernel={"bandwidths": [1.0, -0.5]})
    assert main(["train", "--config", cfg]) == 2
    assert "bandwidths" in capsys.readouterr().err


def test_missing_config_is_io_error(tmp_path):
    assert main(["train", "--config", str(tmp_path / "nope.json")]) == 4


def test_sample_rows_and_determinism(trained, tmp_path):
    tmp, _ = trained
    ck = str(tmp / "run" / "checkpoint.bin")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sample", "--checkpoint", ck, "--n", "10", "--seed", "4", "--out", str(a)]) == 0
    assert main(["sample", "--checkpoint", ck, "--n", "10", "--seed", "4", "--out", str(b)]) == 0
    data = [ln for ln in a.read_text().splitlines() if not ln.startswith("#")]
    assert data[0] == "x1,x2" and len(data) == 11
    assert a.read_bytes() == b.read_bytes()


def test_sample_bad_checkpoint(tmp_path):
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"\xff\xfe junk")
    assert main(["sample", "--checkpoint", str(bad), "--out", str(tmp_path / "x.csv")]) == 4


def test_eval_gaussian_mixture(trained, tmp_path):
    tmp, cfg = trained
    out = tmp_path / "ev"
    assert main(["eval", "--config", cfg, "--checkpoint", str(tmp / "run" / "checkpoint.bin"), "--out", str(out)]) == 0
    lines = (out / "quantiles.csv").read_text().splitlines()
    assert "# oracle=exact" in lines
    body = [ln for ln in lines if not ln.startswith("#")]
    assert body[0] == "u,source,q0.05,q0.1,q0.3,q0.5,q0.7,q0.9,q0.95"
    assert [ln.split(",")[1] for ln in body[1:]] == ["generator", "oracle"] * 3
    report = json.loads((out / "mmd_report.json").read_text())
    assert report["oracle"] == "exact" and "generator_vs_oracle" in report
    for name in ("generator", "oracle"):
        assert (out / f"density_{name}_x1.csv").exists()
        assert (out / f"density_{name}_x1_x2.csv").exists()
    dens = (out / "density_generator_x1.csv").read_text()
    assert "contour_levels=0.0005,0.001,0.0025,0.005,0.01,0.05,0.1" in dens


def test_eval_stable(tmp_path):
    cfg = _config(tmp_path, {"type": "stable", "alpha": 0.5, "tau": [1.0, 1.0], "M": 64}, epochs=5)
    assert main(["train", "--config", cfg]) == 0
    out = tmp_path / "ev"
    assert main(["eval", "--config", cfg, "--checkpoint", str(tmp_path / "run" / "checkpoint.bin"),
                 "--out", str(out)]) == 0
    text = (out / "quantiles.csv").read_text()
    assert "# oracle=projection" in text
    assert json.loads((out / "mmd_report.json").read_text())["oracle"] == "discrete-spectral"


def test_eval_external_without_oracle(tmp_path):
    target = {"type": "external", "plugin": "cfgen.plugin_example:product_laplace", "args": {"d": 2}}
    cfg = _config(tmp_path, target, epochs=5)
    assert main(["train", "--config", cfg]) == 0
    out = tmp_path / "ev"
    with pytest.warns(UserWarning, match="no baseline"):
        rc = main(["eval", "--config", cfg, "--checkpoint", str(tmp_path / "run" / "checkpoint.bin"),
                   "--out", str(out)])
    assert rc == 0
    assert "# oracle=none" in (out / "quantiles.csv").read_text()
    report = json.loads((out / "mmd_report.json").read_text())
    assert report["oracle"] == "none" and "generator_vs_generator" in report
    assert (out / "density_generator_x1_x2.csv").exists()


def test_point_mass_checkpoint_samples_near_target(tmp_path):
    plugin = tmp_path / "pm.py"
    plugin.write_text("from cfgen.charfn import PointMassCF\n\ndef make():\n    return PointMassCF([2.0, -1.0])\n")
    cfg = _config(tmp_path, {"type": "external", "plugin": f"{plugin}:make"}, epochs=500)
    assert main(["train", "--config", cfg]) == 0
    out = tmp_path / "s.csv"
    assert main(["sample", "--checkpoint", str(tmp_path / "run" / "checkpoint.bin"), "--n", "200",
                 "--out", str(out)]) == 0
    X = read_sample_csv(out)
    assert np.all(np.abs(X.mean(0) - [2.0, -1.0]) < 0.05)
    assert np.all(np.abs(X - [2.0, -1.0]) < 0.5)


def test_eval_dimension_mismatch(trained, tmp_path):
    tmp, _ = trained
    cfg = _config(tmp_path, {"type": "gaussian_mixture", "random": {"d": 3, "J": 2}})
    assert main(["eval", "--config", cfg, "--checkpoint", str(tmp / "run" / "checkpoint.bin")]) == 2


def test_selftest_command():
    out = subprocess.run([sys.executable, "-m", "cfgen", "selftest"], capture_output=True, text=True)
    assert out.returncode == 0, out.stdout + out.stderr
    assert out.stdout.count("[PASS]") == 4
