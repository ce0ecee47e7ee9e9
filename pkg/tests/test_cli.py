import json
from pathlib import Path

import pytest

from qpspec.cli import ConfigError, RunConfig, main


def _config(tmp_path, name="run", **over):
    raw = {
        "name": name,
        "symbols": {
            "psi1": {"expr": "i", "im_lower_bound": 0.9, "sup_bound": 1.1,
                     "class": "constant"},
            "psi2": {"expr": "2*i", "im_lower_bound": 1.9, "sup_bound": 2.1,
                     "class": "constant"},
        },
        "grids": {"frequency_extent": 8.0, "frequency_nodes": 16,
                  "boundary_extent": 20.0, "boundary_nodes": 160},
        "spectra": {"region": [-1.1, 1.1, -1.1, 1.1], "resolution": [33, 33],
                    "eps": [0.05], "sizes": [12, 16, 20]},
        "t_samples": 32,
        "seed": 0,
    }
    raw.update(over)
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(raw))
    return path


# ---------------------------------------------------------------------------
# config handling


def test_missing_config_exits_2(tmp_path, capsys):
    rc = main(["build", "--config", str(tmp_path / "nope.json"),
               "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "not found" in capsys.readouterr().err


def test_malformed_json_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    rc = main(["build", "--config", str(bad), "--out", str(tmp_path / "o")])
    assert rc == 2


def test_invalid_symbol_exits_2(tmp_path, capsys):
    cfg = _config(tmp_path)
    raw = json.loads(cfg.read_text())
    # claimed lower bound on Im psi is violated by the constant value
    raw["symbols"]["psi1"]["im_lower_bound"] = 5.0
    cfg.write_text(json.dumps(raw))
    rc = main(["build", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert rc == 2


def test_bad_sizes_flag_exits_2(tmp_path):
    cfg = _config(tmp_path)
    rc = main(["verify", "--config", str(cfg), "--out", str(tmp_path / "o"),
               "--sizes", "a,b"])
    assert rc == 2


def test_config_validation_rejects_nonpositive():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({
            "symbols": {"psi1": {"expr": "i", "im_lower_bound": 0.9,
                                 "sup_bound": 1.1},
                        "psi2": {"expr": "i", "im_lower_bound": 0.9,
                                 "sup_bound": 1.1}},
            "grids": {"frequency_nodes": -4},
        })


# ---------------------------------------------------------------------------
# predict


def test_predict_outputs(tmp_path):
    cfg = _config(tmp_path)
    out = tmp_path / "out"
    rc = main(["predict", "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    lines = (out / "spiral.csv").read_text().splitlines()
    assert lines[0].startswith("# config ")
    assert lines[1] == "re,im"
    first = [float(v) for v in lines[2].split(",")]
    assert first == pytest.approx([1.0, 0.0])  # t = 0 comes first
    svg = (out / "spiral.svg").read_text()
    assert svg.count("<polyline") >= 1
    assert "unit-circle-guide" in svg
    report = json.loads((out / "predict_report.json").read_text())
    assert report["cluster_sizes"] == [1, 1]
    assert report["config_sha256"] == lines[0].split()[-1]


# ---------------------------------------------------------------------------
# build


def test_build_outputs_and_certificate(tmp_path):
    cfg = _config(tmp_path)
    out = tmp_path / "out"
    rc = main(["build", "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    cert = json.loads((out / "plan_certificate.json").read_text())
    assert 0.0 < cert["delta"] < 1.0
    assert cert["remainder_bound"] > 0.0
    assert cert["series_direct_residual"] < 0.05
    assert cert["constant_closed_form_residual"] < 1e-10
    header = (out / "operator.csv").read_text().splitlines()[0]
    assert header.startswith("# config ")


def test_build_no_crosscheck_skips_residual(tmp_path):
    cfg = _config(tmp_path)
    out = tmp_path / "out"
    rc = main(["build", "--config", str(cfg), "--out", str(out),
               "--no-crosscheck"])
    assert rc == 0
    cert = json.loads((out / "plan_certificate.json").read_text())
    assert "series_direct_residual" not in cert


def test_build_reruns_are_byte_identical(tmp_path):
    cfg = _config(tmp_path)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["build", "--config", str(cfg), "--out", str(out1)]) == 0
    assert main(["build", "--config", str(cfg), "--out", str(out2)]) == 0
    assert (out1 / "operator.csv").read_bytes() == (out2 / "operator.csv").read_bytes()
    c1 = json.loads((out1 / "plan_certificate.json").read_text())
    c2 = json.loads((out2 / "plan_certificate.json").read_text())
    c1.pop("build_seconds")
    c2.pop("build_seconds")
    assert c1 == c2


def test_capped_order_fails_certification(tmp_path):
    cfg = _config(tmp_path, plan={"n1": 2, "n2": 2, "remainder_tol": 1e-9})
    out = tmp_path / "out"
    rc = main(["build", "--config", str(cfg), "--out", str(out)])
    assert rc == 3
    # artifacts still written for post-mortem
    assert (out / "plan_certificate.json").exists()


# ---------------------------------------------------------------------------
# spectrum / verify


def test_spectrum_outputs(tmp_path):
    cfg = _config(tmp_path)
    out = tmp_path / "out"
    rc = main(["spectrum", "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    assert (out / "sigma_min.csv").exists()
    assert (out / "level_0.05.csv").exists()
    report = json.loads((out / "spectrum_report.json").read_text())
    assert report["level_counts"][0] > 0


def test_verify_constants_pass(tmp_path, capsys):
    cfg = _config(tmp_path)
    out = tmp_path / "out"
    rc = main(["verify", "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    report = json.loads((out / "verify_report.json").read_text())
    assert report["verdict"]["verdict"] == "PASS"
    assert report["verdict"]["distance"] <= report["verdict"]["tol"]
    assert "PASS" in capsys.readouterr().out
    svg = (out / "overlay.svg").read_text()
    assert "unit-circle-guide" in svg


def test_verify_region_mismatch_fails(tmp_path):
    # lambda window far from the unit disc: surrogate comes back empty and
    # the verdict must be FAIL with exit 1, not a crash
    cfg = _config(tmp_path, spectra={
        "region": [4.0, 6.0, 4.0, 6.0], "resolution": [33, 33],
        "eps": [0.05], "sizes": [12, 16, 20],
    })
    out = tmp_path / "out"
    rc = main(["verify", "--config", str(cfg), "--out", str(out)])
    assert rc == 1
    report = json.loads((out / "verify_report.json").read_text())
    assert report["verdict"]["verdict"] == "FAIL"


def test_seed_flag_overrides_config(tmp_path):
    cfg = _config(tmp_path)
    out = tmp_path / "out"
    rc = main(["predict", "--config", str(cfg), "--out", str(out),
               "--seed", "42"])
    assert rc == 0
    report = json.loads((out / "predict_report.json").read_text())
    assert report["seed"] == 42


# ---------------------------------------------------------------------------
# demo


def test_demo_produces_reports(tmp_path):
    out = tmp_path / "demo"
    rc = main(["demo", "--out", str(out)])
    assert rc == 0
    reports = list(Path(out).glob("*/*_report.json")) + list(
        Path(out).glob("*/plan_certificate.json")
    )
    assert len(reports) >= 4
    assert (out / "constants_basic" / "verify_report.json").exists()
    assert (out / "separable_mix" / "spiral.svg").exists()
