import json
import os

import numpy as np

from sfwlines.cli import (
    EXIT_DIMENSION,
    EXIT_IO,
    EXIT_OK,
    EXIT_PARSE,
    EXIT_USAGE,
    format_observation,
    main,
    parse_observation,
)
from sfwlines.forward import Observation
from sfwlines.kernels import GLConfig, model_to_dict

SMALL_GL = {"model": model_to_dict(GLConfig(1.0, 1.0, 10)), "lambda": 1.0,
            "noise_sigma": 0.0, "lines": [{"eta": 2.0, "theta": 0.3, "amplitude": 1.0}]}


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def test_synth_writes_files_and_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["synth", "--preset", "1", "--seed", "3", "--out", str(a)]) == EXIT_OK
    assert main(["synth", "--preset", "1", "--seed", "3", "--out", str(b)]) == EXIT_OK
    for name in ("observation.csv", "truth.json", "meta.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    obs = parse_observation((a / "observation.csv").read_text())
    assert obs.side == 65
    meta = json.loads((a / "meta.json").read_text())
    assert (meta["preset"], meta["seed"], meta["lambda"]) == (1, 3, 10.0)
    truth = json.loads((a / "truth.json").read_text())
    assert len(truth["lines"]) == 3 and truth["seed"] == 3
    assert not list(a.glob("*.part"))


def test_synth_chirp_preset_size(tmp_path):
    assert main(["synth", "--preset", "4", "--out", str(tmp_path)]) == EXIT_OK
    assert parse_observation((tmp_path / "observation.csv").read_text()).side == 256


def test_synth_unwritable_out_dir(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["synth", "--preset", "1", "--out", str(blocker / "sub")]) == EXIT_IO
    assert sorted(os.listdir(tmp_path)) == ["file"]


def test_usage_errors(tmp_path):
    assert main([]) == EXIT_USAGE
    assert main(["synth", "--out", str(tmp_path)]) == EXIT_USAGE
    assert main(["synth", "--preset", "9", "--out", str(tmp_path)]) == EXIT_USAGE
    assert main(["synth", "--preset", "1", "--seed", "-1", "--out", str(tmp_path)]) == EXIT_USAGE
    assert main(["experiment", "7", "--out", str(tmp_path)]) == EXIT_USAGE
    assert not os.listdir(tmp_path)


def test_config_layers(tmp_path):
    cfg = write_json(tmp_path / "cfg.json", SMALL_GL)
    assert main(["synth", "--config", cfg, "--seed", "8", "--out", str(tmp_path / "o")]) == EXIT_OK
    meta = json.loads((tmp_path / "o" / "meta.json").read_text())
    assert meta["seed"] == 8 and meta["model"]["M"] == 10 and meta["preset"] is None
    bad = write_json(tmp_path / "bad.json", {"lambda": 1.0})
    assert main(["synth", "--config", bad, "--out", str(tmp_path / "p")]) == EXIT_PARSE
    (tmp_path / "broken.json").write_text("{")
    assert main(["synth", "--config", str(tmp_path / "broken.json"), "--out", str(tmp_path / "q")]) == EXIT_PARSE


def test_recover_zero_image(tmp_path):
    cfg = write_json(tmp_path / "cfg.json", SMALL_GL)
    obs = tmp_path / "zero.csv"
    obs.write_text(format_observation(Observation(np.zeros(21 * 21), 21)))
    out = tmp_path / "r"
    assert main(["recover", str(obs), "--config", cfg, "--out", str(out),
                 "--dump-radon", "--dump-certificate", "--overlay"]) == EXIT_OK
    est = json.loads((out / "estimate.json").read_text())
    rep = json.loads((out / "report.json").read_text())
    assert est["lines"] == [] and rep["stop_reason"] == "optimal" and rep["iterations"] == 1
    radon = (out / "radon.csv").read_text().splitlines()
    assert radon[0].startswith("theta\\eta,")
    assert (out / "certificate.csv").exists()
    assert (out / "overlay.ppm").read_bytes().startswith(b"P6\n21 21\n255\n")


def test_recover_errors(tmp_path):
    obs = tmp_path / "o.csv"
    obs.write_text(format_observation(Observation(np.zeros(16), 4)))
    assert main(["recover", str(obs), "--preset", "1", "--out", str(tmp_path / "a")]) == EXIT_DIMENSION
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3,x\n")
    assert main(["recover", str(bad), "--preset", "1", "--out", str(tmp_path / "b")]) == EXIT_PARSE
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("1,2\n3\n")
    assert main(["recover", str(ragged), "--preset", "1", "--out", str(tmp_path / "c")]) == EXIT_PARSE
    assert main(["recover", str(tmp_path / "missing.csv"), "--preset", "1",
                 "--out", str(tmp_path / "d")]) == EXIT_IO
    assert not (tmp_path / "a").exists() and not (tmp_path / "b").exists()


def test_synth_recover_eval_pipeline(tmp_path, capsys):
    cfg = write_json(tmp_path / "cfg.json", dict(SMALL_GL, **{"lambda": 1e-3}))
    assert main(["synth", "--config", cfg, "--out", str(tmp_path / "s")]) == EXIT_OK
    assert main(["recover", str(tmp_path / "s" / "observation.csv"), "--config", cfg,
                 "--out", str(tmp_path / "r")]) == EXIT_OK
    capsys.readouterr()
    assert main(["eval", str(tmp_path / "r" / "estimate.json"), str(tmp_path / "s" / "truth.json")]) == EXIT_OK
    err = json.loads(capsys.readouterr().out)
    assert err["matched_count"] == 1 and err["est_count"] == 1
    assert err["delta_theta_bar"] <= 1e-4 and err["delta_eta_bar"] <= 1e-3
    (tmp_path / "junk.json").write_text("[1, 2]")
    assert main(["eval", str(tmp_path / "junk.json"), str(tmp_path / "s" / "truth.json")]) == EXIT_PARSE


def test_render(tmp_path):
    N = 9
    obs = tmp_path / "o.csv"
    obs.write_text(format_observation(Observation(np.zeros(N * N), N)))
    est = write_json(tmp_path / "e.json", {"lines": []})
    out = tmp_path / "img.ppm"
    assert main(["render", str(obs), est, str(out)]) == EXIT_OK
    data = out.read_bytes()
    header = f"P6\n{N} {N}\n255\n".encode()
    assert data.startswith(header) and len(data) == len(header) + 3 * N * N
    assert not any(data[len(header):])

    line = write_json(tmp_path / "l.json", {"lines": [{"eta": 0.0, "theta": 0.0, "amplitude": 1.0}],
                                            "model": model_to_dict(GLConfig(1.0, 1.0, 4))})
    assert main(["render", str(obs), line, str(out)]) == EXIT_OK
    px = np.frombuffer(out.read_bytes()[len(header):], dtype=np.uint8).reshape(N, N, 3)
    # a vertical line through the centre column is drawn in red
    assert np.all(px[:, 4] == (255, 0, 0))
    assert not px[:, :4].any()
    wrong = write_json(tmp_path / "w.json", {"lines": [{"eta": 0.0, "theta": 0.0, "amplitude": 1.0}],
                                             "model": model_to_dict(GLConfig(1.0, 1.0, 10))})
    assert main(["render", str(obs), wrong, str(out)]) == EXIT_DIMENSION


def test_observation_csv_round_trip():
    rng = np.random.default_rng(0)
    obs = Observation(rng.normal(size=49) * 10.0 ** rng.integers(-300, 300, 49), 7)
    assert parse_observation(format_observation(obs)) == obs


def test_experiment_run_and_summary(tmp_path, capsys):
    out = tmp_path / "exp"
    assert main(["experiment", "1", "--seeds", "1", "--out", str(out)]) == EXIT_OK
    text = capsys.readouterr().out
    assert "Exp. 1" in text and "dtheta" in text
    rows = (out / "summary.csv").read_text().splitlines()
    assert rows[0].startswith("seed,status,stop_reason")
    assert rows[1].startswith("0,ok,optimal,3,3,")
    assert rows[-1].startswith("median,")
    for name in ("observation.csv", "truth.json", "meta.json", "estimate.json",
                 "report.json", "errors.json"):
        assert (out / "seed_0" / name).exists()
