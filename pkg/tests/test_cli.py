"""Command-line pipeline: determinism, exit codes, file handling."""

import json
from pathlib import Path

import pytest

from fareyquot.cli import (
    RunConfig,
    cmd_constants,
    cmd_reduce,
    cmd_residual,
    cmd_suite,
    derive_kmin,
    main,
    render_report,
    stringify_numbers,
)

SMALL = dict(theta_bound=6, bgit_bound=5, axiom_bound=6, contract_bound=8,
             quadruple_bound=5, control_bound=6, displacement_samples=200,
             ball_radius=4, farey_box=10, thin_triangles=15,
             lift_triangles=5, lift_quads=2, words=15, word_slope_bound=6,
             stab_syllables=2, horizon=6, n_max=2)


def small_config(**kw):
    return RunConfig(**{**SMALL, **kw})


def test_stringify_numbers():
    out = stringify_numbers({"a": 3, "b": [1, None, True], "c": {"d": -2}})
    assert out == {"a": "3", "b": ["1", None, True], "c": {"d": "-2"}}


def test_config_file_round_trip(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nK = 8\nseed=3\nsurface=1,1\n")
    config = RunConfig.from_file(str(cfg))
    assert config.K == 8 and config.seed == 3 and config.surface == "1,1"
    cfg.write_text("nope=1\n")
    with pytest.raises(ValueError):
        RunConfig.from_file(str(cfg))


def test_constants_report_shape():
    payload = cmd_constants(small_config())
    assert payload["ledger"]["theta"] == "2"
    assert payload["ledger"]["least_admissible_K"] == "402"
    assert payload["warnings"]  # K = 7 fails the paper thresholds


def test_theta_override():
    payload = cmd_constants(small_config(theta_override=0))
    assert payload["ledger"]["Theta"] == "1"
    assert payload["ledger"]["kappa"] == "0"
    assert payload["ledger"]["Theta0"] == "2"


def test_residual_rows():
    payload = cmd_residual(small_config(kmin_lo=6, kmin_hi=9))
    rows = {int(r["K"]): r for r in payload["rows"]}
    assert rows[7]["all_survive"]
    assert payload["least_K_all_survive"] in (6, 7)
    ident = cmd_residual(small_config(kmin_lo=7, kmin_hi=8),
                         matrices=[(1, 0, 0, 1)])
    assert ident["least_K_all_survive"] is None  # identity never survives


def test_reduce_report():
    payload = cmd_reduce(small_config(words=10))
    assert payload["stalls"] == 0
    assert payload["trivial"] == payload["words"] == 10


def test_kmin_derivation():
    out = derive_kmin(small_config(kmin_lo=5, kmin_hi=8))
    assert out["K_min"] == 7
    sweep = {int(r["K"]): r for r in out["sweep"]}
    assert sweep[6]["delta_probe"] > sweep[6]["delta_base"]  # flat quotient


def test_suite_determinism(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    cfg1 = small_config(out=str(out1), seed=42)
    cfg2 = small_config(out=str(out2), seed=42)
    summary1, code1 = cmd_suite(cfg1)
    summary2, code2 = cmd_suite(cfg2)
    assert code1 == code2 == 0
    for name in ("summary", "constants", "reduce", "thin", "lift"):
        a = (out1 / f"{name}.json").read_bytes()
        b = (out2 / f"{name}.json").read_bytes()
        assert a == b, f"{name} reports differ"
    # a different seed changes at least the sampled suites
    cfg3 = small_config(out=str(tmp_path / "c"), seed=43)
    cmd_suite(cfg3)
    assert (out1 / "reduce.json").read_bytes() != \
        (tmp_path / "c" / "reduce.json").read_bytes()


def test_suite_summary_statuses(tmp_path):
    config = small_config(out=str(tmp_path / "r"), seed=1)
    summary, code = cmd_suite(config)
    assert code == 0
    assert summary["failures"] == 0
    for name, entry in summary["suites"].items():
        assert entry["status"] == "pass", (name, entry)
    assert (Path(tmp_path) / "r" / "timings.txt").exists()
    # timings never leak into the JSON reports
    blob = (Path(tmp_path) / "r" / "summary.json").read_text()
    assert "timing" not in blob


def test_main_subcommands(tmp_path, capsys):
    assert main(["--json", "--seed", "0", "isom", "--x", "1/0",
                 "--y", "2/1"]) == 0
    out = capsys.readouterr().out
    data = json.loads(out)
    assert data["isometric"] is True

    assert main(["--json", "survive", "--gamma", "1,1,0,1"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data.get("bounded_orbit") is True


def test_main_ball_export_and_corrupt_load(tmp_path, capsys):
    outdir = tmp_path / "ball"
    assert main(["--out", str(outdir), "--K", "7", "ball"]) == 0
    binfile = outdir / "ball_K7_R5.bin"
    assert binfile.exists()
    # structured error on a corrupted file, no traceback
    binfile.write_bytes(binfile.read_bytes()[:40])
    code = main(["--json", "thin", "--ball", str(binfile)])
    data = json.loads(capsys.readouterr().out)
    assert code == 1 and "error" in data


def test_replay_round_trip(tmp_path, capsys):
    config = small_config(out=str(tmp_path / "rr"), seed=7, words=5)
    payload = cmd_reduce(config)
    trace = payload["traces"][0]
    tf = tmp_path / "trace.json"
    tf.write_text(json.dumps(trace))
    assert main(["--json", "replay", str(tf)]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["holds"] is True
    # a tampered trace fails verification
    bad = dict(trace)
    if bad["steps"]:
        bad["steps"] = [dict(bad["steps"][0],
                             measure_before=[9, 9, 9])] + bad["steps"][1:]
        tf.write_text(json.dumps(bad))
        code = main(["--json", "replay", str(tf)])
        data = json.loads(capsys.readouterr().out)
        assert data["holds"] is False and code == 1


def test_render_report_sorted():
    text = render_report({"b": 2, "a": 1})
    assert text.index('"a"') < text.index('"b"')
