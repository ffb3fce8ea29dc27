"""CLI surface: config parsing, output formats, determinism, exit codes."""

import json
import os

import pytest

from alleecoop.cli import build_parser, dump_json, fmt, load_run_config, main, parse_config_text
from alleecoop.exceptions import ConfigError

FIG_DIR = os.path.join(os.path.dirname(__file__), "..", "figures")
DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


def fig(name: str) -> str:
    return os.path.join(FIG_DIR, name)


def run(argv, capsys):
    rc = main(argv)
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


# ---------------------------------------------------------------------------
# config handling


def test_parse_config_text():
    text = "r1 = 1.5\n# comment\nk1=3  # trailing\n\nbad_keyless\n"
    with pytest.raises(ConfigError):
        parse_config_text(text)
    ok = parse_config_text("r1 = 1.5\nk1=3\n")
    assert ok == {"r1": "1.5", "k1": "3"}


def test_load_run_config_requires_all_parameters(tmp_path):
    cfg = tmp_path / "p.cfg"
    cfg.write_text("r1 = 1\nk1 = 3\n")
    with pytest.raises(ConfigError):
        load_run_config(str(cfg), [])
    rc = load_run_config(str(fig("fig2.cfg")), ["lambda=0.3"])
    assert rc.parameters.lam == 0.3  # --set overrides the file value


def test_float_formatting_round_trips():
    vals = [1 / 3, 0.26315789473684204, 1e-300, 123456.789]
    for v in vals:
        assert float(fmt(v)) == v


def test_json_writer_is_deterministic():
    payload = {"b": 1.5, "a": [1.0, 2.0], "nested": {"x": 0.1}}
    assert dump_json(payload) == dump_json(payload)


# ---------------------------------------------------------------------------
# commands


def test_simulate_csv_and_determinism(tmp_path, capsys):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    for out in (out1, out2):
        rc, _, _ = run(
            ["simulate", "--config", fig("fig4.cfg"), "--set", "t_end=50", "--out", str(out)],
            capsys,
        )
        assert rc == 0
    assert out1.read_bytes() == out2.read_bytes()
    lines = out1.read_bytes().split(b"\r\n")
    assert lines[0] == b"t,x,y"
    assert len(lines) > 10


def test_simulate_constant_at_boundary_state(tmp_path, capsys):
    out = tmp_path / "e1.csv"
    rc, _, _ = run(
        [
            "simulate",
            "--config",
            fig("fig4.cfg"),
            "--set",
            "x0=3.0",
            "--set",
            "y0=0.0",
            "--set",
            "t_end=100",
            "--out",
            str(out),
        ],
        capsys,
    )
    assert rc == 0
    lines = out.read_bytes().decode().strip().split("\r\n")
    rows = [line.split(",") for line in lines[1:]]
    assert len(rows) > 5
    for _, x, y in rows:
        assert abs(float(x) - 3.0) < 1e-8
        assert abs(float(y)) < 1e-8


def test_equilibria_rows_and_order(capsys):
    rc, out, _ = run(["equilibria", "--config", fig("fig2.cfg")], capsys)
    assert rc == 0
    lines = out.strip().split("\r\n")
    assert lines[0] == "kind,x,y,re1,im1,re2,im2,class"
    kinds = [line.split(",")[0] for line in lines[1:]]
    assert kinds[:3] == ["E0", "E2", "E1"]  # boundary first, ascending prey level
    assert all(k == "interior" for k in kinds[3:])


def test_equilibria_counts_across_scenario1(capsys):
    # weak panel: counts over s form the multiset {0, 1, 2}
    counts = {}
    for s in ("0.3", "0.73", "0.78"):
        rc, out, _ = run(
            ["equilibria", "--config", fig("fig1.cfg"), "--set", f"s={s}", "--format", "json"],
            capsys,
        )
        assert rc == 0
        records = json.loads(out)
        counts[s] = sum(1 for r in records if r["kind"] == "interior")
    assert sorted(counts.values()) == [0, 1, 2]


def test_equilibria_sweep_ordered(capsys):
    rc, out, _ = run(
        ["equilibria", "--config", fig("fig1.cfg"), "--sweep", "s=0.3:0.78:3"],
        capsys,
    )
    assert rc == 0
    lines = out.strip().split("\r\n")
    assert lines[0].startswith("sweep_index,s,kind")
    idx = [int(line.split(",")[0]) for line in lines[1:]]
    assert idx == sorted(idx)
    assert set(idx) == {0, 1, 2}


def test_portrait_bundle(tmp_path, capsys):
    out_dir = tmp_path / "bundle"
    rc, _, _ = run(
        [
            "portrait",
            "--config",
            fig("fig6.cfg"),
            "--set",
            "trajectories=2.0,1.0",
            "--out-dir",
            str(out_dir),
        ],
        capsys,
    )
    assert rc == 0
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["version"]
    assert manifest["parameters"]["lambda"] == 0.9776
    assert "rel_tol" in manifest["tolerances"]
    expected = {
        "nullcline_f1.csv",
        "nullcline_f2.csv",
        "manifold_E2_stable.csv",
        "manifold_E1_unstable.csv",
        "trajectory_000.csv",
    }
    assert set(manifest["files"]) == expected
    for name in expected:
        assert (out_dir / name).exists()
    header = (out_dir / "nullcline_f1.csv").read_bytes().split(b"\r\n")[0]
    assert header == b"x,y"


def test_portrait_nullclines_only(tmp_path, capsys):
    out_dir = tmp_path / "nc"
    rc, _, _ = run(["portrait", "--config", fig("fig1.cfg"), "--out-dir", str(out_dir)], capsys)
    assert rc == 0
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["files"] == ["nullcline_f1.csv", "nullcline_f2.csv"]


def test_portrait_rejects_non_saddle_manifold(tmp_path, capsys):
    rc, _, err = run(
        [
            "portrait",
            "--config",
            fig("fig6.cfg"),
            "--set",
            "lambda=0.2",  # E1 attracting at this attack level
            "--set",
            "manifolds=E1:unstable",
            "--out-dir",
            str(tmp_path / "x"),
        ],
        capsys,
    )
    assert rc == 3
    assert json.loads(err)["error"] == "NotSaddle"


def test_bifurcate_transcritical_json(capsys):
    rc, out, _ = run(
        ["bifurcate", "transcritical", "--at", "E1", "--config", fig("fig2.cfg")], capsys
    )
    assert rc == 0
    record = json.loads(out)
    assert record["kind"] == "transcritical"
    assert abs(record["critical_value"] - 0.26315789473684204) < 1e-8
    assert record["diagnostics"]["transcritical_ok"] is True


def test_bifurcate_hopf_bracket_flag(capsys):
    rc, out, _ = run(
        ["bifurcate", "hopf", "--bracket", "0.7", "0.8", "--config", fig("fig4.cfg")], capsys
    )
    assert rc == 0
    record = json.loads(out)
    assert 0.75 < record["critical_value"] < 0.76


def test_bifurcate_heteroclinic(capsys):
    rc, out, _ = run(
        ["bifurcate", "heteroclinic", "--bracket", "0.9773", "0.9776", "--config", fig("fig7.cfg")],
        capsys,
    )
    assert rc == 0
    record = json.loads(out)
    assert 0.9773 < record["critical_value"] < 0.9776


def test_bifurcate_gate_failure_exit_code(capsys):
    rc, _, err = run(
        ["bifurcate", "hopf", "--bracket", "0.77", "0.79", "--config", fig("fig4.cfg")], capsys
    )
    assert rc == 4
    payload = json.loads(err)
    assert payload["error"] == "BracketError"
    assert payload["message"]


def test_check_corollary_gate_names_condition(capsys):
    rc, out, _ = run(
        [
            "check",
            "corollary",
            "--config",
            fig("fig2.cfg"),  # k0 != -k1: the first gate fails by name
        ],
        capsys,
    )
    assert rc == 0  # verdict is data, not an error
    record = json.loads(out)
    assert record["verdict"] == "fail"
    assert record["checklist"]["k0_eq_minus_k1"]["ok"] is False


def test_check_trace_certificate(capsys):
    rc, out, _ = run(
        ["check", "trace", "--config", fig("fig4.cfg"), "--grid-n", "100"], capsys
    )
    assert rc == 0
    record = json.loads(out)
    assert record["verdict"] == "mixed"
    assert record["minimum"] < 0.0 < record["maximum"]
    assert "sampling certificate" in record["note"]


def test_check_extinction_fixture(capsys):
    rc, out, _ = run(
        ["check", "extinction", "--config", os.path.join(DATA_DIR, "extinction.cfg")], capsys
    )
    assert rc == 0
    record = json.loads(out)
    assert record["verdict"] == "pass"
    assert record["checklist"]["trace_all_positive"]["ok"] is True
    assert record["simulation"]["n_extinct"] == record["simulation"]["n_inits"]


def test_bad_config_exit_code(tmp_path, capsys):
    cfg = tmp_path / "broken.cfg"
    cfg.write_text("r1 = not_a_number\n")
    rc, _, err = run(["equilibria", "--config", str(cfg)], capsys)
    assert rc == 2
    assert json.loads(err)["error"] == "config_error"


def test_parser_surface():
    ap = build_parser()
    ns = ap.parse_args(["bifurcate", "saddle-node", "--bracket", "0.2", "0.23"])
    assert ns.kind == "saddle-node"
    assert ns.bracket == [0.2, 0.23]
