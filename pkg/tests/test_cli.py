import json
import shutil
import subprocess
import sys

import pytest

from singular_langevin.cli import (
    BUNDLED,
    EXIT_ERROR,
    EXIT_FAIL,
    EXIT_PASS,
    ExperimentConfig,
    apply_overrides,
    load_config,
    main,
    parse_config_text,
    read_config_text,
)
from singular_langevin.errors import ConfigParse, UnknownExperiment

SMALL_DECAY = ["--set", "experiment.n_paths=16", "--set", "experiment.t_end=2.0",
               "--set", "experiment.n_times=41"]


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_configs_load_and_round_trip(name):
    cfg = load_config(name)
    again = ExperimentConfig.from_dict(json.loads(cfg.canonical_json()))
    assert again.canonical_json() == cfg.canonical_json()
    assert again.config_hash() == cfg.config_hash()


def test_hash_ignores_output_but_tracks_physics():
    a = load_config("fig3-decay-a4", out="/tmp/x")
    b = load_config("fig3-decay-a4", out="/tmp/y")
    c = load_config("fig3-decay-a4", ["langevin.gamma=2"])
    assert a.config_hash() == b.config_hash() != c.config_hash()


def test_overrides_are_dotted_and_typed():
    d = apply_overrides({"a": {"b": 1}}, ["a.b=2.5", "a.c=[1,2]", "x.y=word"])
    assert d == {"a": {"b": 2.5, "c": [1, 2]}, "x": {"y": "word"}}
    with pytest.raises(ConfigParse):
        apply_overrides({}, ["novalue"])


def test_missing_potential_names_the_field(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"experiment": {"kind": "levelsets"}}))
    with pytest.raises(ConfigParse, match="potential"):
        load_config(str(p))
    assert main(["run", str(p)]) == EXIT_ERROR


def test_dynamic_kind_requires_langevin_block():
    d = json.loads(read_config_text("fig3-decay-a4"))
    del d["langevin"]
    with pytest.raises(ConfigParse, match="langevin"):
        ExperimentConfig.from_dict(d)


def test_json_syntax_error_reports_position():
    with pytest.raises(ConfigParse, match=r"line 2, column \d+"):
        parse_config_text('{\n  "a": ,\n}')


def test_unknown_kind_and_missing_file(capsys):
    with pytest.raises(UnknownExperiment):
        load_config("fig1-levelsets", ["experiment.kind=bogus"])
    assert main(["run", "fig1-levelsets", "--set", "experiment.kind=bogus"]) == EXIT_ERROR
    assert main(["run", "/nonexistent/config.json"]) == EXIT_ERROR
    assert "error:" in capsys.readouterr().err


def test_unwritable_output_is_an_error(capsys):
    assert main(["run", "fig1-levelsets", "--out", "/proc/no-such-dir"]) == EXIT_ERROR
    assert "OutputUnwritable" in capsys.readouterr().err


def test_levelsets_run_writes_reports(tmp_path, capsys):
    assert main(["run", "fig1-levelsets", "--out", str(tmp_path)]) == EXIT_PASS
    line = capsys.readouterr().out
    assert "PASS" in line and "max_error" in line
    rep = json.loads((tmp_path / "fig1-levelsets.json").read_text())
    assert rep["passed"] and rep["kind"] == "levelsets" and len(rep["config_hash"]) == 16
    assert (tmp_path / "fig1-levelsets.csv").read_text().startswith("# seed=20240601 config_hash=")


def test_failing_check_exits_two(tmp_path):
    # a deliberately wrong expected turning point
    args = ["run", "fig1-levelsets", "--out", str(tmp_path),
            "--set", 'experiment.expected=[{"lambda":1.0,"eta":1.0,"q_minus":0.5,"q_plus":0.97245}]']
    assert main(args) == EXIT_FAIL


def test_decay_run_is_byte_reproducible_and_echoes_overrides(tmp_path):
    outs = []
    for sub in ("a", "b"):
        d = tmp_path / sub
        rc = main(["run", "fig3-decay-a4", "--out", str(d), "--seed", "5",
                   "--set", "langevin.gamma=2"] + SMALL_DECAY)
        assert rc in (EXIT_PASS, EXIT_FAIL)
        outs.append(d)
    a, b = ((d / "fig3-decay-a4.csv").read_bytes() for d in outs)
    assert a == b
    rep = json.loads((outs[0] / "fig3-decay-a4.json").read_text())
    assert rep["config"]["langevin"]["gamma"] == 2 and rep["seed"] == 5
    overlay = (outs[0] / "fig3-decay-a4.overlay.dat").read_text().splitlines()
    data = [ln.split() for ln in overlay if not ln.startswith("#")]
    assert data and all(len(r) == 3 for r in data)


def test_tabulate_lambda_subcommand(tmp_path):
    assert main(["tabulate-lambda", "fig3-decay-a4", "--out", str(tmp_path)]) == EXIT_PASS
    csv_lines = (tmp_path / "fig3-decay-a4-tabulate-lambda.csv").read_text().splitlines()
    assert csv_lines[1] == "eta,lambda_of_eta,period,A_P2"
    assert not (tmp_path / "fig3-decay-a4.csv").exists()


def test_certify_subcommand_reports_constants(tmp_path):
    args = ["certify", "fig3-decay-a4", "--out", str(tmp_path), "--set", "experiment.n_levels=10",
            "--set", "experiment.n_angles=12", "--set", "experiment.h_max=1e4"]
    assert main(args) in (EXIT_PASS, EXIT_FAIL)
    res = json.loads((tmp_path / "fig3-decay-a4-certify.json").read_text())["results"]
    assert {"delta", "C", "delta_H", "C_H", "grid", "worst_point", "valid"} <= set(res)


def test_list_configs(capsys):
    assert main(["list-configs"]) == EXIT_PASS
    assert capsys.readouterr().out.split() == list(BUNDLED)


@pytest.mark.skipif(shutil.which("singular-langevin") is None, reason="console script not installed")
def test_console_script_exit_codes(tmp_path):
    ok = subprocess.run(["singular-langevin", "run", "fig1-levelsets", "--out", str(tmp_path)],
                        capture_output=True, text=True)
    assert ok.returncode == EXIT_PASS, ok.stderr
    bad = subprocess.run([sys.executable, "-m", "singular_langevin.cli", "run", "nope.json"],
                         capture_output=True, text=True)
    assert bad.returncode == EXIT_ERROR
