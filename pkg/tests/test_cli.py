import csv
import io
import json
import math
import subprocess
import sys

import pytest

from entangle_verify.cli import (
    CONFIG_KEYS,
    EXIT_FAIL,
    EXIT_PASS,
    EXIT_USAGE,
    UsageError,
    build_parser,
    main,
    parse_config,
)


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# parse_config


def test_defaults_are_natural_units():
    config = parse_config()
    assert (config.m1, config.m2, config.hbar, config.omega) == (2.0, 2.0, 1.0, 1.0)
    assert config.params.m_r == 1.0
    assert config.l == (0, 0, 0)
    assert (config.h, config.extent, config.order) == (0.05, 8.0, 4)
    assert config.suite == "oscillator-core"


def test_flags_override_file():
    config = parse_config("l=1,0,0\nh=0.1  # coarse\n", {"l": "2,0,0"})
    assert config.l == (2, 0, 0)
    assert config.h == 0.1


@pytest.mark.parametrize("text, flags", [
    ("frobnicate=1", {}),
    ("", {"frobnicate": "1"}),
    ("h=abc", {}),
    ("l=1,2", {}),
    ("order=3", {}),
    ("m1=-2", {}),
    ("just words", {}),
    ("potential=file", {}),
    ("potential_file=v.csv", {}),
    ("potential=quartic", {}),
    ("h=0.03", {}),
])
def test_usage_errors(text, flags):
    with pytest.raises(UsageError):
        parse_config(text, flags)


def test_quartic_allowed_for_solve():
    assert parse_config("potential=quartic", command="solve").potential == "quartic"


def test_help_lists_every_key(capsys):
    assert main(["verify", "--help"]) == 0
    text = capsys.readouterr().out
    for key in CONFIG_KEYS:
        assert "--" + key.replace("_", "-") in text
        assert key in build_parser().epilog


# ---------------------------------------------------------------------------
# exit codes


def test_verify_passes(capsys):
    code, out, _ = run(["verify", "--suite", "oscillator-core"], capsys)
    assert code == EXIT_PASS
    rows = list(csv.reader(io.StringIO(out)))
    assert len(rows) == 13 and all(r[-1] == "true" for r in rows[1:])


def test_injected_error_exits_one(capsys):
    code, out, _ = run(["verify", "--suite", "oscillator-core", "--inject-energy-error", "0.1"], capsys)
    assert code == EXIT_FAIL
    assert ",false" in out


@pytest.mark.parametrize("argv", [["frobnicate"], [], ["verify", "--suite", "nope"], ["verify", "--bogus", "1"],
                                  ["verify", "--config", "/nonexistent/cfg"]])
def test_usage_exits_two(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == EXIT_USAGE
    assert out == ""
    assert "usage error" in err


def test_unknown_key_in_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nfrobnicate = 3\n")
    code, _, err = run(["verify", "--config", str(cfg)], capsys)
    assert code == EXIT_USAGE
    assert "frobnicate" in err


def test_config_file_and_flag(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("l = 1,0,0\nformat = json\n")
    code, out, _ = run(["ladder", "--config", str(cfg), "--l", "2,0,0"], capsys)
    doc = json.loads(out)
    lowered = next(r for r in doc["rows"] if r["axis"] == "1" and r["direction"] == "lower")
    assert lowered["state"] == "2,0,0"
    assert float(lowered["coefficient"]) == pytest.approx(math.sqrt(2), abs=1e-5)


# ---------------------------------------------------------------------------
# outputs


def test_json_is_byte_identical(tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert main(["verify", "--format", "json", "--out", str(p)]) == EXIT_PASS
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert json.loads(paths[0].read_text())["aggregate_pass"] is True


def test_out_is_honored(tmp_path, capsys):
    target = tmp_path / "tau.csv"
    code, out, _ = run(["map", "--extent", "1", "--h", "0.5", "--out", str(target)], capsys)
    assert code == EXIT_PASS
    assert out == ""
    assert target.read_text().splitlines()[0].startswith("x")
    assert sorted(p.name for p in tmp_path.iterdir()) == ["tau.csv"]


def test_drop_normalization_constant(capsys):
    code, out, _ = run(["verify", "--tau-normalization", "drop", "--format", "json"], capsys)
    assert code == EXIT_PASS
    check = next(c for c in json.loads(out)["checks"] if c["check_name"] == "consistency")
    assert check["notes"]["expected"] == 1.0
    assert check["notes"]["mean_real"] == pytest.approx(1.0, abs=1e-8)


def test_ladder_table(capsys):
    code, out, _ = run(["ladder", "--l", "0,0,0"], capsys)
    assert code == EXIT_PASS
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 6
    raise3 = next(r for r in rows if r["axis"] == "3" and r["direction"] == "raise")
    assert float(raise3["coefficient"]) == pytest.approx(1.0, abs=1e-6)


def test_solve_quartic_json(capsys):
    code, out, _ = run(["solve", "--potential", "quartic", "--states", "4", "--format", "json"], capsys)
    assert code == EXIT_PASS
    doc = json.loads(out)
    assert [s["node_count"] for s in doc["states"]] == [0, 1, 2, 3]
    assert doc["states"][0]["energy"] == pytest.approx(0.667986, abs=1e-4)


def test_solve_potential_file(tmp_path, capsys):
    table = tmp_path / "v.csv"
    xs = [-10 + 0.05 * i for i in range(401)]
    table.write_text("x,v\n" + "".join(f"{x!r},{0.5 * x * x!r}\n" for x in xs))
    code, out, _ = run(["solve", "--potential", "file", "--potential-file", str(table), "--format", "json"],
                       capsys)
    assert code == EXIT_PASS
    assert json.loads(out)["states"][0]["energy"] == pytest.approx(0.5, abs=1e-3)


def test_cr_check(capsys):
    code, out, _ = run(["cr-check", "--energy", "1.5,3.5"], capsys)
    assert code == EXIT_PASS
    assert len(out.splitlines()) == 5


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "entangle_verify", "frobnicate"], capture_output=True, text=True)
    assert proc.returncode == EXIT_USAGE
