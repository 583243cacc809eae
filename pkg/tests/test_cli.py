"""Command-line interface: commands, formats, configuration, caching and exit codes."""

from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import pytest

from tamelocal.cli import EXIT_CONFIG, EXIT_MISMATCH, EXIT_OK, main

A_FLAGS = ["--p", "3", "--e", "2", "--f", "1"]
B_FLAGS = ["--p", "3", "--e", "1", "--f", "2"]
D_FLAGS = ["--p", "5", "--e", "4", "--f", "1"]


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), buf)
    return code, buf.getvalue()


def test_tower_describe_json():
    code, out = run("tower", "describe", *A_FLAGS, "--format", "json")
    assert code == EXIT_OK
    js = json.loads(out)
    assert js["gamma"]["order"] == 2
    assert js["admissible_thetas"] == 18
    assert js["c(-1)"] == "-1"


def test_formal_degree_pretty():
    code, out = run("verify", "formal-degree", *A_FLAGS)
    assert code == EXIT_OK
    assert "18 = 18" in out
    assert out.count("[ok]") == 18
    assert out.rstrip().endswith("status: ok")


def test_root_number_failure_is_predicted():
    code, out = run("verify", "root-number", *D_FLAGS, "--theta-index", "0")
    assert code == EXIT_OK
    assert "-1 != 1" in out
    assert "identity fails (ratio -1), as predicted" in out


def test_theta_cap_note():
    code, out = run("verify", "formal-degree", *A_FLAGS, "--max-thetas", "3", "--format", "json")
    js = json.loads(out)
    assert code == EXIT_OK
    assert len(js["reports"]) == 3
    assert "first 3 of 18" in js["notes"][0]


def test_csv_rows():
    code, out = run("verify", "decomposition", *B_FLAGS, "--theta-index", "1", "--format", "csv")
    assert code == EXIT_OK
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0][:3] == ["p", "f0", "e"]
    assert all(r[-1] == "ok" for r in rows[1:])
    assert any(r[7] == "wedge^2 phi_1 decomposition" for r in rows[1:])


def test_chars_list_and_factors():
    code, out = run("chars", "list", *B_FLAGS, "--limit", "2", "--format", "json")
    js = json.loads(out)
    assert code == EXIT_OK and js["count"] == js["expected_count"] == 12 and len(js["thetas"]) == 2
    code, out = run("factors", "adjoint", *B_FLAGS, "--theta-index", "0", "--format", "json")
    js = json.loads(out)
    assert code == EXIT_OK
    assert js["factors"][0]["a"] == 8 and js["factors"][0]["L"] == "1 + T"


def test_sweep_is_deterministic_across_jobs():
    args = ["sweep", "--q", "5", "--n", "1", "--format", "json"]
    c1, o1 = run(*args)
    c2, o2 = run(*args, "--jobs", "2")
    assert c1 == c2 == EXIT_OK
    assert o1 == o2
    assert json.loads(o1)["count"] == 2


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# instance B\np = 3\ne = 1\nf = 2\nformat = json\ntheta-index = 0\n")
    code, out = run("verify", "formal-degree", "--config", str(cfg))
    assert code == EXIT_OK
    assert json.loads(out)["reports"][0]["instance"]["e"] == 1
    code, out = run("verify", "formal-degree", "--config", str(cfg), "--e", "2", "--f", "1")
    assert json.loads(out)["reports"][0]["instance"]["e"] == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["tower", "describe", "--p", "3", "--e", "4", "--f", "1"],  # e does not divide q - 1
        ["tower", "describe", "--p", "3", "--e", "2"],  # missing --f
        ["verify", "formal-degree", *A_FLAGS, "--theta-index", "99"],
        ["verify", "formal-degree", *A_FLAGS, "--theta-index", "x"],
        ["verify", "formal-degree", *A_FLAGS, "--jobs", "0"],
        ["verify", "formal-degree", *A_FLAGS, "--format", "xml"],  # argparse rejects
        ["verify", "formal-degree", *A_FLAGS, "--config", "/nonexistent/file"],
    ],
)
def test_configuration_errors(argv):
    code, _ = run(*argv)
    assert code == EXIT_CONFIG


def test_bad_config_lines(tmp_path):
    for text in ("p 3\n", "colour = red\n", "p = three\n", "format = xml\n"):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text(text)
        code, _ = run("tower", "describe", *A_FLAGS, "--config", str(cfg))
        assert code == EXIT_CONFIG


def test_cache_dir_is_used_and_a_mismatch_exits_one(tmp_path):
    cache = tmp_path / "cache"
    code, first = run("verify", "root-number", *A_FLAGS, "--theta-index", "0", "--cache-dir", str(cache), "--format", "json")
    assert code == EXIT_OK
    files = list(cache.glob("*.json"))
    assert len(files) == 1
    code, second = run("verify", "root-number", *A_FLAGS, "--theta-index", "0", "--cache-dir", str(cache), "--format", "json")
    assert second == first
    # a cached report that disagrees with its expectation is surfaced as a mismatch
    rep = json.loads(files[0].read_text())
    rep["status"] = "mismatch"
    files[0].write_text(json.dumps(rep))
    code, _ = run("verify", "root-number", *A_FLAGS, "--theta-index", "0", "--cache-dir", str(cache))
    assert code == EXIT_MISMATCH


def test_cache_dir_must_be_a_directory(tmp_path):
    f = tmp_path / "file"
    f.write_text("")
    code, _ = run("tower", "describe", *A_FLAGS, "--cache-dir", str(f))
    assert code == EXIT_CONFIG


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "tamelocal", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("tamelocal ")
