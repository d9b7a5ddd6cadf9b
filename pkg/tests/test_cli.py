import subprocess
import sys

import numpy as np
import pytest

from srjsample.cli import run_cli
from srjsample.harness import load_csv, read_pairs_csv, write_points_csv
from srjsample.oracle import brute_force_join

from conftest import make_points


@pytest.fixture
def files(tmp_path):
    rng = np.random.default_rng(0)
    R = make_points(rng.uniform(0, 1000, size=(200, 2)))
    S = make_points(rng.uniform(0, 1000, size=(400, 2)), start=5000)
    write_points_csv(tmp_path / "r.csv", R)
    write_points_csv(tmp_path / "s.csv", S)
    return tmp_path, R, S


def _io(d):
    return ["--r-file", str(d / "r.csv"), "--s-file", str(d / "s.csv"), "--half-extent-x", "60", "--half-extent-y", "40"]


@pytest.mark.parametrize("algo", ["bbst", "kds", "kds-rejection", "oracle"])
def test_sample_writes_join_members(files, algo):
    d, R, S = files
    out = d / f"{algo}.csv"
    assert run_cli(["sample", *_io(d), "--samples", "500", "--algo", algo, "--out", str(out)]) == 0
    r, s = read_pairs_csv(out)
    truth = brute_force_join(R, S, 60, 40)
    assert len(r) == 500 and all((a, b) in truth for a, b in zip(r.tolist(), s.tolist()))


def test_sample_is_byte_identical(files):
    d, _, _ = files
    for k in (1, 2):
        run_cli(["sample", *_io(d), "--samples", "2000", "--seed", "11", "--out", str(d / f"o{k}.csv")])
    assert (d / "o1.csv").read_bytes() == (d / "o2.csv").read_bytes()


def test_bench_report(files, capsys):
    d, _, _ = files
    rep = d / "rep.csv"
    assert run_cli(["bench", *_io(d), "--samples", "1000", "--exact", "--report", str(rep)]) == 0
    keys = [l.split(",")[0] for l in rep.read_text().splitlines()[1:]]
    for k in ("grid_map", "structure_build", "upper_bound", "alias_build", "sampling", "total", "attempts", "sum_mu",
              "exact_join_size"):
        assert k in keys
    assert "half_extent_x=60.0" in capsys.readouterr().err


def test_verify_on_input_files(files, capsys):
    d, _, _ = files
    assert run_cli(["verify", *_io(d), "--draws", "20000"]) == 0
    assert "failed: 0" in capsys.readouterr().out


def test_gen_and_split(tmp_path):
    out = tmp_path / "u.csv"
    assert run_cli(["gen", "--kind", "gaussian_clusters", "--count", "300", "--out", str(out)]) == 0
    assert len(load_csv(out)) == 300
    assert run_cli(["gen", "--count", "300", "--split", "0.5", "--out", str(out)]) == 0
    r, s = load_csv(tmp_path / "u_r.csv"), load_csv(tmp_path / "u_s.csv")
    assert len(r) + len(s) == 300


def test_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("id,x,y\n1,2\n")
    args = ["sample", "--r-file", str(bad), "--s-file", str(bad), "--out", str(tmp_path / "o.csv")]
    assert run_cli(args) == 2
    assert "line 2" in capsys.readouterr().err
    assert run_cli(["sample", "--r-file", "missing.csv", "--s-file", "missing.csv", "--out", "x.csv"]) == 2
    assert run_cli(["gen", "--count", "0", "--out", str(tmp_path / "z.csv")]) == 2
    assert run_cli(["verify", "--r-file", str(bad)]) == 2
    with pytest.raises(SystemExit):
        run_cli(["sample", "--algo", "nope"])


def test_module_entry_point(files):
    d, _, _ = files
    p = subprocess.run([sys.executable, "-m", "srjsample", "sample", *_io(d), "--samples", "10", "--out",
                        str(d / "m.csv")], capture_output=True, text=True)
    assert p.returncode == 0, p.stderr
