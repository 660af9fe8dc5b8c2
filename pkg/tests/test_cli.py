import json

import numpy as np
import pytest

from langevin_hjb import cli, io

FAST = ["--reps", "20", "--steps", "60"]


def read_csv(path):
    lines = path.read_text().splitlines()
    return lines[0].split(","), [list(map(float, l.split(","))) for l in lines[1:]]


def test_compare_outputs_and_manifest(tmp_path):
    assert cli.main(["compare", "--out", str(tmp_path), *FAST]) == 0
    header, rows = read_csv(tmp_path / "comparison.csv")
    assert header[0] == "k" and header[1:3] == ["constant_mean_f", "constant_std_err"]
    assert len(header) == 9 and len(rows) == 60
    h, per = read_csv(tmp_path / "state-dependent.csv")
    assert h == ["k", "mean_f", "std_err", "min_f", "max_f"]
    man = json.loads((tmp_path / "manifest.json").read_text())
    for key in ("config_ini", "seeds", "hjb", "excluded_trajectories", "version", "created_utc"):
        assert key in man
    assert man["hjb"]["init"] == [-0.2853, 1.1575]
    assert man["hjb"]["truncated"] is True


def test_manifest_reproduces_bytes(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["compare", "--out", str(a), "--seed", "9", *FAST]) == 0
    assert cli.main(["compare", "--config", str(a / "manifest.json"), "--out", str(b)]) == 0
    for f in a.glob("*.csv"):
        assert f.read_bytes() == (b / f.name).read_bytes()


def test_percent_g_format(tmp_path):
    assert cli.main(["run", "--algorithm", "constant", "--out", str(tmp_path), *FAST]) == 0
    lines = (tmp_path / "constant.csv").read_text().splitlines()
    for tok in lines[5].split(",")[1:]:
        assert tok == "%.12g" % float(tok)


def test_single_algorithm_compare_is_usage_error(tmp_path):
    ini = tmp_path / "one.ini"
    ini.write_text("[algorithm.c]\npolicy = constant\neta = 0.5\nbeta = 1.0\n")
    assert cli.main(["compare", "--config", str(ini), "--out", str(tmp_path)]) == 2


def test_config_error_exit_code(tmp_path):
    assert cli.main(["run", "--temp-lo", "9", "--temp-hi", "1", "--out", str(tmp_path)]) == 2
    assert cli.main(["run", "--config", str(tmp_path / "nope.ini"), "--out", str(tmp_path)]) == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["bogus"])
    assert exc.value.code == 2


def test_solver_failure_exit_code(tmp_path):
    ini = tmp_path / "discard.ini"
    ini.write_text(
        "[hjb]\non_blowup = discard\ninit = -0.2853, 1.1575\n"
        "[algorithm.sd]\npolicy = state-dependent\neta = 0.125\n"
        "[algorithm.c]\npolicy = constant\neta = 0.5\nbeta = 1.0\n"
    )
    assert cli.main(["compare", "--config", str(ini), "--out", str(tmp_path)]) == 3


def test_run_adhoc_policy(tmp_path):
    args = ["run", "--policy", "sampled-relaxed", "--eta", "0.1", "--out", str(tmp_path), *FAST]
    assert cli.main(args) == 0
    assert (tmp_path / "sampled-relaxed.csv").exists()
    assert cli.main(["run", "--policy", "bang-bang", "--out", str(tmp_path)]) == 2


def test_solve_and_profile(tmp_path):
    assert cli.main(["solve-hjb", "--out", str(tmp_path)]) == 0
    header, rows = read_csv(tmp_path / "hjb_solution.csv")
    assert header == ["x", "v", "vx", "vxx", "h", "temperature"]
    prof = tmp_path / "prof"
    args = ["temp-profile", "--solution", str(tmp_path / "hjb_solution.npz"), "--out", str(prof),
            "--grid-min", "-8", "--grid-max", "8", "--grid-n", "161"]
    assert cli.main(args) == 0
    header, rows = read_csv(prof / "temperature_profile.csv")
    assert header == ["x", "v", "vxx", "h", "temperature"]
    temp = np.array(rows)[:, 4]
    assert np.all((temp >= 1e-4) & (temp <= 500.0))
    x = np.array(rows)[:, 0]
    assert np.all(temp[np.abs(x - 4.0) < 0.2] < 1.0)


def test_profile_single_point(tmp_path):
    args = ["temp-profile", "--out", str(tmp_path), "--grid-min", "4", "--grid-max", "4", "--grid-n", "1"]
    assert cli.main(args) == 0
    assert len((tmp_path / "temperature_profile.csv").read_text().splitlines()) == 2


def test_npz_round_trip(tmp_path, preset_solution):
    io.save_solution_npz(tmp_path / "s.npz", preset_solution)
    back = io.load_solution_npz(tmp_path / "s.npz")
    assert back.params == preset_solution.params
    np.testing.assert_array_equal(back.vxx, preset_solution.vxx)
