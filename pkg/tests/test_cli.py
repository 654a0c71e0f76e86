import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from achievement import __version__
from achievement.cli import main

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    rc = main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def run_json(capsys, *argv):
    rc, out, err = run(capsys, *argv)
    assert rc == 0, err
    return json.loads(out)


class TestThresholds:
    def test_four_coefficients(self, capsys):
        doc = run_json(capsys, "thresholds", "--function", "identity", "--coeffs", "4,3,2,2")
        res = doc["result"]
        assert res["d_CI"] == 0.125
        assert res["d_NI"] == pytest.approx(0.153846, abs=1e-6)
        assert res["ap"]["s"] == 7
        assert doc["schema"] == "achievement.thresholds/1"
        assert doc["version"] == __version__

    def test_envelope(self, capsys):
        doc = run_json(capsys, "thresholds", "--envelope", "a=0.5403,b=1,r=1,eps=1", "--coeffs", "1")
        assert doc["result"]["d_IM"] == pytest.approx(1 / 1.5403, rel=1e-12)
        assert doc["config"]["envelope"] == {"a": 0.5403, "b": 1.0, "r": 1.0, "epsilon": 1.0}
        assert doc["config"]["function"] is None

    def test_single_coefficient(self, capsys):
        res = run_json(capsys, "thresholds", "--function", "identity", "--coeffs", "1")["result"]
        assert res["d_I"] == res["d_IM"] == res["d_NI"] == res["d_C"] == 0.5

    def test_exact_mode(self, capsys):
        res = run_json(capsys, "thresholds", "--function", "identity", "--coeffs", "3,2", "--mode", "exact")["result"]
        assert (res["d_I"], res["d_NI"], res["d_C"], res["d_IM"]) == ("2/7", "2/7", "1/6", "1/2")

    def test_config_embedded(self, capsys):
        cfg = run_json(capsys, "thresholds", "--function", "sin", "--coeffs", "2,1", "--no-allow-mu-zero")["config"]
        assert cfg["command"] == "thresholds"
        assert cfg["function"] == "sin"
        assert cfg["coeffs"] == [2.0, 1.0]
        assert cfg["allow_mu_zero"] is False
        assert cfg["format"] == "json"


class TestClassify:
    def test_cantorval(self, capsys):
        res = run_json(capsys, "classify", "--function", "identity", "--coeffs", "4,3,2,2", "--x", "0.13")["result"]
        assert res["label"] == "Cantorval"
        assert {j["rule"] for j in res["justification"]} >= {"cantorval", "not-finite-union"}

    def test_interval(self, capsys):
        res = run_json(capsys, "classify", "--function", "identity", "--coeffs", "1", "--x", "0.75")["result"]
        assert res["label"] == "Interval"

    @pytest.mark.parametrize("x", ["1.2", "0", "1", "-0.3", "abc"])
    def test_invalid_x(self, capsys, x):
        rc, out, err = run(capsys, "classify", "--function", "sin", "--coeffs", "2,1", "--x", x)
        assert rc == 2 and out == "" and err.startswith("error:")

    def test_x_beyond_radius(self, capsys):
        rc, _, err = run(capsys, "classify", "--envelope", "a=1,b=1,r=1,eps=0.5", "--coeffs", "1", "--x", "0.7")
        assert rc == 2 and "epsilon" in err


class TestValidation:
    def test_both_function_and_envelope(self, capsys):
        rc, _, err = run(capsys, "thresholds", "--function", "sin", "--envelope", "a=1,b=1,r=1", "--coeffs", "1")
        assert rc == 2

    def test_neither(self, capsys):
        assert run(capsys, "thresholds", "--coeffs", "1")[0] == 2

    def test_exact_needs_identity(self, capsys):
        assert run(capsys, "thresholds", "--function", "sin", "--coeffs", "1", "--mode", "exact")[0] == 2

    @pytest.mark.parametrize("coeffs", ["0,1", "1,-2", "x"])
    def test_bad_coeffs(self, capsys, coeffs):
        assert run(capsys, "thresholds", "--function", "identity", "--coeffs", coeffs)[0] == 2

    def test_bad_envelope(self, capsys):
        assert run(capsys, "thresholds", "--envelope", "a=1,b=1", "--coeffs", "1")[0] == 2
        assert run(capsys, "thresholds", "--envelope", "a=2,b=1,r=1", "--coeffs", "1")[0] == 2

    def test_cap_exceeded(self, capsys):
        rc, _, err = run(capsys, "enumerate", "--function", "identity", "--coeffs", "1", "--x", "0.5", "--depth", "40")
        assert rc == 2 and "cap" in err

    def test_argparse_errors_exit_two(self):
        with pytest.raises(SystemExit) as exc:
            main(["thresholds"])
        assert exc.value.code == 2

    def test_internal_error_exit_one(self, capsys, monkeypatch):
        import achievement.cli as cli

        def boom(ctx):
            raise RuntimeError("boom")

        monkeypatch.setitem(cli.COMMANDS, "thresholds", boom)
        rc, _, err = run(capsys, "thresholds", "--function", "identity", "--coeffs", "1")
        assert rc == 1 and "internal error" in err


class TestSweep:
    @pytest.mark.parametrize("coeffs, name", [("1", "k1"), ("3,2", "k32"), ("4,3,2,2", "k4322")])
    def test_golden(self, capsys, coeffs, name):
        rc, out, _ = run(capsys, "sweep", "--function", "identity", "--coeffs", coeffs)
        assert rc == 0
        assert out == (GOLDEN / f"sweep_{name}.csv").read_text()

    def test_rows(self, capsys):
        _, out, _ = run(capsys, "sweep", "--function", "identity", "--coeffs", "1")
        lines = out.splitlines()
        assert lines[0] == "# schema: achievement.sweep/1"
        rows = list(csv.DictReader(lines[1:]))
        grid = [r for r in rows if r["kind"] == "grid"]
        assert len(grid) == 99
        assert float(grid[0]["x"]) == 0.01 and float(grid[-1]["x"]) == 0.99
        assert [float(r["x"]) for r in rows] == sorted(float(r["x"]) for r in rows)
        by_x = {float(r["x"]): r["label"] for r in grid}
        assert by_x[0.3] == "Cantor" and by_x[0.75] == "Interval"

    def test_json_format(self, capsys):
        doc = run_json(capsys, "sweep", "--function", "identity", "--coeffs", "3,2", "--steps", "5", "--format", "json")
        assert doc["result"]["columns"][0] == "x"
        assert doc["config"]["steps"] == 5

    def test_exact_sweep(self, capsys):
        _, out, _ = run(
            capsys, "sweep", "--function", "identity", "--coeffs", "4,3,2,2", "--mode", "exact",
            "--x-min", "1/10", "--x-max", "1/5", "--steps", "3",
        )
        xs = [line.split(",")[0] for line in out.splitlines()[2:]]
        # d_I and d_NI coincide, so 2/13 appears once per threshold
        assert xs == ["1/10", "1/8", "3/20", "2/13", "2/13", "1/5"]

    def test_bad_range(self, capsys):
        assert run(capsys, "sweep", "--function", "identity", "--coeffs", "1", "--x-min", "0.5", "--x-max", "0.4")[0] == 2
        assert run(capsys, "sweep", "--function", "identity", "--coeffs", "1", "--steps", "1")[0] == 2

    def test_deterministic(self, capsys):
        argv = ["sweep", "--function", "xln1p", "--coeffs", "3,2,1", "--steps", "31"]
        assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


class TestEnumerate:
    def test_middle_third(self, capsys):
        res = run_json(
            capsys, "enumerate", "--function", "identity", "--coeffs", "2", "--x", "1/3", "--depth", "1", "--mode", "exact"
        )["result"]
        assert res["gaps"]["gaps"] == [["1/3", "1/3"]]
        assert res["points"] == ["0/1", "2/3"]

    def test_guthrie_nymann(self, capsys):
        res = run_json(
            capsys, "enumerate", "--function", "identity", "--coeffs", "3,2", "--x", "1/4", "--depth", "8", "--mode", "exact"
        )["result"]
        assert res["point_count"] == 256
        assert res["cover"]["count"] == 81
        assert res["cover"]["total_length"] == "155/128"

    def test_dyadic(self, capsys):
        res = run_json(capsys, "enumerate", "--function", "identity", "--coeffs", "1", "--x", "0.5", "--depth", "10")["result"]
        assert res["gaps"]["count"] == 0 and res["cover"]["count"] == 1

    def test_csv(self, capsys):
        _, out, _ = run(
            capsys, "enumerate", "--function", "identity", "--coeffs", "3,2", "--x", "0.25", "--depth", "2", "--format", "csv"
        )
        assert out.splitlines() == ["# schema: achievement.enumerate/1", "index,point", "0,0", "1,0.5", "2,0.75", "3,1.25"]


class TestKakeya:
    def test_interval(self, capsys):
        res = run_json(capsys, "kakeya", "--function", "identity", "--coeffs", "1", "--x", "0.6")["result"]
        assert res["all_le"] and res["certified"] == "compact-interval"

    def test_cantor(self, capsys):
        res = run_json(capsys, "kakeya", "--function", "identity", "--coeffs", "2", "--x", "1/3")["result"]
        assert res["all_gt"] and res["certified"] == "cantor"

    def test_mixed(self, capsys):
        res = run_json(capsys, "kakeya", "--function", "identity", "--coeffs", "4,3,2,2", "--x", "0.13")["result"]
        assert res["gt_classes"] == [4] and res["le_classes"] == [1, 2, 3]
        assert res["certified"] == "not-finite-union"
        assert len(res["comparisons"]) == 64


class TestOtherCommands:
    def test_ap_search(self, capsys):
        res = run_json(capsys, "ap-search", "--function", "identity", "--coeffs", "4,3,2,2", "--mode", "exact")["result"]
        assert (res["mu"], res["lambda"], res["s"]) == ("2/1", "1/1", 7)
        assert res["alphabet"][0] == "0/1" and len(res["progression"]) == 8

    def test_ap_search_mu_positive(self, capsys):
        res = run_json(capsys, "ap-search", "--function", "identity", "--coeffs", "3,2", "--no-allow-mu-zero")["result"]
        assert (res["mu"], res["lambda"], res["s"]) == (2.0, 1.0, 1)
        assert res["mu_zero_allowed"] is False

    def test_minkowski_check(self, capsys):
        res = run_json(
            capsys, "minkowski-check", "--function", "identity", "--coeffs", "3,2", "--x", "1/4",
            "--blocks", "6", "--mode", "exact",
        )["result"]
        assert res["all_equal"]
        assert res["partitions"][0]["full_points"] == res["partitions"][0]["sum_points"]


def test_out_file(tmp_path, capsys):
    target = tmp_path / "th.json"
    rc, out, _ = run(capsys, "thresholds", "--function", "identity", "--coeffs", "3,2", "--out", str(target))
    assert rc == 0 and out == ""
    doc = json.loads(target.read_text())
    assert doc["config"]["out"] == str(target)


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "achievement", "classify", "--function", "identity", "--coeffs", "1", "--x", "0.3"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["label"] == "Cantor"
