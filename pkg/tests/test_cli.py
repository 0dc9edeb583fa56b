import json

import pytest

from decolab.circuit import random_circuit, serialize_circuit
from decolab.cli import main

BELL = "k 2\nwidth 2\nlayer\ngate H [0] -> [0]\nlayer\ngate CNOT [0,1] -> [0,1]\n"


@pytest.fixture
def bell_path(tmp_path):
    path = tmp_path / "bell.qc"
    path.write_text(BELL)
    return str(path)


@pytest.fixture
def wire11_path(tmp_path):
    path = tmp_path / "wire11.qc"
    path.write_text("k 1\nwidth 1\n" + "layer\ngate I [0] -> [0]\n" * 11)
    return str(path)


def read_csv(path):
    lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    header = lines[0].split(",")
    rows = [dict(zip(header, line.split(","))) for line in lines[1:]]
    return header, rows


class TestSimulate:
    def test_bell_at_eta_zero(self, bell_path, tmp_path, capsys):
        out = tmp_path / "report.csv"
        code = main(
            [
                "simulate", "--circuit", bell_path, "--eta", "0",
                "--probes", "basis", "--output", str(out),
            ]
        )
        assert code == 0
        header, rows = read_csv(out)
        assert header == ["level", "i_width", "n", "empirical_d", "bound", "slack"]
        final_full = [r for r in rows if r["level"] == "2" and r["n"] == "2"]
        assert float(final_full[0]["empirical_d"]) == pytest.approx(1.0, abs=1e-10)
        summary = capsys.readouterr().out
        assert "final_max_distance=" in summary
        assert "practically_worthless=false" in summary

    def test_wire_decay_flag(self, wire11_path, tmp_path, capsys):
        out = tmp_path / "report.csv"
        code = main(
            [
                "simulate", "--circuit", wire11_path, "--eta", "0.5",
                "--probes", "basis", "--output", str(out),
            ]
        )
        assert code == 0
        summary = capsys.readouterr().out
        assert "practically_worthless=true" in summary
        _, rows = read_csv(out)
        final = [r for r in rows if r["level"] == "11" and r["n"] == "1"][0]
        assert float(final["empirical_d"]) == pytest.approx(0.5**10, abs=1e-10)

    def test_random_circuit_report_nonnegative_slack(self, tmp_path):
        path = tmp_path / "rand.qc"
        path.write_text(serialize_circuit(random_circuit(2, 4, 6, seed=3)))
        out = tmp_path / "report.csv"
        code = main(
            [
                "simulate", "--circuit", str(path), "--eta", "0.6",
                "--probes", "basis", "--output", str(out),
            ]
        )
        assert code == 0
        _, rows = read_csv(out)
        assert rows and all(float(r["slack"]) >= -1e-8 for r in rows)

    def test_json_mirrors_csv_columns(self, bell_path, tmp_path):
        out = tmp_path / "report.json"
        code = main(
            [
                "simulate", "--circuit", bell_path, "--eta", "0.3",
                "--probes", "pair:0,3", "--format", "json", "--output", str(out),
            ]
        )
        assert code == 0
        rows = json.loads(out.read_text())
        assert isinstance(rows, list)
        assert set(rows[0]) == {"level", "i_width", "n", "empirical_d", "bound", "slack"}

    def test_parse_error_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.qc"
        bad.write_text("k 2\nwidth 2\nlayer\ngate NOPE [0] -> [0]\n")
        code = main(["simulate", "--circuit", str(bad), "--eta", "0.5"])
        assert code == 2
        assert "error" in capsys.readouterr().err

    def test_missing_file_exits_2(self, tmp_path):
        assert main(["simulate", "--circuit", str(tmp_path / "no.qc"), "--eta", "0"]) == 2

    def test_width_cap_exits_3(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("DECOLAB_MAX_QUBITS", "2")
        path = tmp_path / "wide.qc"
        path.write_text(
            "k 1\nwidth 3\nlayer\ngate I [0] -> [0]\ngate I [1] -> [1]\ngate I [2] -> [2]\n"
        )
        code = main(["simulate", "--circuit", str(path), "--eta", "0.5"])
        assert code == 3
        assert "resource cap" in capsys.readouterr().err

    def test_eta_out_of_range_exits_2(self, bell_path):
        assert main(["simulate", "--circuit", bell_path, "--eta", "1.5"]) == 2

    def test_width_assertion(self, bell_path, tmp_path):
        out = tmp_path / "r.csv"
        assert main(
            ["simulate", "--circuit", bell_path, "--eta", "0", "--width", "3",
             "--output", str(out)]
        ) == 2

    def test_extra_noise_round(self, wire11_path, tmp_path):
        out = tmp_path / "r.csv"
        code = main(
            [
                "simulate", "--circuit", wire11_path, "--eta", "0.5",
                "--probes", "basis", "--extra-noise-round", "--output", str(out),
            ]
        )
        assert code == 0
        _, rows = read_csv(out)
        final = [r for r in rows if r["level"] == "11" and r["n"] == "1"][0]
        assert float(final["empirical_d"]) == pytest.approx(0.5**12, abs=1e-12)


class TestBound:
    def test_eta_one_column(self, tmp_path):
        out = tmp_path / "bound.csv"
        assert main(["bound", "--k", "2", "--eta", "1", "--depth", "3",
                     "--output", str(out)]) == 0
        _, rows = read_csv(out)
        assert [float(r["f_i"]) for r in rows] == [0.0, 1.0, 1.0, 1.0]

    def test_hand_iterated_rows_literal(self, tmp_path):
        out = tmp_path / "bound.csv"
        assert main(["bound", "--k", "2", "--eta", "0.6", "--depth", "2", "--n", "1",
                     "--output", str(out)]) == 0
        text = out.read_text()
        assert "0.36" in text and "0.553536" in text
        _, rows = read_csv(out)
        assert float(rows[1]["f_i"]) == 0.36
        assert float(rows[2]["f_i"]) == 0.553536
        assert float(rows[2]["bound_n1"]) == 1 - 0.553536

    def test_threshold_flagging(self, tmp_path, capsys):
        out = tmp_path / "bound.csv"
        assert main(["bound", "--k", "2", "--eta", "0.5", "--output", str(out)]) == 0
        assert "at/below-threshold" in capsys.readouterr().out
        assert "at/below-threshold" in out.read_text().splitlines()[0]

    def test_bad_k_exits_2(self):
        assert main(["bound", "--k", "0", "--eta", "0.5"]) == 2


class TestSweep:
    def test_reference_points(self, tmp_path):
        out = tmp_path / "sweep.csv"
        assert main(["sweep", "--k", "2", "--eta", "1.0,0.75", "--n", "1,4",
                     "--eps", "0.01", "--output", str(out)]) == 0
        _, rows = read_csv(out)
        table = {(r["eta"], r["n"]): r["min_depth"] for r in rows}
        assert table[("1.0", "4")] == "1"
        assert table[("0.75", "1")] == "7"
        assert table[("0.75", "4")] == "11"

    def test_below_threshold_is_na(self, tmp_path):
        out = tmp_path / "sweep.csv"
        assert main(["sweep", "--k", "2", "--eta", "0.4", "--n", "2",
                     "--output", str(out)]) == 0
        _, rows = read_csv(out)
        assert rows[0]["min_depth"] == "n/a"

    def test_rows_monotone_in_n(self, tmp_path):
        out = tmp_path / "sweep.csv"
        assert main(["sweep", "--k", "2", "--eta", "0.8", "--n", "1,2,4,8,16",
                     "--output", str(out)]) == 0
        _, rows = read_csv(out)
        depths = [int(r["min_depth"]) for r in rows]
        assert depths == sorted(depths)

    def test_jobs_do_not_change_output(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["sweep", "--k", "1,2", "--eta", "0.9,0.75", "--n", "1,4,16"]
        assert main(args + ["--output", str(a)]) == 0
        assert main(args + ["--jobs", "4", "--output", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestCheck:
    def test_kraus_suite(self, capsys):
        assert main(["check", "--suite", "kraus"]) == 0
        assert "PASS" in capsys.readouterr().out

    def test_noise_action_suite_small(self, capsys):
        assert main(["check", "--suite", "noise-action", "--qubits", "2",
                     "--trials", "5", "--seed", "1"]) == 0
        out = capsys.readouterr().out
        assert "noise-action" in out and "PASS" in out

    def test_contractivity_suite_small(self):
        assert main(["check", "--suite", "contractivity", "--trials", "20",
                     "--seed", "3"]) == 0


class TestDeterminism:
    def test_simulate_byte_identical(self, tmp_path):
        path = tmp_path / "c.qc"
        path.write_text(serialize_circuit(random_circuit(2, 3, 4, seed=9)))
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["simulate", "--circuit", str(path), "--eta", "0.7",
                "--probes", "random:6", "--seed", "42"]
        assert main(args + ["--output", str(a)]) == 0
        assert main(args + ["--output", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_usage_error_is_exit_2(self):
        with pytest.raises(SystemExit) as err:
            main(["simulate"])  # missing required flags
        assert err.value.code == 2
