import csv
import json
import math
from pathlib import Path

import pytest

from amalgam_lab import cli
from amalgam_lab.errors import ConfigError
from amalgam_lab.grid import INF
from amalgam_lab.lab import Engine, ScenarioResult, compare
from amalgam_lab.oracle import Relation

GOLDEN = Path(__file__).parent / "golden" / "dilation_p2_q2_small_oracle.csv"
DILATION = ["dilation", "--p", "2", "--q", "2", "--engine", "oracle"]


def run_cli(capsys, argv, env=None):
    code = cli.main(argv, env={} if env is None else env)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_oracle_subcommand_prints_closed_form(capsys):
    code, out, _ = run_cli(capsys, ["oracle", "--a", "1", "--b", "0", "--p", "2", "--q", "2", "--d", "1"])
    assert code == 0
    assert out == "0.70710678118654757\n"
    assert float(out) == pytest.approx(2**-0.5, rel=1e-15)


def test_oracle_subcommand_accepts_inf_and_fractions(capsys):
    code, out, _ = run_cli(capsys, ["oracle", "--a", "2", "--b", "1", "--p", "1", "--q", "inf"])
    assert code == 0
    assert float(out) == pytest.approx(10**0.25 / 7**0.5, rel=1e-15)
    code, out, _ = run_cli(capsys, ["oracle", "--a", "1", "--b", "1", "--p", "3/2", "--q", "4"])
    assert float(out) == pytest.approx(0.6681787407402767, rel=1e-13)


def test_passing_run_exits_zero(capsys):
    code, out, _ = run_cli(capsys, DILATION)
    assert code == 0
    assert out.splitlines()[0].startswith("verdict")
    assert all(line.startswith("PASS") for line in out.splitlines()[1:])


def test_failing_verdict_exits_one(capsys, tmp_path):
    path = tmp_path / "v.csv"
    code, out, _ = run_cli(capsys, ["dilation", "--p", "1", "--q", "4", "--engine", "oracle",
                                    "--lam-window", "0.1,1", "--verdict-csv", str(path)])
    assert code == 1
    assert "FAIL" in out
    rows = list(csv.DictReader(path.open()))
    assert rows[0]["pass"] == "false"
    assert [r["pass"] for r in rows[1:]] == ["true", "true"]


@pytest.mark.parametrize(
    "argv",
    [
        ["dilation", "--bogus"],
        ["dilation", "--regime", "sideways"],
        ["nosuch"],
        ["dilation", "--p", "0.5", "--engine", "oracle"],
        ["dilation", "--p", "abc"],
        ["dilation", "--lam-window", "0.1"],
        ["dilation", "--n", "1024"],  # dx missing
        ["dilation", "--threads", "0"],
    ],
)
def test_malformed_input_exits_two_and_writes_nothing(capsys, tmp_path, argv):
    out = tmp_path / "s.csv"
    code, _, err = run_cli(capsys, argv + ["--sweep-csv", str(out)] if argv != ["nosuch"] else argv)
    assert code == 2
    assert err
    assert not out.exists()


def test_config_file_and_precedence(capsys, tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("# dilation run\np = 1\nq = inf  # trailing comment\nthreads = 3\nengine = oracle\n")
    code, out, _ = run_cli(capsys, ["dilation", "--config", str(conf), "--q", "4", "--print-config"],
                           env={cli.THREADS_ENV: "7"})
    assert code == 0
    lines = dict(line.split(" = ", 1) for line in out.splitlines())
    assert lines["p"] == "1.0"
    assert lines["q"] == "4.0"  # flag beats file
    assert lines["threads"] == "3"  # file beats environment
    assert lines["engine"] == "oracle"


def test_environment_threads_fallback(capsys):
    code, out, _ = run_cli(capsys, ["dilation", "--print-config"], env={cli.THREADS_ENV: "5"})
    assert code == 0
    assert "threads = 5\n" in out
    code, out, _ = run_cli(capsys, ["dilation", "--print-config"])
    assert "threads = 1\n" in out


def test_unknown_config_key_rejected(capsys, tmp_path):
    conf = tmp_path / "bad.conf"
    conf.write_text("p = 2\ncolour = blue\n")
    code, _, err = run_cli(capsys, ["dilation", "--config", str(conf)])
    assert code == 2
    assert "colour" in err
    with pytest.raises(ConfigError):
        cli.coerce("colour", "blue")


def test_config_file_for_other_scenario_rejected(capsys, tmp_path):
    conf = tmp_path / "x.conf"
    conf.write_text("scenario = product\n")
    code, _, _ = run_cli(capsys, ["dilation", "--config", str(conf)])
    assert code == 2


def test_coerce_types():
    assert cli.coerce("p", "inf") == INF
    assert cli.coerce("p", "3/2") == 1.5
    assert cli.coerce("lam_window", "1/100, 1/10") == (0.01, 0.1)
    assert cli.coerce("weak", "yes") is True
    assert cli.coerce("n", "64") == 64
    for key, value in (("n", "6.5"), ("engine", "fast"), ("weak", "maybe"), ("small_window", "1,0.5")):
        with pytest.raises(ConfigError):
            cli.coerce(key, value)


def test_print_config_round_trips(tmp_path, capsys):
    code, out, _ = run_cli(capsys, ["schrodinger", "--p", "4", "--t-window", "100,1000", "--print-config"])
    assert code == 0
    conf = tmp_path / "again.conf"
    conf.write_text(out)
    cfg = cli.resolve_config("schrodinger", cli.read_config_file(conf), {}, env={})
    assert cfg.p == 4.0 and cfg.t_window == (100.0, 1000.0)


def test_gnuplot_hints(capsys):
    code, out, _ = run_cli(capsys, DILATION + ["--sweep-csv", "mine.csv", "--gnuplot-hints"])
    assert code == 0
    assert "set logscale xy" in out
    assert "mine.csv" in out
    assert not Path("mine.csv").exists()


def test_empty_results_give_header_only():
    assert cli.format_csv([], "sweeps") == ",".join(cli.SWEEP_COLUMNS) + "\n"
    assert cli.format_csv([ScenarioResult("empty")], "verdicts") == ",".join(cli.VERDICT_COLUMNS) + "\n"
    assert json.loads(cli.format_json([])) == {"version": 1, "sweeps": [], "verdicts": []}
    with pytest.raises(ValueError):
        cli.format_csv([], "other")


def test_csv_cells():
    r = ScenarioResult("x", [compare("x", 0.1, INF, Relation.AT_MOST, 0.0, Engine.ORACLE)])
    row = cli.format_csv([r], "verdicts").splitlines()[1].split(",")
    assert row == ["x", "0.10000000000000001", "inf", "0", "nan", "true"]


def test_json_matches_csv(capsys, tmp_path):
    j, s, v = tmp_path / "o.json", tmp_path / "s.csv", tmp_path / "v.csv"
    code, _, _ = run_cli(capsys, ["inclusion", "--p1", "1", "--q1", "inf", "--p2", "2", "--q2", "inf",
                                  "--json", str(j), "--sweep-csv", str(s), "--verdict-csv", str(v)])
    assert code == 0
    data = json.loads(j.read_text())
    assert data["version"] == 1
    sweeps = list(csv.DictReader(s.open()))
    verdicts = list(csv.DictReader(v.open()))
    assert len(data["sweeps"]) == len(sweeps) and len(data["verdicts"]) == len(verdicts)
    for a, b in zip(data["sweeps"], sweeps):
        assert a["scenario"] == b["scenario"]
        assert a["q"] == "inf" and b["q"] == "inf"
        assert float(a["lambda"]) == float(b["lambda"])
        assert a["norm"] == float(b["norm"])  # 17 digits survive the round trip
    for a, b in zip(data["verdicts"], verdicts):
        assert a["pass"] is (b["pass"] == "true")
        assert (a["r2"] is None) == (b["r2"] == "nan")


def test_golden_sweep_csv(capsys, tmp_path):
    out = tmp_path / "s.csv"
    code, _, _ = run_cli(capsys, DILATION + ["--sweep-csv", str(out)])
    assert code == 0
    assert out.read_bytes() == GOLDEN.read_bytes()


def test_golden_values_follow_closed_form():
    rows = list(csv.DictReader(GOLDEN.open()))
    assert len(rows) == 33
    for row in rows:
        c = float(row["lambda"]) ** 2  # exp(-pi lam^2 x^2)
        # ||exp(-pi c x^2)||_{W(L^2,L^2)} with the Gaussian window, by completing the square
        expected = (2 * (1 + c)) ** -0.25 * (2 * c / (1 + c)) ** -0.25
        assert float(row["norm"]) == pytest.approx(expected, rel=1e-14)


def test_runs_are_byte_identical(capsys, tmp_path):
    paths = [tmp_path / f"run{i}.csv" for i in range(2)]
    for path in paths:
        assert run_cli(capsys, ["convolution", "--p", "2", "--q", "2", "--p1", "1", "--q1", "2",
                                "--p2", "2", "--q2", "1", "--threads", "4", "--sweep-csv", str(path)])[0] == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_norm_subcommand(capsys):
    code, out, _ = run_cli(capsys, ["norm", "--a", "1", "--b", "1", "--p", "2", "--q", "1", "--n", "1024", "--dx", "0.0625"])
    assert code == 0
    assert "PASS" in out


def test_weak_flag(capsys):
    code, out, _ = run_cli(capsys, DILATION + ["--weak"])
    assert code == 0
    assert "weak_dilation" in out
    assert sum(line.startswith("PASS") for line in out.splitlines()) == 4


@pytest.mark.parametrize(
    "argv",
    [
        ["product", "--p", "1", "--q", "1", "--p1", "2", "--q1", "1", "--p2", "2", "--q2", "1"],
        ["schrodinger", "--p", "4", "--q", "2"],
        ["schrodinger", "--p", "1", "--q", "2"],  # necessity check still agrees with the index
    ],
)
def test_subcommands_pass(capsys, argv):
    code, out, _ = run_cli(capsys, argv)
    assert code == 0, out


def test_infinite_exponents_in_sweep_rows():
    results = cli.run(cli.resolve_config("dilation", {}, {"p": "1", "q": "inf"}, env={}))
    assert all(math.isinf(r["q"]) for r in cli.sweep_rows(results))
