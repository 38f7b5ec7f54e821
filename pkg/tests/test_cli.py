"""Command-line entry points, one smoke run per subcommand."""

import csv
import subprocess
import sys

from rootshare import cli


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def test_rsqrt_sweep(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    code = cli.main(["rsqrt-sweep", "--count", "50", "--out", str(out)])
    assert code == 0
    rows = _read_csv(out)
    assert rows[0] == ["index", "x", "value", "rel_err"]
    assert len(rows) == 51
    for _, x, y, e in rows[1:]:
        assert float(e) <= 1e-2
        assert float(x) > 0 and float(y) > 0
    assert "50/50" in capsys.readouterr().out


def test_closeness_sweep(tmp_path, capsys):
    out = tmp_path / "closeness.csv"
    code = cli.main(["closeness-sweep", "--gaps", "0,6", "--trials", "20",
                     "--out", str(out)])
    assert code == 0
    rows = _read_csv(out)
    assert rows[0] == ["gap", "trials", "converged", "mean_rel_err"]
    assert [r[0] for r in rows[1:]] == ["0", "6"]
    assert all(r[1] == "20" for r in rows[1:])
    assert int(rows[1][2]) > int(rows[2][2])


def test_comm_report(tmp_path, capsys):
    out = tmp_path / "report.csv"
    code = cli.main(["comm-report", "--scenario", "activation",
                     "--out", str(out)])
    assert code == 0
    rows = _read_csv(out)
    assert rows[0] == ["scenario", "method", "kind", "unit", "online_bytes",
                       "rounds", "muls"]
    methods = {r[1] for r in rows[1:]}
    assert {"rootshare", "lut", "taylor", "crypten"} <= methods


def test_toy_infer_both_modes(tmp_path, capsys):
    out = tmp_path / "infer.csv"
    code = cli.main(["toy-infer", "--seq", "4", "--dim", "8", "--ffn", "16",
                     "--mode", "both", "--out", str(out)])
    assert code == 0
    rows = _read_csv(out)
    assert rows[0] == ["row", "col", "plain", "shared", "abs_diff"]
    assert len(rows) == 1 + 4 * 8
    printed = capsys.readouterr().out
    assert "max abs plain/shared difference" in printed


def test_toy_infer_plain_mode(tmp_path):
    out = tmp_path / "plain.csv"
    code = cli.main(["toy-infer", "--seq", "2", "--dim", "4", "--ffn", "8",
                     "--mode", "plain", "--out", str(out)])
    assert code == 0
    rows = _read_csv(out)
    assert rows[0] == ["row", "col", "value"]
    assert len(rows) == 1 + 2 * 4


def test_flood_ablation_cli(tmp_path, capsys):
    out = tmp_path / "ablation.csv"
    code = cli.main(["flood-ablation", "--gap", "6", "--trials", "15",
                     "--out", str(out)])
    assert code == 0
    rows = _read_csv(out)
    assert rows[0] == ["arm", "gap", "trials", "converged", "rate"]
    by_arm = {r[0]: float(r[4]) for r in rows[1:]}
    assert by_arm["with-flood"] > by_arm["without-flood"]


def test_config_file_flows_into_run(tmp_path):
    cfg_path = tmp_path / "proto.cfg"
    cfg_path.write_text("n = 2\n")
    out = tmp_path / "sweep.csv"
    code = cli.main(["rsqrt-sweep", "--count", "10", "--config",
                     str(cfg_path), "--out", str(out)])
    assert code == 0


def test_missing_config_file_fails_cleanly(tmp_path, capsys):
    out = tmp_path / "never.csv"
    code = cli.main(["rsqrt-sweep", "--config", str(tmp_path / "nope.cfg"),
                     "--out", str(out)])
    assert code == 2
    assert "error:" in capsys.readouterr().err
    assert not out.exists()


def test_installed_console_script(tmp_path):
    out = tmp_path / "script.csv"
    result = subprocess.run(
        ["rootshare", "rsqrt-sweep", "--count", "5", "--out", str(out)],
        capture_output=True, text=True, timeout=120)
    assert result.returncode == 0, result.stderr
    assert out.exists()


def test_module_invocation(tmp_path):
    out = tmp_path / "module.csv"
    result = subprocess.run(
        [sys.executable, "-m", "rootshare.cli", "rsqrt-sweep", "--count",
         "5", "--out", str(out)],
        capture_output=True, text=True, timeout=120)
    assert result.returncode == 0, result.stderr
    assert out.exists()
