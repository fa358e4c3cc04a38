"""End-to-end runs of the sloshctl command surface."""

import os
import subprocess
import sys

import numpy as np
import pytest

from sloshwaves.cli import ConfigError, parse_sections, resolve_config, run_cli

CONFIGS = os.path.join(os.path.dirname(__file__), "..", "configs")


def _cfg(tmp_path, body, name="run.cfg"):
    path = tmp_path / name
    path.write_text(body)
    return str(path)


MINI_SIM = """
[run]
mode = simulate
n = 16
t = 0.2
dt = 0.01
[initial]
kind = coeffs
values = 0, 1, 0.5
"""

MINI_EIGEN = """
[run]
mode = eigen
n = 32
count = 4
"""

MINI_CONTROL = """
[run]
mode = control
n = 16
t = 1.0
steps = 50
[control]
window_lo = -0.7
window_hi = -0.05
eps = 1e-4
max_iter = 120
[target]
kind = manufactured
"""

MINI_VERIFY = """
[run]
mode = verify
checks = basis-roundtrip, quadform-diagonal
"""


class TestParser:
    def test_sections_and_keys(self):
        got = parse_sections("# c\n[a]\nx = 1\ny= 2\n\n[b]\nz =3\n")
        assert got == {"a": {"x": "1", "y": "2"}, "b": {"z": "3"}}

    def test_duplicate_section(self):
        with pytest.raises(ConfigError, match="duplicate section"):
            parse_sections("[a]\n[a]\n")

    def test_duplicate_key(self):
        with pytest.raises(ConfigError, match="duplicate key"):
            parse_sections("[a]\nx = 1\nx = 2\n")

    def test_key_outside_section(self):
        with pytest.raises(ConfigError, match="outside"):
            parse_sections("x = 1\n")

    def test_junk_line(self):
        with pytest.raises(ConfigError, match="expected"):
            parse_sections("[a]\nnot a pair\n")

    def test_unknown_key_rejected(self):
        secs = parse_sections("[run]\nmode = eigen\nwat = 1\n")
        with pytest.raises(ConfigError, match="unknown key"):
            resolve_config("eigen", secs)

    def test_unknown_section_rejected(self):
        secs = parse_sections("[run]\nmode = eigen\n[extra]\nx = 1\n")
        with pytest.raises(ConfigError, match="unknown section"):
            resolve_config("eigen", secs)

    def test_defaults_applied(self):
        secs = parse_sections("[run]\nmode = eigen\n")
        got = resolve_config("eigen", secs)
        assert got["run"]["n"] == 128
        assert got["run"]["count"] == 8
        assert got["output"]["dir"] == "."


class TestRuns:
    def test_simulate(self, tmp_path):
        out = tmp_path / "out"
        code = run_cli(["simulate", "--config", _cfg(tmp_path, MINI_SIM),
                        "--out", str(out)])
        assert code == 0
        assert (out / "trajectory.csv").exists()
        report = (out / "report.txt").read_text()
        assert report.startswith("status=ok\nmode=simulate\n")
        assert "run.dt=0.01" in report
        assert "initial.kind=coeffs" in report

    def test_eigen(self, tmp_path):
        out = tmp_path / "out"
        code = run_cli(["eigen", "--config", _cfg(tmp_path, MINI_EIGEN),
                        "--out", str(out)])
        assert code == 0
        rows = (out / "modes.csv").read_text().splitlines()
        assert rows[0].startswith("lambda,a_0,")
        assert len(rows) == 5
        lam = np.array([float(r.split(",")[0]) for r in rows[1:]])
        assert abs(lam[0]) < 1e-12 and np.all(np.diff(lam) > 0)

    def test_control(self, tmp_path):
        out = tmp_path / "out"
        code = run_cli(["control", "--config", _cfg(tmp_path, MINI_CONTROL),
                        "--out", str(out)])
        assert code == 0
        report = (out / "report.txt").read_text()
        assert "converged=true" in report
        assert (out / "control.csv").exists()

    def test_verify_subset(self, tmp_path):
        out = tmp_path / "out"
        code = run_cli(["verify", "--config", _cfg(tmp_path, MINI_VERIFY),
                        "--out", str(out)])
        assert code == 0
        report = (out / "report.txt").read_text()
        assert "check.basis-roundtrip=pass" in report
        assert "check.quadform-diagonal=pass" in report
        assert "checks_total=2" in report
        assert "check.poincare" not in report

    def test_output_dir_from_config(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        body = MINI_EIGEN + "[output]\ndir = nested/run\n"
        code = run_cli(["eigen", "--config", _cfg(tmp_path, body)])
        assert code == 0
        assert (tmp_path / "nested" / "run" / "modes.csv").exists()

    def test_threads_env_is_ignored(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SLOSHCTL_THREADS", "7")
        out = tmp_path / "out"
        code = run_cli(["eigen", "--config", _cfg(tmp_path, MINI_EIGEN),
                        "--out", str(out)])
        assert code == 0


class TestFailureModes:
    def test_mode_mismatch(self, tmp_path, capsys):
        code = run_cli(["simulate", "--config", _cfg(tmp_path, MINI_EIGEN)])
        assert code == 2
        assert "declares mode=eigen" in capsys.readouterr().err

    def test_config_error_writes_report(self, tmp_path):
        out = tmp_path / "out"
        body = MINI_SIM + "[run2]\nx = 1\n"
        code = run_cli(["simulate", "--config", _cfg(tmp_path, body),
                        "--out", str(out)])
        assert code == 2
        report = (out / "report.txt").read_text()
        assert report.startswith("status=config-error")
        assert "unknown section" in report

    def test_missing_config_file(self, tmp_path):
        code = run_cli(["simulate", "--config", str(tmp_path / "nope.cfg")])
        assert code == 2

    def test_bad_number(self, tmp_path):
        body = "[run]\nmode = eigen\nn = many\n"
        code = run_cli(["eigen", "--config", _cfg(tmp_path, body)])
        assert code == 2

    def test_count_exceeds_basis(self, tmp_path):
        body = "[run]\nmode = eigen\nn = 8\ncount = 9\n"
        code = run_cli(["eigen", "--config", _cfg(tmp_path, body),
                        "--out", str(tmp_path / "o")])
        assert code == 2

    def test_rhs_linear_needs_c(self, tmp_path):
        body = MINI_SIM + "[rhs]\nkind = linear\n"
        code = run_cli(["simulate", "--config", _cfg(tmp_path, body)])
        assert code == 2

    def test_data_block_key_for_wrong_kind(self, tmp_path):
        body = MINI_SIM.replace("kind = coeffs\nvalues = 0, 1, 0.5",
                                "kind = zero\nmu = 0.5")
        code = run_cli(["simulate", "--config", _cfg(tmp_path, body)])
        assert code == 2

    def test_target_velocity_with_manufactured(self, tmp_path):
        body = MINI_CONTROL + "[target_velocity]\nkind = coeffs\nvalues = 1\n"
        code = run_cli(["control", "--config", _cfg(tmp_path, body)])
        assert code == 2

    def test_non_convergence_exits_3(self, tmp_path):
        body = MINI_CONTROL.replace("max_iter = 120", "max_iter = 2")
        out = tmp_path / "out"
        code = run_cli(["control", "--config", _cfg(tmp_path, body),
                        "--out", str(out)])
        assert code == 3
        report = (out / "report.txt").read_text()
        assert report.startswith("status=non-convergence")
        # the best-so-far signal is still written
        assert (out / "control.csv").exists()

    def test_unknown_check_name(self, tmp_path):
        body = "[run]\nmode = verify\nchecks = no-such-check\n"
        code = run_cli(["verify", "--config", _cfg(tmp_path, body)])
        assert code == 2

    def test_step_failure_exits_3(self, tmp_path):
        body = """
[run]
mode = simulate
n = 8
t = 2.0
dt = 1.0
[initial]
kind = coeffs
values = 1, 1, 1
[rhs]
kind = linear
c = 20
"""
        out = tmp_path / "out"
        code = run_cli(["simulate", "--config", _cfg(tmp_path, body),
                        "--out", str(out)])
        assert code == 3
        assert (out / "report.txt").read_text().startswith("status=step-failure")


def test_shipped_configs_run_deterministically(tmp_path, monkeypatch):
    # both runs of a config must produce byte-identical artifacts
    monkeypatch.chdir(tmp_path)
    for name in ("simulate", "eigen", "control", "verify"):
        cfg = os.path.join(CONFIGS, f"{name}.cfg")
        first = tmp_path / f"{name}_a"
        second = tmp_path / f"{name}_b"
        assert run_cli([name, "--config", cfg, "--out", str(first)]) == 0
        assert run_cli([name, "--config", cfg, "--out", str(second)]) == 0
        names_a = sorted(p.name for p in first.iterdir())
        assert names_a == sorted(p.name for p in second.iterdir())
        for fname in names_a:
            if fname == "report.txt":
                # reports echo the differing output paths; compare the rest
                a = [ln for ln in (first / fname).read_text().splitlines()
                     if not ln.startswith("output.dir=")]
                b = [ln for ln in (second / fname).read_text().splitlines()
                     if not ln.startswith("output.dir=")]
                assert a == b
            else:
                assert (first / fname).read_bytes() == (second / fname).read_bytes()


def test_console_entry_point(tmp_path):
    cfg = os.path.join(CONFIGS, "eigen.cfg")
    out = subprocess.run([sys.executable, "-m", "sloshwaves.cli", "eigen",
                          "--config", cfg, "--out", str(tmp_path / "o")],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert (tmp_path / "o" / "modes.csv").exists()
