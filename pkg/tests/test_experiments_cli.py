"""Canned experiments and the command line."""
import os
import subprocess
import sys

import numpy as np
import pytest
import yaml

from breatherlab import cli
from breatherlab import experiments as ex
from breatherlab.breathers import BreatherSpec
from breatherlab.diagnostics import read_csv
from breatherlab.grid import Grid1D
from breatherlab.solver import SolverConfig
from test_symbols import TestFaultInjection


def write_cfg(path, **kw):
    raw = {"schema_version": 1}
    raw.update(kw)
    path.write_text(yaml.safe_dump(raw))
    return str(path)


@pytest.fixture
def zero_cfg(tmp_path):
    return write_cfg(tmp_path / "zero.yaml", grid={"L": 40, "N": 128},
                     solver={"dt": 0.01, "t_end": 0.5}, initial={"type": "zero"})


class TestSimulate:
    def test_zero_run(self, tmp_path, zero_cfg):
        out = tmp_path / "o"
        assert cli.main(["simulate", "--config", zero_cfg, "--out", str(out)]) == 0
        data = read_csv(out / "trajectory.csv")
        for k in ("mass_w", "energy_w", "hs_norm", "linf"):
            assert np.all(data[k] == 0)
        assert (out / "final.chk").is_file()

    def test_deterministic_bytes(self, tmp_path):
        c = write_cfg(tmp_path / "r.yaml", grid={"L": 40, "N": 128}, seed=11,
                      solver={"dt": 0.01, "t_end": 0.3}, initial={"type": "random", "amplitude": 0.05})
        cli.main(["simulate", "--config", c, "--out", str(tmp_path / "a")])
        cli.main(["simulate", "--config", c, "--out", str(tmp_path / "b")])
        assert (tmp_path / "a/trajectory.csv").read_bytes() == (tmp_path / "b/trajectory.csv").read_bytes()
        cli.main(["simulate", "--config", c, "--out", str(tmp_path / "c"), "--seed", "12"])
        assert (tmp_path / "a/trajectory.csv").read_bytes() != (tmp_path / "c/trajectory.csv").read_bytes()

    def test_blowup_exit_code(self, tmp_path):
        c = write_cfg(tmp_path / "b.yaml", grid={"L": 40, "N": 128},
                      solver={"dt": 0.01, "t_end": 1, "blowup_threshold": 1e-3},
                      initial={"type": "breather", "kind": "peregrine"})
        out = tmp_path / "o"
        assert cli.main(["simulate", "--config", c, "--out", str(out)]) == 2
        assert "BlowupDetected" in (out / "summary.json").read_text()

    def test_picard_exit_code(self, tmp_path):
        c = write_cfg(tmp_path / "p.yaml", grid={"L": 80, "N": 512},
                      solver={"dt": 0.5, "t_start": -1, "t_end": 0, "picard_max_iters": 10},
                      initial={"type": "breather", "kind": "peregrine"})
        assert cli.main(["simulate", "--config", c, "--out", str(tmp_path / "o")]) == 4

    @pytest.mark.parametrize("raw", [
        {"schema_version": 3},
        {"schema_version": 1, "initial": {"type": "breather", "kind": "akhmediev", "a": 0.3}},
    ])
    def test_invalid_config_exit_code(self, tmp_path, raw):
        p = tmp_path / "x.yaml"
        p.write_text(yaml.safe_dump(raw))
        assert cli.main(["simulate", "--config", str(p), "--out", str(tmp_path / "o")]) == 3

    def test_usage_error_is_config_error(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["simulate", "--nope"])
        assert exc.value.code == 3

    def test_linear_and_project_mean_flags(self, tmp_path):
        c = write_cfg(tmp_path / "m.yaml", grid={"L": 40, "N": 128},
                      solver={"dt": 0.01, "t_end": 0.5},
                      initial={"type": "single_mode", "k": 0.0 + 2 * np.pi / 40, "amplitude": 1e-3})
        out = tmp_path / "o"
        assert cli.main(["simulate", "--config", c, "--out", str(out), "--linear", "--project-mean"]) == 0
        assert np.max(np.abs(read_csv(out / "trajectory.csv")["zero_mode_re"])) < 1e-14

    def test_peregrine_heatmap_peak(self, tmp_path):
        c = write_cfg(tmp_path / "q.yaml", grid={"L": 80, "N": 512},
                      solver={"dt": 0.005, "t_start": -0.5, "t_end": 0.0, "snapshot_every": 0.1},
                      initial={"type": "breather", "kind": "peregrine"},
                      output={"field_csv": True, "field_stride": 2})
        out = tmp_path / "o"
        assert cli.main(["simulate", "--config", c, "--out", str(out)]) == 0
        f = read_csv(out / "field.csv")
        i = np.argmax(f["abs_u"])
        assert f["abs_u"][i] == pytest.approx(3.0, abs=1e-3)
        assert f["t"][i] == 0.0 and f["x"][i] == 0.0
        png = tmp_path / "heat.png"
        assert cli.main(["plot", str(out / "field.csv"), "--out", str(png)]) == 0
        assert png.stat().st_size > 0

    def test_checkpoint_restart(self, tmp_path):
        c1 = write_cfg(tmp_path / "a.yaml", grid={"L": 40, "N": 128},
                       solver={"dt": 0.01, "t_end": 0.2}, initial={"type": "random", "amplitude": 0.05})
        cli.main(["simulate", "--config", c1, "--out", str(tmp_path / "a")])
        c2 = write_cfg(tmp_path / "b.yaml", grid={"L": 40, "N": 128},
                       solver={"dt": 0.01, "t_start": 0.2, "t_end": 0.4},
                       initial={"type": "checkpoint", "path": "a/final.chk"})
        assert cli.main(["simulate", "--config", c2, "--out", str(tmp_path / "b")]) == 0
        c3 = write_cfg(tmp_path / "c.yaml", grid={"L": 40, "N": 128},
                       solver={"dt": 0.01, "t_end": 0.4}, initial={"type": "random", "amplitude": 0.05})
        cli.main(["simulate", "--config", c3, "--out", str(tmp_path / "c")])
        b = read_csv(tmp_path / "b/trajectory.csv")
        full = read_csv(tmp_path / "c/trajectory.csv")
        assert b["hs_norm"][-1] == full["hs_norm"][-1]


class TestGrowthScan:
    def test_linear_scan_matches_theory(self, tmp_path):
        rows = ex.growth_scan([1.0, 1.2, 2.0], linear=True)
        assert [r.regime for r in rows] == ["growth", "growth", "oscillation"]
        assert rows[1].theory == pytest.approx(0.8980, abs=1e-4)
        assert all(r.abs_error < 1e-6 for r in rows)

    def test_worker_count_does_not_change_output(self, tmp_path):
        for w in ("1", "2"):
            assert cli.main(["growth-scan", "--linear", "--k", "2.0", "0.5", "--workers", w,
                             "--out", str(tmp_path / w)]) == 0
        a = (tmp_path / "1/growth_scan.csv").read_bytes()
        assert a == (tmp_path / "2/growth_scan.csv").read_bytes()
        assert a.splitlines()[1].startswith(b"0.5,")

    def test_off_grid_k_rejected(self, capsys):
        assert cli.main(["growth-scan", "--linear", "--k", "1.23", "--out", "unused"]) == 3
        assert "nearest representable: 1.2" in capsys.readouterr().err

    def test_growth_plot(self, tmp_path):
        cli.main(["growth-scan", "--linear", "--k", "1.0", "2.0", "--out", str(tmp_path)])
        png1, png2 = tmp_path / "g1.png", tmp_path / "g2.png"
        assert cli.main(["plot", str(tmp_path / "growth_scan.csv"), "--out", str(png1)]) == 0
        cli.main(["plot", str(tmp_path / "growth_scan.csv"), "--out", str(png2)])
        assert png1.read_bytes() == png2.read_bytes()

    def test_env_workers(self, monkeypatch):
        monkeypatch.setenv("BREATHERLAB_WORKERS", "3")
        assert ex.default_workers() == 3
        monkeypatch.setenv("BREATHERLAB_WORKERS", "junk")
        assert ex.default_workers() == 1


class TestInstabilityExperiments:
    def test_peregrine_small_run(self):
        rows = ex.peregrine_instability([5.0, 2.0], Grid1D(160.0, 1024), Grid1D(160.0, 1024),
                                        SolverConfig(dt=5e-3), window=1.0, full_max=2.0)
        assert [r.T for r in rows] == [2.0, 5.0]
        assert [r.shortcut for r in rows] == [False, True]
        assert rows[1].start == -1.0
        for r in rows:
            assert r.initial_l2 == pytest.approx(ex.peregrine_norm_theory(r.T), rel=1e-10)
            assert r.final_l2 == pytest.approx(ex.PEREGRINE_Q0_L2, abs=1e-3)
        assert rows[1].initial_l2 < rows[0].initial_l2

    def test_norm_formula(self):
        assert ex.peregrine_norm_theory(10.0) == pytest.approx(
            np.sqrt(4 * np.sqrt(2) * np.pi / np.sqrt(401)), rel=1e-14)
        assert ex.PEREGRINE_Q0_L2 == pytest.approx(4.216, abs=1e-3)

    def test_km_zero_perturbation(self):
        g = Grid1D(40.0, 512)
        rep = ex.km_instability(1.0, g, BreatherSpec("kuznetsov_ma", a=1.0).period / 400,
                                {"scale": 0.0})
        assert np.all(rep.separation == 0)

    def test_km_perturbation_grows(self):
        g = Grid1D(40.0, 512)
        rep = ex.km_instability(1.0, g, BreatherSpec("kuznetsov_ma", a=1.0).period / 400)
        assert rep.ratio_final > 1
        assert rep.ratio_final == pytest.approx(4.984, rel=1e-3)  # regression value
        assert rep.control_return_error < 1e-4

    def test_km_cli(self, tmp_path, capsys):
        c = write_cfg(tmp_path / "k.yaml", grid={"L": 40, "N": 256}, solver={"dt": 0.01},
                      params={"a": 1.0, "periods": 0.5})
        assert cli.main(["km-instability", "--config", c, "--out", str(tmp_path)]) == 0
        data = read_csv(tmp_path / "km_instability.csv")
        assert data["ratio"][0] == 1.0
        assert "approximation" in capsys.readouterr().out
        assert cli.main(["km-instability", "--a", "0.4", "--out", str(tmp_path)]) == 3


class TestInvariantsAndEval:
    def test_default_suite_passes(self, tmp_path):
        assert cli.main(["check-invariants", "--out", str(tmp_path)]) == 0
        text = (tmp_path / "invariants.txt").read_text()
        wr = [l for l in text.splitlines() if "wronskian" in l][0]
        assert float(wr.split("\t")[2]) <= 1e-12

    def test_fault_is_caught(self):
        rep = ex.check_invariants(kernel_funcs=TestFaultInjection.unguarded())
        assert not rep.passed
        failed = {r.name for r in rep.results if not r.passed}
        assert "band_edge_series" in failed

    def test_breather_eval(self, tmp_path, capsys):
        assert cli.main(["breather-eval", "--kind", "peregrine", "--out", str(tmp_path)]) == 0
        data = read_csv(tmp_path / "breather.csv")
        i = np.argmax(data["abs_u"])
        assert data["abs_u"][i] == 3.0 and data["x"][i] == 0.0
        assert cli.main(["breather-eval", "--kind", "kuznetsov_ma", "--a", "0.3",
                         "--out", str(tmp_path)]) == 3


class TestPlot:
    def test_empty_csv_writes_nothing(self, tmp_path):
        p = tmp_path / "e.csv"
        p.write_text("")
        assert cli.main(["plot", str(p), "--out", str(tmp_path / "e.png")]) == 3
        assert not (tmp_path / "e.png").exists()

    def test_schema_mismatch(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("a,b\n1,2\n")
        assert cli.main(["plot", str(p), "--out", str(tmp_path / "x.png")]) == 3
        assert not (tmp_path / "x.png").exists()

    def test_norms_plot(self, tmp_path, zero_cfg):
        cli.main(["simulate", "--config", zero_cfg, "--out", str(tmp_path)])
        assert cli.main(["plot", str(tmp_path / "trajectory.csv"), "--kind", "norms",
                         "--out", str(tmp_path / "n.png")]) == 0


def test_console_script(tmp_path):
    env = dict(os.environ, BREATHERLAB_WORKERS="1")
    r = subprocess.run([sys.executable, "-m", "breatherlab.cli", "breather-eval", "--kind", "stokes",
                        "--L", "10", "--N", "16", "--out", str(tmp_path)],
                       capture_output=True, text=True, env=env)
    assert r.returncode == 0, r.stderr
    assert "residual" in r.stdout
