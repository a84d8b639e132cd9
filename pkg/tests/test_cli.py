import json
from fractions import Fraction

import numpy as np
import pytest

from opinion_kinetics import cli, io
from opinion_kinetics.equilibrium import VOLCANO_MU


def run(*argv):
    return cli.main(list(argv))


class TestMuParsing:
    def test_forms(self):
        assert cli.parse_mu("0.25") == 0.25
        assert cli.parse_mu("2/3") == Fraction(2, 3)
        assert cli.parse_mu("1-1/sqrt2") == pytest.approx(VOLCANO_MU)

    def test_bad_value(self):
        with pytest.raises(cli.UsageError):
            cli.parse_mu("two thirds")


class TestCantorCommand:
    def test_json_example(self, tmp_path):
        out = tmp_path / "c.json"
        assert run("cantor", "--mu", "2/3", "--levels", "2",
                   "--format", "json", "--out", str(out)) == 0
        payload = json.loads(out.read_text())
        assert len(payload["intervals"]) == 4
        assert Fraction(payload["total_length"]) == Fraction(8, 9)
        assert payload["hausdorff_dim"] == pytest.approx(np.log(2) / np.log(3))

    def test_csv_format(self, tmp_path):
        out = tmp_path / "c.csv"
        assert run("cantor", "--mu", "3/4", "--levels", "1",
                   "--format", "csv", "--out", str(out)) == 0
        body = [ln for ln in out.read_text().splitlines() if not ln.startswith("#")]
        assert body[0] == "a,b,length"
        assert len(body) == 3

    def test_domain_error_exit_code(self, tmp_path, capsys):
        assert run("cantor", "--mu", "0.4", "--levels", "2") == 1
        assert "error" in capsys.readouterr().err


class TestEquilibriumCommand:
    def test_rerun_is_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (a, b):
            assert run("equilibrium", "--mu", "0.5", "--m0", "0", "--n", "5000",
                       "--seed", "7", "--out", str(out)) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_banner_and_readback(self, tmp_path):
        out = tmp_path / "s.csv"
        run("equilibrium", "--mu", "0.3", "--n", "200", "--seed", "1",
            "--out", str(out))
        first = out.read_text().splitlines()[0]
        assert first.startswith("# opinion-kinetics v")
        sample = io.read_samples_csv(out)
        assert len(sample) == 200

    def test_histogram_output(self, tmp_path):
        out = tmp_path / "h.csv"
        run("equilibrium", "--mu", "0.5", "--n", "20000", "--seed", "2",
            "--bins", "40", "--out", str(out))
        x, rho = io.read_density_csv(out)
        assert len(x) == 40
        assert np.sum(rho) * (2.0 / 40) == pytest.approx(1.0, abs=1e-9)


class TestSimulationCommands:
    def test_abm_smoke(self, tmp_path):
        out = tmp_path / "abm.csv"
        assert run("simulate-abm", "--mu", "0.3", "--n", "500", "--t-end", "1",
                   "--seed", "3", "--out", str(out)) == 0
        assert len(io.read_samples_csv(out)) == 500

    def test_mf_multi_snapshot(self, tmp_path):
        out = tmp_path / "mf.csv"
        assert run("simulate-mf", "--mu", "0.3", "--n", "400", "--t-end", "2",
                   "--snapshots", "1,2", "--seed", "3", "--out", str(out)) == 0
        assert len(io.read_samples_csv(tmp_path / "mf_t1.csv")) == 400
        assert len(io.read_samples_csv(tmp_path / "mf_t2.csv")) == 400

    def test_pde_smoke(self, tmp_path):
        out = tmp_path / "rho.csv"
        assert run("solve-pde", "--mu", "0.3", "--t-end", "0.5", "--dx", "0.001",
                   "--out", str(out)) == 0
        x, rho = io.read_density_csv(out)
        assert len(x) == 2001
        assert np.trapezoid(rho, x) == pytest.approx(1.0, abs=1e-6)

    def test_spectral_smoke(self, tmp_path):
        out = tmp_path / "spec.csv"
        assert run("solve-spectral", "--mu", "0.25", "--xi-top", "2",
                   "--depth", "20", "--t-end", "5", "--out", str(out)) == 0
        body = [ln for ln in out.read_text().splitlines() if not ln.startswith("#")]
        assert body[0] == "xi,re,im"
        assert len(body) == 22

    def test_config_file_precedence(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"mu": 0.3, "t_end": 0.5, "seed": 5, "n": 123}))
        out = tmp_path / "s.csv"
        assert run("simulate-mf", "--config", str(cfg), "--n", "77",
                   "--out", str(out)) == 0
        # CLI flag wins over config for n; config supplies the rest
        assert len(io.read_samples_csv(out)) == 77


class TestMetricsCommand:
    def test_w1(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        io.write_samples_csv(a, _samples([0.0, 1.0]), {})
        io.write_samples_csv(b, _samples([0.5, 0.5]), {})
        assert run("metrics", "w1", str(a), str(b)) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["value"] == pytest.approx(0.5)

    def test_ks_uniform_json_out(self, tmp_path):
        a = tmp_path / "a.csv"
        io.write_samples_csv(a, _samples([0.0]), {})
        res = tmp_path / "r.json"
        assert run("metrics", "ks-uniform", str(a), "--out", str(res)) == 0
        assert json.loads(res.read_text())["value"] == pytest.approx(0.5)

    def test_needs_second_input(self, tmp_path, capsys):
        a = tmp_path / "a.csv"
        io.write_samples_csv(a, _samples([0.1]), {})
        assert run("metrics", "w1", str(a)) == 64


class TestSweepCommand:
    def test_variance_grid_with_error_cell(self, tmp_path, capsys):
        out_dir = tmp_path / "sweep"
        code = run("sweep", "--command", "equilibrium",
                   "--mu", "0.25,1-1/sqrt2,0.4,1.5", "--m0", "0",
                   "--n", "100000", "--seed", "11", "--out-dir", str(out_dir))
        assert code == 1  # the mu=1.5 cell must be recorded as an error
        lines = (out_dir / "summary.csv").read_text().splitlines()
        rows = [ln.split(",") for ln in lines if ln and not ln.startswith("#")][1:]
        assert len(rows) == 4
        by_mu = {float(r[1]): r for r in rows}
        assert by_mu[1.5][3] == "error"
        for mu in (0.25, VOLCANO_MU, 0.4):
            row = by_mu[round(mu, 12) if mu != VOLCANO_MU else mu]
            assert row[3] == "ok"
            assert abs(float(row[5]) - mu / (2 - mu)) < 0.003

    def test_single_cell_matches_direct_command(self, tmp_path):
        out_dir = tmp_path / "one"
        assert run("sweep", "--command", "equilibrium", "--mu", "0.3", "--m0", "0",
                   "--n", "4000", "--seed", "9", "--out-dir", str(out_dir)) == 0
        from opinion_kinetics.core import derive_seed
        from opinion_kinetics.equilibrium import sample_equilibrium
        direct = sample_equilibrium(0.3, 0.0, 1e-9, 4000, derive_seed(9, 0))
        cell = io.read_samples_csv(out_dir / "cell_000.csv")
        np.testing.assert_array_equal(cell.values, direct.values)

    def test_worker_count_invariance(self, tmp_path, monkeypatch):
        outs = []
        for threads, name in (("1", "serial"), ("4", "threaded")):
            monkeypatch.setenv("OPK_THREADS", threads)
            out_dir = tmp_path / name
            assert run("sweep", "--command", "equilibrium", "--mu", "0.3,0.6",
                       "--m0", "0,0.2", "--n", "3000", "--seed", "5",
                       "--out-dir", str(out_dir)) == 0
            outs.append((out_dir / "summary.csv").read_bytes())
        assert outs[0] == outs[1]


class TestVerifyCommand:
    def test_subset_report(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        assert run("verify", "--checks", "11,13", "--out", str(out)) == 0
        report = json.loads(out.read_text())
        assert report["overall_pass"] is True
        assert [c["check_id"] for c in report["checks"]] == ["11-sine-product",
                                                             "13-moment-quadrature"]
        stdout = capsys.readouterr().out
        assert "[PASS] 11-sine-product" in stdout


class TestUsageErrors:
    def test_unknown_subcommand(self):
        assert run("frobnicate") == 64

    def test_unknown_flag(self):
        assert run("cantor", "--mu", "2/3", "--levels", "1", "--nope") == 64

    def test_missing_params(self, tmp_path):
        assert run("simulate-mf", "--n", "10", "--out", str(tmp_path / "x.csv")) == 64


def _samples(values):
    from opinion_kinetics.core import SampleSet
    return SampleSet(np.asarray(values, dtype=float))
