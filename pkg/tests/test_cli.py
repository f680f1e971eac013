import json

import pytest

from skembed.cli import (
    EX_MISSING,
    EX_NON_INTEGRABLE,
    EX_OK,
    EX_USAGE,
    RunConfig,
    main,
)

FAST = [
    "--n-coeffs", "256",
    "--grid-size", "4096",
    "--boundary-resolution", "2048",
]


def read_result(path):
    return json.loads(path.read_text(encoding="utf-8"))["result"]


class TestRunConfig:
    def test_file_round_trip(self, tmp_path):
        config = RunConfig(dist="heavy-tail", n_coeffs=512, step_size=5e-4, binary=True, seed=77)
        path = tmp_path / "run.cfg"
        config.to_file(path)
        assert RunConfig.from_file(path) == config

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("bogus=1\n", encoding="utf-8")
        with pytest.raises(Exception):
            RunConfig.from_file(path)

    def test_validation(self):
        with pytest.raises(Exception):
            RunConfig(n_coeffs=-1).validate()
        with pytest.raises(Exception):
            RunConfig(dist="cauchy").validate()
        RunConfig().validate()

    def test_flags_override_file(self, tmp_path, capsys):
        path = tmp_path / "run.cfg"
        RunConfig(dist="uniform", a=1.0, n_coeffs=256, grid_size=4096, boundary_resolution=2048,
                  out_dir=str(tmp_path)).to_file(path)
        code = main(["check", "--config", str(path), "--dist", "heavy-tail"])
        assert code == EX_OK
        out = capsys.readouterr().out
        assert "heavy-tail" in out


class TestCheck:
    def test_uniform_exit_zero(self, tmp_path):
        assert main(["check", "--dist", "uniform", "--a", "1", "--out-dir", str(tmp_path), *FAST]) == EX_OK
        data = read_result(tmp_path / "solvability.json")
        assert data["solvability"]["verdict"] == "P_GT_1"

    def test_heavy_tail_zygmund(self, tmp_path):
        assert main(["check", "--dist", "heavy-tail", "--out-dir", str(tmp_path), *FAST]) == EX_OK
        data = read_result(tmp_path / "solvability.json")
        assert data["solvability"]["verdict"] == "ZYGMUND_SUFFICIENT"

    def test_koebe_exit_three(self, tmp_path):
        assert main(["check", "--dist", "koebe", "--out-dir", str(tmp_path), *FAST]) == EX_NON_INTEGRABLE

    def test_bad_table_exit_usage(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("wrong,header\n1,2\n", encoding="utf-8")
        code = main(["check", "--dist", "table", "--table", str(bad), "--out-dir", str(tmp_path)])
        assert code == EX_USAGE

    def test_missing_table_path(self, tmp_path):
        assert main(["check", "--dist", "table", "--out-dir", str(tmp_path)]) == EX_USAGE


class TestBuild:
    def test_artifacts_written(self, tmp_path):
        assert main(["build", "--dist", "uniform", "--a", "1", "--out-dir", str(tmp_path), *FAST]) == EX_OK
        series = json.loads((tmp_path / "series.json").read_text())
        assert set(series) == {"n", "c0", "cos", "sin", "grid_size", "tail_estimate"}
        assert series["n"] == 256
        header = (tmp_path / "curve.csv").read_text().splitlines()[0]
        assert header == "theta,re,im"
        svg = (tmp_path / "domain.svg").read_text()
        assert "simple=True" in svg and 'viewBox="0 0 1000 1000"' in svg
        geometry = read_result(tmp_path / "geometry.json")["geometry"]
        assert geometry["winding_about_origin"] == 1

    def test_koebe_refused(self, tmp_path):
        assert main(["build", "--dist", "koebe", "--out-dir", str(tmp_path), *FAST]) == EX_NON_INTEGRABLE

    def test_non_simple_exit_four(self, tmp_path, monkeypatch):
        import skembed.cli as cli
        from skembed.geometry import SimplicityResult

        monkeypatch.setattr(cli, "is_simple", lambda c: SimplicityResult(False, (3, 17), ()))
        code = main(["build", "--dist", "uniform", "--a", "1", "--out-dir", str(tmp_path), *FAST])
        assert code == 4
        svg = (tmp_path / "domain.svg").read_text()
        assert "simple=False" in svg  # crossing embedded in the artifact title

    def test_heavy_truncation_recorded(self, tmp_path):
        assert main(["build", "--dist", "heavy-tail", "--out-dir", str(tmp_path), *FAST]) == EX_OK
        geometry = read_result(tmp_path / "geometry.json")["geometry"]
        assert geometry["truncation"]["tail_mass"] < 1e-3


class TestSampleSimulate:
    def test_sample_exact(self, tmp_path):
        code = main([
            "sample", "--dist", "uniform", "--a", "1", "--out-dir", str(tmp_path),
            "--n-samples", "2000", "--seed", "5", *FAST,
        ])
        assert code == EX_OK
        sim = read_result(tmp_path / "simulation.json")
        assert sim["ks"][0]["pass"] is True
        assert set(sim["ks"][0]) == {"test", "statistic", "band", "pass", "n"}
        lines = (tmp_path / "samples_exact.csv").read_text().splitlines()
        assert lines[0] == "method,stream,index,re,im,tau"
        assert len(lines) == 2001

    def test_sample_koebe_closed_form(self, tmp_path):
        code = main([
            "sample", "--dist", "koebe", "--out-dir", str(tmp_path),
            "--n-samples", "5000", "--seed", "5",
        ])
        assert code == EX_OK
        sim = read_result(tmp_path / "simulation.json")
        assert sim["ks"][0]["pass"] is True

    def test_simulate_and_report(self, tmp_path):
        args = ["--dist", "uniform", "--a", "1", "--out-dir", str(tmp_path), *FAST]
        assert main(["check", *args]) == EX_OK
        assert main(["build", *args]) == EX_OK
        code = main([
            "simulate", *args, "--n-samples", "400", "--step-size", "1e-3", "--seed", "5",
        ])
        assert code == EX_OK
        sim = read_result(tmp_path / "simulation.json")
        assert sim["ito_consistency"]["pass"] is True
        assert all(frag["pass"] for frag in sim["ks"])
        assert main(["report", "--out-dir", str(tmp_path)]) == EX_OK
        report = read_result(tmp_path / "report.json")
        assert report["missing"] == []

    def test_binary_flag(self, tmp_path):
        code = main([
            "sample", "--dist", "uniform", "--a", "1", "--out-dir", str(tmp_path),
            "--n-samples", "100", "--binary", *FAST,
        ])
        assert code == EX_OK
        assert (tmp_path / "samples_exact.bin").exists()

    def test_heavy_tail_full_run_bias_note(self, tmp_path):
        args = ["--dist", "heavy-tail", "--out-dir", str(tmp_path), *FAST]
        assert main(["check", *args]) == EX_OK
        assert main(["build", *args]) == EX_OK
        assert main(["sample", *args, "--n-samples", "2000", "--seed", "3"]) == EX_OK
        assert main(["report", "--out-dir", str(tmp_path)]) == EX_OK
        sim = read_result(tmp_path / "simulation.json")
        assert any("tail bound" in note for note in sim["bias_notes"])

    def test_step_budget_exit_five(self, tmp_path, monkeypatch):
        import skembed.cli as cli
        from skembed.errors import StepBudgetError

        def exhausted(domain, step, n, stream, step_budget=10**8):
            raise StepBudgetError("budget gone", partial=None)

        monkeypatch.setattr(cli, "euler_exit_samples", exhausted)
        code = main([
            "simulate", "--dist", "uniform", "--a", "1", "--out-dir", str(tmp_path),
            "--n-samples", "50", "--step-size", "1e-3", *FAST,
        ])
        assert code == 5
        # exact-sampler results are still preserved on disk
        assert (tmp_path / "samples_exact.csv").exists()
        assert (tmp_path / "simulation.json").exists()

    def test_not_established_exit_two(self, tmp_path, monkeypatch):
        import skembed.cli as cli
        from skembed.solvability import SolvabilityReport, Verdict

        fake = SolvabilityReport({1.0: 0.5}, "diverging", "diverging", Verdict.NOT_ESTABLISHED)
        monkeypatch.setattr(cli, "classify", lambda *a, **k: fake)
        code = main(["check", "--dist", "uniform", "--a", "1", "--out-dir", str(tmp_path), *FAST])
        assert code == 2

    def test_streams_partition(self, tmp_path):
        code = main([
            "sample", "--dist", "uniform", "--a", "1", "--out-dir", str(tmp_path),
            "--n-samples", "100", "--streams", "4", "--threads", "2", *FAST,
        ])
        assert code == EX_OK
        lines = (tmp_path / "samples_exact.csv").read_text().splitlines()[1:]
        streams = {line.split(",")[1] for line in lines}
        assert streams == {"0", "1", "2", "3"}


class TestReportPlot:
    def test_empty_directory_exit_six(self, tmp_path):
        assert main(["report", "--out-dir", str(tmp_path)]) == EX_MISSING
        report = read_result(tmp_path / "report.json")
        assert set(report["missing"]) == {"solvability.json", "geometry.json", "simulation.json"}

    def test_plot_missing_curve(self, tmp_path):
        assert main(["plot", "--out-dir", str(tmp_path)]) == EX_MISSING

    def test_plot_after_build(self, tmp_path):
        assert main(["build", "--dist", "uniform", "--a", "1", "--out-dir", str(tmp_path), *FAST]) == EX_OK
        (tmp_path / "domain.svg").unlink()
        assert main(["plot", "--out-dir", str(tmp_path)]) == EX_OK
        assert (tmp_path / "domain.svg").exists()


class TestDeterminism:
    def test_byte_identical_runs(self, tmp_path):
        outputs = []
        for sub in ("one", "two"):
            out = tmp_path / sub
            code = main([
                "simulate", "--dist", "uniform", "--a", "1", "--out-dir", str(out),
                "--n-samples", "300", "--step-size", "1e-3", "--seed", "9", *FAST,
            ])
            assert code == EX_OK
            samples = (out / "samples_euler.csv").read_bytes() + (out / "samples_exact.csv").read_bytes()
            payload = json.dumps(read_result(out / "simulation.json"), sort_keys=True)
            outputs.append((samples, payload.replace(str(out), "OUT")))
        assert outputs[0] == outputs[1]

    def test_env_var_default_out(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SKEMBED_OUT", str(tmp_path / "envout"))
        assert main(["check", "--dist", "uniform", "--a", "1", *FAST]) == EX_OK
        assert (tmp_path / "envout" / "solvability.json").exists()
