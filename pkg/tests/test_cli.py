import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest

from donorspec import pipeline as pl
from donorspec.cli import main
from donorspec.dynamics import RelaxationModel, t1
from donorspec.levels import FieldConfig, d0x_transitions
from donorspec.lineshape import count_local_minima, voigt_fwhm
from donorspec.species import get_species


@pytest.fixture
def work(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("DONORSPEC_OUTDIR", raising=False)
    return tmp_path


def read_table(path):
    rows = {}
    for line in path.read_text().splitlines()[1:]:
        label, value, _ = line.split("\t")
        rows[label] = value
    return rows


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


class TestLevels:
    def test_span(self, work, capsys):
        assert main(["levels", "In", "--B_T", "7", "--geometry", "voigt", "--outdir", "o"]) == 0
        out = capsys.readouterr().out
        energies = [float(line.split("\t")[1]) for line in out.splitlines()
                    if line.startswith(("V", "H"))]
        assert len(energies) == 4
        span = (max(energies) - min(energies)) * 1e6
        expected = d0x_transitions(get_species("In"), FieldConfig(7.0)).span_ueV
        assert span == pytest.approx(expected, rel=1e-12)
        assert "two-photon" in out
        assert (work / "o" / "levels.manifest.json").exists()

    def test_zero_field(self, work, capsys):
        assert main(["levels", "In", "--B_T", "0", "--outdir", "o"]) == 0
        out = capsys.readouterr().out
        energies = {line.split("\t")[1] for line in out.splitlines() if line.startswith(("V", "H"))}
        assert len(energies) == 1

    def test_unknown_species(self, work, capsys):
        assert main(["levels", "Xx"]) == 2
        assert "unknown species" in capsys.readouterr().err

    def test_faraday_is_runtime_error(self, work):
        assert main(["levels", "In", "--B_T", "1", "--geometry", "faraday", "--outdir", "o"]) == 1


class TestSimulate:
    def test_t1_matches_formula(self, work):
        assert main(["simulate", "t1", "--species", "Ga", "--T_K", "1.5", "--outdir", "o"]) == 0
        s = pl.load_spectrum(work / "o" / "t1.tsv")
        expected = t1(RelaxationModel(get_species("Ga")), s.axis, 1.5)
        np.testing.assert_allclose(s.intensity, expected, rtol=1e-15)

    def test_cpt_ten_minima(self, work):
        assert main(["simulate", "cpt", "--species", "In", "--B_T", "7", "--outdir", "o"]) == 0
        s = pl.load_spectrum(work / "o" / "cpt.tsv")
        assert count_local_minima(s.intensity) == 10

    def test_same_seed_identical(self, work):
        args = ["simulate", "pl", "--noise_rel", "0.01", "--seed", "5"]
        assert main(args + ["--outdir", "a"]) == 0
        assert main(args + ["--outdir", "b"]) == 0
        assert (work / "a" / "pl.tsv").read_bytes() == (work / "b" / "pl.tsv").read_bytes()
        assert main(["simulate", "pl", "--noise_rel", "0.01", "--seed", "6", "--outdir", "c"]) == 0
        assert (work / "a" / "pl.tsv").read_bytes() != (work / "c" / "pl.tsv").read_bytes()

    def test_config_overrides_flags(self, work):
        (work / "c.json").write_text(json.dumps({"B_min_T": 3.0, "n_points": 4}))
        assert main(["simulate", "t1", "--n_points", "9", "--config", "c.json", "--outdir", "o"]) == 0
        s = pl.load_spectrum(work / "o" / "t1.tsv")
        assert len(s) == 4 and s.axis[0] == 3.0

    @pytest.mark.parametrize("cfg", [{"nope": 1}, {"B_T": "x"}, {"n_points": 2.5}])
    def test_config_validation(self, work, capsys, cfg):
        (work / "c.json").write_text(json.dumps(cfg))
        assert main(["simulate", "cpt", "--config", "c.json", "--outdir", "o"]) == 2
        err = capsys.readouterr().err
        assert next(iter(cfg)) in err

    def test_bad_flag(self, work):
        assert main(["simulate", "pl", "--n_points", "abc"]) == 2

    def test_manifest_rerun(self, work):
        assert main(["simulate", "recovery", "--noise_abs", "0.01", "--seed", "3", "--outdir", "a"]) == 0
        manifest = work / "a" / "simulate-recovery.manifest.json"
        assert main(["simulate", "recovery", "--config", str(manifest), "--outdir", "b"]) == 0
        for name in ("recovery.tsv", "simulate-recovery.manifest.json"):
            assert digest(work / "a" / name) == digest(work / "b" / name)
        data = json.loads(manifest.read_text())
        assert data["config"]["seed"] == 3
        assert data["outputs"]["recovery.tsv"] == digest(work / "a" / "recovery.tsv")

    def test_env_outdir(self, work, monkeypatch):
        monkeypatch.setenv("DONORSPEC_OUTDIR", str(work / "env"))
        assert main(["simulate", "antihole", "--n_points", "21"]) == 0
        assert (work / "env" / "antihole.tsv").exists()


class TestFit:
    def test_voigt_round_trip(self, work):
        assert main(["simulate", "pl", "--outdir", "o"]) == 0
        assert main(["fit", "voigt", "o/pl.tsv", "--outdir", "o"]) == 0
        rows = read_table(work / "o" / "pl.voigt.fit.tsv")
        assert float(rows["sigma_0"]) == pytest.approx(2.0, rel=1e-6)
        assert float(rows["gamma_L_0"]) == pytest.approx(0.5, rel=1e-6)
        assert float(rows["fwhm_0"]) == pytest.approx(voigt_fwhm(2.0, 0.5), rel=1e-6)
        assert rows["status"] == "converged"
        resid = pl.load_spectrum(work / "o" / "pl.voigt.residuals.tsv")
        assert np.max(np.abs(resid.intensity)) < 1e-8

    def test_cpt_comb(self, work):
        assert main(["simulate", "cpt", "--model", "comb", "--noise_rel", "0.05", "--n_points", "161",
                     "--scan_min_MHz", "-800", "--scan_max_MHz", "800", "--outdir", "o"]) == 0
        assert main(["fit", "cpt-comb", "o/cpt.tsv", "--outdir", "o"]) == 0
        rows = read_table(work / "o" / "cpt.cpt-comb.fit.tsv")
        assert float(rows["spacing"]) == pytest.approx(100.0, abs=2.0)

    def test_malformed_input(self, work, capsys):
        (work / "bad.txt").write_text("1 2\n2 x\n")
        (work / "good.txt").write_text("1 2\n2 3\n3 4\n4 5\n")
        assert main(["fit", "linear", "good.txt", "bad.txt", "--outdir", "o"]) == 3
        assert "bad.txt:2" in capsys.readouterr().err
        assert not (work / "o").exists() or not any((work / "o").iterdir())

    def test_non_convergence(self, work):
        (work / "flat.txt").write_text("".join(f"{t} 0.5\n" for t in range(10)))
        assert main(["fit", "exponential", "flat.txt", "--outdir", "o"]) == 4
        assert read_table(work / "o" / "flat.exponential.fit.tsv")["status"] == "non-decaying"

    def test_inputs_untouched(self, work):
        assert main(["simulate", "t1", "--outdir", "o"]) == 0
        before = digest(work / "o" / "t1.tsv")
        assert main(["fit", "t1-field", "o/t1.tsv", "--outdir", "f"]) == 0
        assert digest(work / "o" / "t1.tsv") == before

    def test_no_inputs(self, work):
        assert main(["fit", "voigt", "--outdir", "o"]) == 2

    def test_linear_through_origin(self, work):
        (work / "z.txt").write_text("".join(f"{b} {0.23 * b!r}\n" for b in range(1, 8)))
        assert main(["fit", "linear", "z.txt", "--through_origin", "1", "--outdir", "o"]) == 0
        assert float(read_table(work / "o" / "z.linear.fit.tsv")["slope"]) == pytest.approx(0.23, rel=1e-12)


class TestPipeline:
    def _write_spectra(self, work):
        from donorspec.lineshape import VoigtParams, synthesize_spectrum
        x = np.linspace(3.350, 3.365, 1501)
        for k, ratio in enumerate((0.5, 2.0, 4.0)):
            s = synthesize_spectrum([VoigtParams(3.3567, 2e-4, 2e-5, ratio),
                                     VoigtParams(3.3598, 2e-4, 2e-5, 1.0)], x, unit="eV")
            pl.save_spectrum(s.with_intensity(s.intensity + 5.0), work / f"s{k}.tsv")

    def test_ratio(self, work, capsys):
        self._write_spectra(work)
        args = ["pipeline", "ratio", "s2.tsv", "s0.tsv", "s1.tsv", "--background", "3.350:3.3520",
                "--background", "3.363:3.365", "--outdir", "o"]
        assert main(args) == 0
        lines = (work / "o" / "ratios.tsv").read_text().splitlines()[1:]
        assert [line.split("\t")[0] for line in lines] == ["s0", "s1", "s2"]
        ratios = [float(line.split("\t")[1]) for line in lines]
        np.testing.assert_allclose(ratios, [0.5, 2.0, 4.0], rtol=0.02)

    def test_ple(self, work):
        rng = np.random.default_rng(0)
        R = np.r_[rng.uniform(1, 29, 40), 35.0, 50.0]
        ple = 0.23 * R
        (work / "pairs.txt").write_text("".join(f"{r:.17g} {p:.17g}\n" for r, p in zip(R, ple)))
        assert main(["pipeline", "ple", "pairs.txt", "--outdir", "o"]) == 0
        rows = read_table(work / "o" / "ple_vs_ratio.tsv")
        assert float(rows["slope"]) == pytest.approx(0.23, rel=1e-12)
        assert rows["n_excluded"] == "2"


def test_module_entry_point(work):
    proc = subprocess.run([sys.executable, "-m", "donorspec", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for sub in ("levels", "simulate", "fit", "pipeline"):
        assert sub in proc.stdout


def test_no_command(work):
    assert main([]) == 2
