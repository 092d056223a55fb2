"""Acceptance criteria, one test each, with the stated tolerances and
runtime limits. Every criterion prints a single PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` or
``python tests/test_acceptance.py``.
"""

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from donorspec import pipeline as pl
from donorspec.cli import main
from donorspec.dynamics import (
    LambdaParams,
    RelaxationModel,
    antihole_spectrum,
    cpt_spectrum,
    cpt_steady_state,
    propagate,
    steady_state_density,
    t1,
)
from donorspec.dynamics.lambda_system import DensityMatrix3, _steady_state_batch
from donorspec.fitting import fit_cpt_comb, fit_linear, fit_t1_field
from donorspec.levels import FieldConfig, d0x_transitions, lifetime_limited_linewidth
from donorspec.lineshape import (
    LorentzianComb,
    count_local_minima,
    measure_fwhm,
    voigt_fwhm,
    voigt_profile,
)
from donorspec.spectrum import Spectrum
from donorspec.species import get_species

from oracles import bisect_half_width, voigt_quad

MU_B = 5.7883818060e-5

pytestmark = pytest.mark.acceptance


@contextmanager
def criterion(capsys, number, title, limit_s):
    """Collects named checks, then prints one line and asserts them."""
    checks = {}
    t0 = time.perf_counter()
    yield checks
    elapsed = time.perf_counter() - t0
    checks[f"runtime {elapsed:.2f}s < {limit_s}s"] = elapsed < limit_s
    failed = [k for k, ok in checks.items() if not ok]
    status = "PASS" if not failed else "FAIL"
    with capsys.disabled():
        detail = "; ".join(failed if failed else checks)
        print(f"\n[{status}] criterion {number}: {title}: {detail}")
    assert not failed, failed


def test_criterion_1_t1_law(capsys):
    with criterion(capsys, 1, "T1 law", 1.0) as c:
        ga = get_species("Ga")
        B = np.linspace(2.0, 7.0, 26)
        T1 = t1(RelaxationModel(ga), B, 1.5)
        c["monotone decreasing on [2, 7] T"] = bool(np.all(np.diff(T1) < 0))
        a = float(fit_t1_field(B, T1, 1.5, g_e=1.95).params[0])
        c[f"refit a = {a!r} within 1e-8 of 0.08"] = abs(a / 0.08 - 1) < 1e-8
        t_in = t1(RelaxationModel(get_species("In")), 3.0, 1.9)
        c[f"In T1(3 T, 1.9 K) = {t_in * 1e3:.1f} ms in [100, 300] ms"] = 0.100 <= t_in <= 0.300


def test_criterion_2_linewidth(capsys):
    with criterion(capsys, 2, "lifetime-limited linewidth", 0.1) as c:
        w = lifetime_limited_linewidth(1350e-12)
        c[f"{w:.2f} MHz in [115, 122]"] = 115.0 <= w <= 122.0


def test_criterion_3_cpt_comb(capsys):
    with criterion(capsys, 3, "CPT comb", 10.0) as c:
        x = np.linspace(-800.0, 800.0, 161)
        comb = LorentzianComb.equally_spaced(10, 100.0, 85.0, depth=0.5, baseline=1.0)
        # 5 % noise: sigma is 5 % of the baseline
        y = comb(x) + np.random.default_rng(2024).normal(0.0, 0.05, x.size)
        res = fit_cpt_comb(Spectrum(x, y, "MHz"), n_dips=10, spacing_init=100.0)
        d = res.as_dict()
        c[f"fit converged ({res.status})"] = res.converged
        c[f"spacing {d['spacing']:.2f} within 2 MHz of 100"] = abs(d["spacing"] - 100.0) < 2.0
        c[f"width {d['width']:.1f} in [50, 170] MHz"] = 50.0 <= d["width"] <= 170.0
        dense = np.linspace(-700.0, 700.0, 14001)
        for w in (10.0, 30.0):
            n = count_local_minima(LorentzianComb.equally_spaced(10, 100.0, w, 0.5)(dense))
            c[f"{n} minima at width {w:g} MHz"] = n == 10
        inner = comb(comb.centers[1:-1])
        variation = np.ptp(inner) / (comb.baseline - inner.min())
        c[f"inner plateau variation {variation:.3f} < 0.05"] = variation < 0.05


def test_criterion_4_dark_state(capsys):
    with criterion(capsys, 4, "dark state and propagation", 30.0) as c:
        rho_ee, _ = cpt_steady_state(LambdaParams(1.0, 1.0, 1.0))
        c[f"ideal CPT rho_ee = {rho_ee:.1e} < 1e-10"] = rho_ee < 1e-10
        rng = np.random.default_rng(7)
        rabi = rng.uniform(0.3, 2.0, size=(5, 2))
        worst = 0.0
        for om_p, om_s in rabi:
            for _ in range(5):
                p = LambdaParams(
                    rabi_pump=om_p, rabi_scan=om_s, gamma_rad=1.0,
                    delta_pump=rng.uniform(-1, 1), delta_two_photon=rng.uniform(-1, 1),
                    gamma_spin_dephase=rng.uniform(0.02, 0.3),
                    gamma_spin_flip=rng.uniform(0.02, 0.2), branching=rng.uniform(0.2, 0.8))
                ss = steady_state_density(p).rho
                late = propagate(p, [0.0, 1e3 / p.gamma_rad])[-1]
                worst = max(worst, float(np.max(np.abs(late - ss))))
        c[f"5x5 grid max |rho_ss - rho(t)| = {worst:.1e} < 1e-6"] = worst < 1e-6


def test_criterion_5_zeeman(capsys):
    with criterion(capsys, 5, "Zeeman and g-factors", 1.0) as c:
        sp = get_species("In")
        B = np.linspace(0.5, 7.0, 14)
        ez, eh = [], []
        for b in B:
            tr = {t.label: t.offset_ueV for t in d0x_transitions(sp, FieldConfig(b)).transitions}
            ez.append(tr["Vdown"] - tr["Hup"])
            eh.append(tr["Vdown"] - tr["Hdown"])
        # Vdown - Hup carries no hole splitting; Vdown - Hdown no electron
        g_e = float(fit_linear(B, ez, through_origin=True).params[0]) / (MU_B * 1e6)
        g_h = float(fit_linear(B, eh, through_origin=True).params[0]) / (MU_B * 1e6)
        c[f"g_e = {g_e!r} within 1e-9"] = abs(g_e - 1.95) < 1e-9
        c[f"g_h = {g_h!r} within 1e-9"] = abs(g_h - 0.12) < 1e-9
        span = d0x_transitions(sp, FieldConfig(7.0)).span_ueV
        expected = (1.95 + 0.12) * MU_B * 7.0 * 1e6
        c[f"span rel err {abs(span / expected - 1):.1e} < 1e-12"] = abs(span / expected - 1) < 1e-12


def test_criterion_6_antihole(capsys):
    with criterion(capsys, 6, "antihole", 5.0) as c:
        sp = get_species("In")
        x = np.linspace(-2000.0, 2000.0, 1601)
        w_in = measure_fwhm(antihole_spectrum(sp, 10.0, 118.0, 0.0, x))
        c[f"In FWHM {w_in / 1e3:.3f} GHz in [0.45, 0.70]"] = 450.0 <= w_in <= 700.0
        w0 = measure_fwhm(antihole_spectrum(sp.with_(A_hf=0.0), 10.0, 118.0, 0.0, x))
        c[f"zero span FWHM {w0:.2f} within 1% of 236"] = abs(w0 / 236.0 - 1) < 0.01


def test_criterion_7_ple_ratio(capsys):
    with criterion(capsys, 7, "PLE vs R_InGa", 1.0) as c:
        rng = np.random.default_rng(11)
        R = rng.uniform(1.0, 45.0, 40)
        # 5 % multiplicative noise on the PLE intensity
        ple = 0.23 * R * (1.0 + rng.normal(0.0, 0.05, R.size))
        res, used, excluded = pl.ple_vs_ratio(list(zip(ple, R)), cutoff=30.0)
        slope = res.params[0]
        c[f"slope {slope:.4f} in [0.21, 0.25]"] = 0.21 <= slope <= 0.25
        c[f"{excluded} pairs above the cutoff excluded"] = excluded == int(np.sum(R >= 30)) and excluded > 0


def _cli_round_trip(root):
    """simulate -> save -> load -> fit through the CLI; returns file bytes."""
    import os
    cwd = os.getcwd()
    root.mkdir()
    os.chdir(root)
    try:
        runs = [
            (["simulate", "pl", "--noise_rel", "0.0"], ["fit", "voigt", "out/pl.tsv"]),
            (["simulate", "cpt", "--model", "comb", "--noise_rel", "0.05", "--n_points", "161",
              "--scan_min_MHz", "-800", "--scan_max_MHz", "800"], ["fit", "cpt-comb", "out/cpt.tsv"]),
            (["simulate", "recovery", "--noise_abs", "0.01"], ["fit", "exponential", "out/recovery.tsv"]),
            (["simulate", "t1", "--a_prefactor", "0.08"], ["fit", "t1-field", "out/t1.tsv"]),
        ]
        codes = []
        for sim, fit in runs:
            codes.append(main(sim + ["--seed", "42", "--outdir", "out"]))
            codes.append(main(fit + ["--outdir", "out"]))
        files = {p.name: p.read_bytes() for p in sorted((root / "out").iterdir())}
    finally:
        os.chdir(cwd)
    return codes, files


def _table(data):
    rows = {}
    for line in data.decode().splitlines()[1:]:
        label, value, _ = line.split("\t")
        rows[label] = value
    return rows


def test_criterion_8_cli_determinism(capsys, tmp_path):
    with criterion(capsys, 8, "CLI round trip determinism", 30.0) as c:
        codes_a, a = _cli_round_trip(tmp_path / "run_a")
        codes_b, b = _cli_round_trip(tmp_path / "run_b")
        c[f"all exit codes 0 ({codes_a})"] = all(k == 0 for k in codes_a + codes_b)
        c[f"{len(a)} files byte-identical"] = a == b and len(a) > 0
        v = _table(a["pl.voigt.fit.tsv"])
        c["voigt sigma, gamma, center, area at truth"] = (
            abs(float(v["sigma_0"]) / 2.0 - 1) < 1e-6 and abs(float(v["gamma_L_0"]) / 0.5 - 1) < 1e-6
            and abs(float(v["center_0"])) < 1e-6 and abs(float(v["amplitude_0"]) - 1) < 1e-6)
        comb = _table(a["cpt.cpt-comb.fit.tsv"])
        c[f"comb spacing {float(comb['spacing']):.2f} within 2 MHz"] = abs(float(comb["spacing"]) - 100) < 2
        c[f"comb width {float(comb['width']):.1f} in [50, 170]"] = 50 <= float(comb["width"]) <= 170
        tau = t1(RelaxationModel(get_species("In")), 3.0, 1.9)
        t_fit = float(_table(a["recovery.exponential.fit.tsv"])["T1"])
        c[f"recovery T1 {t_fit:.4f} s within 5% of {tau:.4f}"] = abs(t_fit / tau - 1) < 0.05
        a_fit = float(_table(a["t1.t1-field.fit.tsv"])["a"])
        c[f"t1-field a {a_fit!r} within 1e-8 of 0.08"] = abs(a_fit / 0.08 - 1) < 1e-8


def test_criterion_9_numerical_core(capsys):
    with criterion(capsys, 9, "numerical core", 60.0) as c:
        rng = np.random.default_rng(99)
        worst = 0.0
        for sigma, gamma, x in zip(rng.uniform(0.1, 3.0, 100), rng.uniform(0.05, 3.0, 100),
                                   rng.uniform(-10.0, 10.0, 100)):
            ref = voigt_quad(x, 0.0, sigma, gamma)
            worst = max(worst, abs(voigt_profile(x, 0.0, sigma, gamma) / ref - 1))
        c[f"Voigt vs quadrature max rel err {worst:.1e} <= 1e-6"] = worst <= 1e-6
        worst = 0.0
        for sigma, gamma in zip(rng.uniform(0.1, 3.0, 20), rng.uniform(0.05, 3.0, 20)):
            f = lambda u: voigt_profile(u, 0.0, sigma, gamma)  # noqa: E731
            hw = bisect_half_width(f, f(0.0), 0.0, 10.0 * (sigma + gamma))
            worst = max(worst, abs(voigt_fwhm(sigma, gamma) / (2 * hw) - 1))
        c[f"FWHM vs bisection max rel err {worst:.1e} <= 1e-6"] = worst <= 1e-6

        states = []
        for _ in range(20):
            p = LambdaParams(
                rabi_pump=rng.uniform(0.1, 3), rabi_scan=rng.uniform(0, 3), gamma_rad=1.0,
                delta_pump=rng.uniform(-2, 2), delta_two_photon=rng.uniform(-2, 2),
                gamma_spin_dephase=rng.uniform(0, 0.5), gamma_spin_flip=rng.uniform(0.001, 0.5),
                branching=rng.uniform(0, 1))
            states.append(steady_state_density(p).rho)
            states.extend(propagate(p, np.linspace(0, 30, 31)))
        cpt = LambdaParams(40.0, 40.0, 2000.0, gamma_spin_dephase=2.0, gamma_spin_flip=0.01)
        states.extend(_steady_state_batch(cpt, np.linspace(-700, 700, 281)))
        spec = cpt_spectrum(get_species("In"), FieldConfig(7.0), cpt, np.linspace(-700, 700, 141))
        bad = 0
        for rho in states:
            try:
                DensityMatrix3(rho).check(tol=1e-9)
            except ArithmeticError:
                bad += 1
        c[f"density-matrix invariants on {len(states)} states ({bad} violations)"] = bad == 0
        c["fluorescence within [0, gamma_rad]"] = bool(
            np.all(spec.intensity >= 0) and np.all(spec.intensity <= cpt.gamma_rad))


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-v"]))
