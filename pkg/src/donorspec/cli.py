"""Batch command-line front end.

Subcommands: ``levels``, ``simulate``, ``fit`` and ``pipeline``. Every run
writes plot-ready tab-separated files plus a JSON manifest into the output
directory (``--outdir``, else ``$DONORSPEC_OUTDIR``, else ``./out``).
Passing a manifest back through ``--config`` reproduces the run.

Exit codes: 0 ok, 1 runtime error, 2 usage or unknown entity, 3 parse error,
4 fit did not converge.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import pipeline as pl
from .dynamics import LambdaParams, RelaxationModel, antihole_spectrum, cpt_spectrum, recovery_curve, t1
from .exceptions import DonorSpecError, SpectrumParseError, UnknownSpeciesError
from .fitting import (
    CONVERGED,
    ExponentialDecay,
    LinearFit,
    LorentzianCombDips,
    T1FieldLaw,
    VoigtPeaks,
)
from .levels import FieldConfig, d0x_transitions, hyperfine_ladder, lifetime_limited_linewidth, two_photon_resonances
from .lineshape import LorentzianComb, VoigtParams, synthesize_spectrum
from .species import default_registry
from .spectrum import Spectrum

log = logging.getLogger("donorspec")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, EXIT_PARSE, EXIT_NOCONVERGE = 0, 1, 2, 3, 4
OUTDIR_ENV = "DONORSPEC_OUTDIR"


class UsageError(Exception):
    pass


# name -> (type, default, help). ``None`` defaults are derived at run time.
SIMULATE_PARAMS = {
    "pl": {
        "species": (str, "In", "donor species"),
        "center_GHz": (float, 0.0, "line center"),
        "sigma_GHz": (float, 2.0, "Gaussian standard deviation"),
        "gamma_GHz": (float, 0.5, "Lorentzian HWHM"),
        "amplitude": (float, 1.0, "line area"),
        "span_GHz": (float, 30.0, "full scan width"),
        "n_points": (int, 601, "samples"),
        "noise_rel": (float, 0.0, "noise sigma relative to the peak"),
    },
    "cpt": {
        "species": (str, "In", "donor species"),
        "model": (str, "lambda", "'lambda' (master equation) or 'comb' (Lorentzian dips)"),
        "B_T": (float, 7.0, "magnetic field (Voigt geometry)"),
        "rabi_pump_MHz": (float, 40.0, "pump Rabi frequency"),
        "rabi_scan_MHz": (float, 40.0, "scan Rabi frequency"),
        "gamma_rad_MHz": (float, 2000.0, "effective excited-state decay rate"),
        "delta_pump_MHz": (float, 0.0, "pump one-photon detuning"),
        "gamma_spin_dephase_MHz": (float, 2.0, "ground coherence dephasing"),
        "gamma_spin_flip_MHz": (float, 0.01, "ground population exchange"),
        "branching": (float, 0.5, "decay fraction into |down>"),
        "width_MHz": (float, 85.0, "comb model: dip FWHM"),
        "depth": (float, 0.5, "comb model: dip depth relative to the baseline"),
        "scan_min_MHz": (float, -700.0, "first two-photon detuning"),
        "scan_max_MHz": (float, 700.0, "last two-photon detuning"),
        "n_points": (int, 1401, "samples"),
        "noise_rel": (float, 0.0, "noise sigma relative to the maximum"),
    },
    "t1": {
        "species": (str, "Ga", "donor species"),
        "T_K": (float, 1.5, "temperature"),
        "B_min_T": (float, 2.0, "lowest field"),
        "B_max_T": (float, 7.0, "highest field"),
        "n_points": (int, 11, "field points"),
        "a_prefactor": (float, None, "override the species prefactor (1/(s T^5))"),
        "noise_rel": (float, 0.0, "multiplicative noise sigma"),
    },
    "antihole": {
        "species": (str, "In", "donor species"),
        "sigma_GHz": (float, 5.0, "inhomogeneous Gaussian sigma"),
        "homogeneous_MHz": (float, None, "homogeneous FWHM (default: lifetime limit)"),
        "pump_MHz": (float, 0.0, "pump detuning from the line center"),
        "scan_min_MHz": (float, -2000.0, "first scan detuning"),
        "scan_max_MHz": (float, 2000.0, "last scan detuning"),
        "n_points": (int, 801, "samples"),
        "noise_rel": (float, 0.0, "noise sigma relative to the maximum"),
    },
    "recovery": {
        "species": (str, "In", "donor species"),
        "B_T": (float, 3.0, "magnetic field"),
        "T_K": (float, 1.9, "temperature"),
        "p0": (float, 0.0, "initial lower-state population"),
        "t_max_s": (float, None, "last delay (default: 6 T1)"),
        "n_points": (int, 60, "delays"),
        "noise_abs": (float, 0.0, "additive noise sigma"),
    },
}

FIT_PARAMS = {
    "voigt": {
        "n_peaks": (int, 1, "number of Voigt lines"),
        "fit_baseline": (int, 0, "1 to float a constant baseline"),
    },
    "cpt-comb": {
        "n_dips": (int, 10, "number of dips"),
        "spacing_init_MHz": (float, 100.0, "initial dip spacing"),
        "width_init_MHz": (float, None, "initial dip FWHM"),
    },
    "exponential": {},
    "t1-field": {
        "T_K": (float, 1.5, "temperature"),
        "g_e": (float, 1.95, "electron g-factor"),
    },
    "linear": {
        "through_origin": (int, 0, "1 to pin the intercept at 0"),
    },
}


# -- helpers ----------------------------------------------------------------

def _add_param_flags(parser, schema):
    for name, (typ, default, help_) in schema.items():
        parser.add_argument(f"--{name}", type=typ, default=None,
                            help=f"{help_} (default: {default})")


def _resolve(schema, args, config):
    """Flags first, then config-file values, then defaults. Unknown config
    keys and values of the wrong type are usage errors."""
    out = {}
    unknown = set(config) - set(schema)
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    for name, (typ, default, _) in schema.items():
        value = getattr(args, name, None)
        if name in config:
            value = config[name]
        if value is None:
            value = default
        if value is not None:
            try:
                if typ is int and isinstance(value, float) and not value.is_integer():
                    raise ValueError
                value = typ(value)
            except (TypeError, ValueError):
                raise UsageError(f"{name}: expected {typ.__name__}, got {value!r}") from None
            if isinstance(value, float) and not math.isfinite(value):
                raise UsageError(f"{name}: must be finite")
        out[name] = value
    return out


def _load_config(path):
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    # a manifest carries the resolved config under "config"
    if "config" in data and "command" in data:
        data = dict(data["config"])
    return data


def _outdir(args) -> Path:
    out = Path(args.outdir or os.environ.get(OUTDIR_ENV) or "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _registry(args):
    return default_registry(args.species_file)


def _write(path: Path, text: str) -> Path:
    path.write_text(text)
    return path


def _columns(x, y, header, meta=None) -> str:
    lines = [f"# {k}={v}" for k, v in sorted((meta or {}).items())]
    lines.append("# " + "\t".join(header))
    lines += [f"{a:.17g}\t{b:.17g}" for a, b in zip(x, y)]
    return "\n".join(lines) + "\n"


def _finish(out: Path, command: str, config: dict, outputs, inputs=()):
    manifest = pl.build_manifest(command, config, inputs, outputs)
    name = command.replace(" ", "-") + ".manifest.json"
    pl.write_manifest(out / name, manifest)
    log.info("wrote %s", out / name)


# -- levels -----------------------------------------------------------------

def cmd_levels(args) -> int:
    species = _registry(args)[args.species]
    field = FieldConfig(args.B_T, args.geometry, args.T_K)
    scheme = d0x_transitions(species, field)
    m_I, ladder = hyperfine_ladder(species)
    rows = [(t.label, t.energy_eV, "nan") for t in scheme.transitions]
    text = ["# transitions (eV)", pl.format_table(rows, ("label", "energy_eV", "stderr"))]
    text.append("# hyperfine ladder, one electron branch (MHz)")
    text.append(pl.format_table([(f"m_I={m:+.1f}", float(v), "nan")
                                 for m, v in zip(m_I, ladder)], ("label", "offset_MHz", "stderr")))
    if field.B > 0:
        res = two_photon_resonances(species, field)
        text.append("# two-photon resonances (MHz)")
        text.append(pl.format_table([(f"m_I={m:+.1f}", float(v), "nan")
                                     for m, v in zip(m_I, res)], ("label", "frequency_MHz", "stderr")))
    report = "\n".join(text)
    sys.stdout.write(report)
    out = _outdir(args)
    path = _write(out / f"levels_{species.name}.tsv", report)
    config = {"species": species.name, "B_T": field.B,
              "geometry": field.geometry.value, "T_K": field.T_sample}
    _finish(out, "levels", config, [path])
    return EXIT_OK


# -- simulate ---------------------------------------------------------------

def _noise(rng, y, rel):
    if rel > 0:
        return y + rng.normal(0.0, rel * float(np.max(np.abs(y))), size=y.shape)
    return y


def simulate(kind, cfg, registry, seed):
    """Returns a Spectrum-like (x, y, header, meta) tuple for ``kind``."""
    rng = np.random.default_rng(seed)
    species = registry[cfg["species"]]
    if kind == "pl":
        x = np.linspace(cfg["center_GHz"] - cfg["span_GHz"] / 2,
                        cfg["center_GHz"] + cfg["span_GHz"] / 2, cfg["n_points"])
        line = VoigtParams(cfg["center_GHz"], cfg["sigma_GHz"], cfg["gamma_GHz"], cfg["amplitude"])
        y = synthesize_spectrum([line], x).intensity
        return x, _noise(rng, y, cfg["noise_rel"]), ("detuning", "intensity"), {"units": "GHz"}
    if kind == "cpt" and cfg["model"] == "comb":
        # one dip per nuclear projection, spaced by the hyperfine constant
        x = np.linspace(cfg["scan_min_MHz"], cfg["scan_max_MHz"], cfg["n_points"])
        comb = LorentzianComb.equally_spaced(species.n_nuclear, species.A_hf, cfg["width_MHz"],
                                             cfg["depth"], 0.0, 1.0)
        return x, _noise(rng, comb(x), cfg["noise_rel"]), ("detuning", "fluorescence"), {"units": "MHz"}
    if kind == "cpt":
        if cfg["model"] != "lambda":
            raise UsageError(f"model: expected 'lambda' or 'comb', got {cfg['model']!r}")
        p = LambdaParams(
            rabi_pump=cfg["rabi_pump_MHz"], rabi_scan=cfg["rabi_scan_MHz"],
            gamma_rad=cfg["gamma_rad_MHz"], delta_pump=cfg["delta_pump_MHz"],
            gamma_spin_dephase=cfg["gamma_spin_dephase_MHz"],
            gamma_spin_flip=cfg["gamma_spin_flip_MHz"], branching=cfg["branching"])
        x = np.linspace(cfg["scan_min_MHz"], cfg["scan_max_MHz"], cfg["n_points"])
        s = cpt_spectrum(species, FieldConfig(cfg["B_T"], "voigt"), p, x)
        return x, _noise(rng, s.intensity, cfg["noise_rel"]), ("detuning", "fluorescence"), {"units": "MHz"}
    if kind == "t1":
        if cfg["a_prefactor"] is not None:
            species = species.with_(a_prefactor=cfg["a_prefactor"])
        B = np.linspace(cfg["B_min_T"], cfg["B_max_T"], cfg["n_points"])
        y = np.atleast_1d(t1(RelaxationModel(species), B, cfg["T_K"]))
        if cfg["noise_rel"] > 0:
            y = y * (1.0 + rng.normal(0.0, cfg["noise_rel"], size=y.shape))
        return B, y, ("B", "T1"), {"units": "T", "T_K": repr(cfg["T_K"])}
    if kind == "antihole":
        w = cfg["homogeneous_MHz"]
        if w is None:
            w = lifetime_limited_linewidth(species.tau_rad)
            cfg["homogeneous_MHz"] = w
        x = np.linspace(cfg["scan_min_MHz"], cfg["scan_max_MHz"], cfg["n_points"])
        s = antihole_spectrum(species, cfg["sigma_GHz"], w, cfg["pump_MHz"], x)
        return x, _noise(rng, s.intensity, cfg["noise_rel"]), ("detuning", "signal"), {"units": "MHz"}
    if kind == "recovery":
        field = FieldConfig(cfg["B_T"], "faraday", cfg["T_K"])
        model = RelaxationModel(species)
        tau = t1(model, field.B, field.T_sample)
        t_max = cfg["t_max_s"] if cfg["t_max_s"] is not None else 6.0 * tau
        cfg["t_max_s"] = t_max
        x = np.linspace(0.0, t_max, cfg["n_points"])
        y = recovery_curve(model, field, cfg["p0"], x)
        if cfg["noise_abs"] > 0:
            y = y + rng.normal(0.0, cfg["noise_abs"], size=y.shape)
        return x, y, ("delay", "population"), {"units": "s", "T1_s": repr(tau)}
    raise UsageError(f"unknown simulation kind {kind!r}")


def cmd_simulate(args) -> int:
    config = _load_config(args.config)
    kind = config.pop("kind", None) or args.kind
    if args.kind and kind != args.kind:
        raise UsageError(f"config is for kind {kind!r}, not {args.kind!r}")
    seed = config.pop("seed", None)
    seed = args.seed if seed is None else seed
    cfg = _resolve(SIMULATE_PARAMS[kind], args, config)
    registry = _registry(args)
    x, y, header, meta = simulate(kind, cfg, registry, seed)
    meta.update({"kind": kind, "species": cfg["species"], "seed": str(seed)})
    out = _outdir(args)
    path = _write(out / f"{kind}.tsv", _columns(x, y, header, meta))
    _finish(out, f"simulate {kind}", {"kind": kind, "seed": seed, **cfg}, [path])
    log.info("wrote %s", path)
    return EXIT_OK


# -- fit ----------------------------------------------------------------------

def _make_estimator(kind, cfg):
    if kind == "voigt":
        return VoigtPeaks(n_peaks=cfg["n_peaks"], fit_baseline=bool(cfg["fit_baseline"]))
    if kind == "cpt-comb":
        return LorentzianCombDips(n_dips=cfg["n_dips"], spacing_init=cfg["spacing_init_MHz"],
                                  width_init=cfg["width_init_MHz"])
    if kind == "exponential":
        return ExponentialDecay()
    if kind == "t1-field":
        return T1FieldLaw(T=cfg["T_K"], g_e=cfg["g_e"])
    if kind == "linear":
        return LinearFit(fit_intercept=not cfg["through_origin"])
    raise UsageError(f"unknown fit kind {kind!r}")


def _fit_one(kind, cfg, s: Spectrum):
    est = _make_estimator(kind, cfg).fit(s.axis, s.intensity)
    rows = list(est.result_.rows())
    if kind == "voigt":
        for k, w in enumerate(est.fwhm_):
            rows.append((f"fwhm_{k}", float(w), float("nan")))
    rows.append(("residual_norm", float(est.result_.residual_norm), float("nan")))
    rows.append(("status", est.result_.status, ""))
    resid = s.intensity - est.predict(s.axis)
    return est.result_, rows, resid


def cmd_fit(args) -> int:
    config = _load_config(args.config)
    kind = config.pop("kind", None) or args.kind
    inputs = config.pop("inputs", None) or args.inputs
    config.pop("seed", None)
    if not inputs:
        raise UsageError("no input files")
    cfg = _resolve(FIT_PARAMS[kind], args, config)
    inputs = sorted(str(p) for p in inputs)
    # parse everything first so a bad file leaves no partial outputs
    spectra = [pl.load_spectrum(p) for p in inputs]
    with ThreadPoolExecutor(max_workers=max(1, min(4, len(spectra)))) as pool:
        results = list(pool.map(lambda s: _fit_one(kind, cfg, s), spectra))
    out = _outdir(args)
    outputs = []
    exit_code = EXIT_OK
    for path, s, (result, rows, resid) in zip(inputs, spectra, results):
        stem = Path(path).stem
        outputs.append(_write(out / f"{stem}.{kind}.fit.tsv", pl.format_table(rows)))
        outputs.append(_write(out / f"{stem}.{kind}.residuals.tsv",
                              _columns(s.axis, resid, ("x", "residual"), {"units": s.unit})))
        line = " ".join(f"{n}={v:.6g}" for n, v, _ in result.rows())
        print(f"{path}: {result.status} {line}")
        if result.status != CONVERGED:
            exit_code = EXIT_NOCONVERGE
    _finish(out, f"fit {kind}", {"kind": kind, "inputs": inputs, **cfg}, outputs, inputs)
    return exit_code


# -- pipeline -----------------------------------------------------------------

def _parse_windows(values):
    windows = []
    for v in values or ():
        try:
            lo, hi = (float(p) for p in v.split(":"))
        except ValueError:
            raise UsageError(f"window must be LO:HI, got {v!r}") from None
        windows.append((lo, hi))
    return windows


def _reduce_file(path, windows, normalize, num, den):
    s = pl.load_spectrum(path)
    s = pl.reduce_spectrum(s, windows, normalize)
    return s, pl.band_ratio(s, num, den)


def cmd_pipeline(args) -> int:
    out = _outdir(args)
    if args.action == "ratio":
        windows = _parse_windows(args.background)
        num, den = pl.get_band(args.num), pl.get_band(args.den)
        inputs = sorted(args.inputs)
        for p in inputs:
            pl.load_spectrum(p)
        with ThreadPoolExecutor(max_workers=max(1, min(4, len(inputs)))) as pool:
            reduced = list(pool.map(
                lambda p: _reduce_file(p, windows, not args.no_normalize, num, den), inputs))
        rows = [(Path(p).stem, r, float("nan")) for p, (_, r) in zip(inputs, reduced)]
        outputs = [_write(out / "ratios.tsv", pl.format_table(rows))]
        for p, (s, _) in zip(inputs, reduced):
            outputs.append(pl.save_spectrum(s, out / f"{Path(p).stem}.reduced.tsv"))
        sys.stdout.write(pl.format_table(rows))
        config = {"action": "ratio", "inputs": inputs, "num": num.label,
                  "num_window": list(num.window), "den": den.label,
                  "den_window": list(den.window), "background": [list(w) for w in windows],
                  "normalize": not args.no_normalize}
        _finish(out, "pipeline ratio", config, outputs, inputs)
        return EXIT_OK
    if args.action == "ple":
        pairs = _load_pairs(args.inputs[0])
        result, used, excluded = pl.ple_vs_ratio(pairs, args.cutoff)
        rows = [("slope", float(result.params[0]), float(result.stderr[0])),
                ("n_used", used, ""), ("n_excluded", excluded, "")]
        path = _write(out / "ple_vs_ratio.tsv", pl.format_table(rows))
        sys.stdout.write(pl.format_table(rows))
        _finish(out, "pipeline ple", {"action": "ple", "inputs": list(args.inputs),
                                      "cutoff": args.cutoff}, [path], args.inputs)
        return EXIT_OK
    raise UsageError(f"unknown pipeline action {args.action!r}")


def _load_pairs(path):
    """(ple, ratio) pairs from a two-column file of ``ratio, ple`` rows."""
    rows = []
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise SpectrumParseError(f"cannot read file: {exc}", path) from None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f for f in pl._SPLIT.split(line) if f]
        try:
            ratio, ple = (float(f) for f in fields)
        except ValueError:
            raise SpectrumParseError("expected two numeric columns", path, lineno) from None
        rows.append((ple, ratio))
    return rows


# -- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--outdir", help=f"output directory (env {OUTDIR_ENV})")
    common.add_argument("--species-file", help="INI file overriding the species registry")
    common.add_argument("--config", help="JSON config or manifest; overrides flags")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="donorspec", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("levels", parents=[common], help="D0X transitions and hyperfine tables")
    p.add_argument("species")
    p.add_argument("--B_T", type=float, default=0.0)
    p.add_argument("--geometry", default="voigt", choices=["voigt", "faraday"])
    p.add_argument("--T_K", type=float, default=2.0)
    p.set_defaults(func=cmd_levels)

    p = sub.add_parser("simulate", parents=[common], help="synthesize spectra and curves")
    ksub = p.add_subparsers(dest="kind", required=True)
    for kind, schema in SIMULATE_PARAMS.items():
        kp = ksub.add_parser(kind, parents=[common])
        _add_param_flags(kp, schema)
        kp.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", parents=[common], help="fit models to data files")
    ksub = p.add_subparsers(dest="kind", required=True)
    for kind, schema in FIT_PARAMS.items():
        kp = ksub.add_parser(kind, parents=[common])
        kp.add_argument("inputs", nargs="*")
        _add_param_flags(kp, schema)
        kp.set_defaults(func=cmd_fit)

    p = sub.add_parser("pipeline", parents=[common], help="batch reduction of spectrum files")
    asub = p.add_subparsers(dest="action", required=True)
    ap = asub.add_parser("ratio", parents=[common], help="band-intensity ratios")
    ap.add_argument("inputs", nargs="+")
    ap.add_argument("--num", default="In0X")
    ap.add_argument("--den", default="Ga0X")
    ap.add_argument("--background", action="append", metavar="LO:HI")
    ap.add_argument("--no-normalize", action="store_true")
    ap.set_defaults(func=cmd_pipeline)
    ap = asub.add_parser("ple", parents=[common], help="PLE intensity vs R_InGa slope")
    ap.add_argument("inputs", nargs=1)
    ap.add_argument("--cutoff", type=float, default=30.0)
    ap.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UnknownSpeciesError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_USAGE
    except SpectrumParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DonorSpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
