"""Command-line interface.

Exit codes: 0 success, 1 invalid input, 2 synthesis infeasible, 3 more than
1% of sweep points singular, 4 requested metric undefined. No output file is
written unless the command succeeds.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from . import coupled as _coupled
from . import fitting as _fitting
from . import io as _io
from . import noise as _noise
from . import resonant as _resonant
from . import ripple as _ripple
from .conversion import ModeLinewidths, bandwidth_metrics, pump_sweep
from .errors import (
    DivergenceError,
    DomainError,
    FitDegenerateError,
    InfeasibleBoundsError,
    JMixerError,
    SchemaError,
    SynthesisInfeasibleError,
)
from .jrm import FluxBias
from .sweep import SweepResult, to_db
from .twoport import AMPLIFICATION, CONVERSION

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INFEASIBLE = 2
EXIT_SINGULAR = 3
EXIT_UNDEFINED = 4

SINGULAR_LIMIT = 0.01

METRIC_NAMES = ("reflection_below_level", "transmission_below_max", "reflection_above_min")

PROTOTYPES = {
    "theory": _coupled.THEORY_PROTOTYPE,
    "jm3": _coupled.JM3_PROTOTYPE,
    "jm4": _coupled.JM4_PROTOTYPE,
}


class MetricUndefined(JMixerError):
    pass


class TooManySingular(JMixerError):
    pass


def _say(msg: str = "") -> None:
    print(msg, file=sys.stdout)


# --- synth --------------------------------------------------------------------


def element_table(netlist: _coupled.Netlist) -> list:
    """The 22 element values as ``(name, value, unit)``, display units nH/pF."""
    rows = []
    for name, value in zip(_coupled.netlist_param_names(), _coupled.netlist_to_vector(netlist)):
        short = name.split(".")[-1]
        if short.startswith("L"):
            rows.append((name, value * 1e9, "nH"))
        else:
            rows.append((name, value * 1e12, "pF"))
    return rows


def format_element_table(netlist: _coupled.Netlist) -> str:
    lines = [f"ring: I0={netlist.jrm.I0 * 1e6:.4g} uA  L_s={netlist.jrm.L_s * 1e12:.4g} pH  "
             f"L_in={netlist.jrm.L_in * 1e12:.4g} pH  L_out={netlist.jrm.L_out * 1e12:.4g} pH  "
             f"C_a={netlist.C_a * 1e12:.4g} pF  C_b={netlist.C_b * 1e12:.4g} pF"]
    head = ("mode", "L2[nH]", "L3[nH]", "L4[nH]", "C2[pF]", "C3[pF]", "C4[pF]", "C12[pF]", "C23[pF]", "C34[pF]")
    lines.append(" ".join(f"{h:>9}" for h in head))
    for k in "ab":
        arm = netlist.arm(k)
        vals = [getattr(arm, f) * (1e9 if f.startswith("L") else 1e12) for f in _coupled.ARM_FIELDS]
        lines.append(" ".join([f"{k:>9}"] + [f"{v:9.4g}" for v in vals]))
    return "\n".join(lines)


def _prototype(args):
    if args.g is not None:
        return _io.prototype_from_list(args.g, "--g")
    if args.prototype is not None:
        return PROTOTYPES[args.prototype]
    return None


def cmd_synth(args) -> int:
    device = _io.load_device(args.config)
    if device.kind != "coupled":
        raise SchemaError("synth needs a coupled device with a synthesis block")
    spec, proto = device.synthesis_spec()
    override = _prototype(args)
    proto = override or proto
    netlist = _coupled.synthesize(spec, proto)
    _say(format_element_table(netlist))
    d = netlist.design
    _say(f"design: f_a={d['f_a'] / 1e9:.4f} GHz  f_b={d['f_b'] / 1e9:.4f} GHz  "
         f"w_a={d['w_a']:.4f}  w_b={d['w_b']:.4f}")
    _io.write_json(args.out, _io.netlist_to_dict(netlist))
    return EXIT_OK


# --- sparams ------------------------------------------------------------------


def _device_model(device: _io.DeviceConfig):
    if device.kind == "resonant":
        return device.resonant_params()
    if device.netlist is not None:
        return device.netlist
    spec, proto = device.synthesis_spec()
    return _coupled.synthesize(spec, proto)


def _load_model(path):
    return _device_model(_io.load_device(path))


def _working_point(args) -> _resonant.WorkingPoint:
    strengths = {"pump_alpha": "alpha", "pump_current": "pump_current", "pump_rho": "rho"}
    given = {v: getattr(args, k) for k, v in strengths.items() if getattr(args, k) is not None}
    if len(given) != 1:
        raise SchemaError("give exactly one of --pump-alpha, --pump-current, --pump-rho")
    try:
        return _resonant.WorkingPoint(FluxBias.from_phi0(args.flux), args.pump_freq,
                                      pump_phase=args.pump_phase, **given)
    except DomainError as exc:
        raise SchemaError(str(exc)) from exc


def _grid(args) -> np.ndarray:
    if not (args.fmin > 0 and args.fmax > args.fmin and args.points >= 2):
        raise SchemaError("need 0 < fmin < fmax and points >= 2")
    return np.linspace(args.fmin, args.fmax, args.points)


def _peak_metrics(sw: SweepResult) -> dict:
    out = {}
    for label in sorted(sw.s):
        db = to_db(sw.s[label])
        if np.all(np.isnan(db)):
            continue
        i = int(np.nanargmax(db))
        out[f"{label}_peak_db"] = float(db[i])
        out[f"{label}_peak_freq_hz"] = float(sw.freq[i])
    return out


def compute_sparams(model, wp, f, mode) -> SweepResult:
    if isinstance(model, _coupled.Netlist):
        if wp.rho is not None:
            raise SchemaError("--pump-rho applies to resonant devices only")
        sw = _coupled.coupled_sparams(model, wp, f, mode)
    else:
        sw = _resonant.sparams(model, wp, f, mode)
    sw.metrics = _peak_metrics(sw)
    return sw


def cmd_sparams(args) -> int:
    model = _load_model(args.device)
    wp = _working_point(args)
    try:
        sw = compute_sparams(model, wp, _grid(args), args.mode)
    except DomainError as exc:
        raise SchemaError(str(exc)) from exc
    frac = sw.singular_fraction
    if frac > SINGULAR_LIMIT:
        raise TooManySingular(f"{frac:.1%} of points are singular (limit {SINGULAR_LIMIT:.0%})")
    for k, v in sw.metrics.items():
        _say(f"{k}: {v:.6g}")
    _io.write_sweep(args.out, sw)
    return EXIT_OK


# --- fluxmap ------------------------------------------------------------------


def _flux_grid(args) -> np.ndarray:
    if args.flux_points < 2 or not args.flux_max > args.flux_min:
        raise SchemaError("need flux_max > flux_min and at least two flux points")
    return np.linspace(args.flux_min, args.flux_max, args.flux_points)


def compute_fluxmap(model, flux_phi0, f, port: str) -> np.ndarray:
    """Reflection phase ``(n_flux, n_freq)`` of ``port`` with the pump off (resonant)
    or at the regularizing strength (coupled)."""
    if isinstance(model, _coupled.Netlist):
        return _coupled.resonance_map(model, flux_phi0, f, port=port).phase
    phi = [FluxBias.from_phi0(x) for x in flux_phi0]
    rows = [np.angle(_resonant.unpumped_reflection(model, p, f, port)) for p in phi]
    return np.array(rows)


def passive_resonances(model, flux_phi0) -> dict:
    phi = 2 * np.pi * np.asarray(flux_phi0, dtype=float)
    if isinstance(model, _coupled.Netlist):
        return {k: _coupled.passive_resonances(model, phi, k) for k in "ab"}
    return {k: np.atleast_1d(_resonant.mode_frequency(model, phi, k))[:, None] for k in "ab"}


def cmd_fluxmap(args) -> int:
    model = _load_model(args.device)
    flux = _flux_grid(args)
    f = _grid(args)
    phase = compute_fluxmap(model, flux, f, args.port)
    text = _io.fluxmap_to_csv(flux, f, phase)
    res_text = None
    if args.resonances_out:
        data = _fitting.FluxMapData(flux, resonances=passive_resonances(model, flux))
        res_text = _io.resonances_to_csv(data)
    _io.atomic_write_text(args.out, text)
    if res_text is not None:
        _io.atomic_write_text(args.resonances_out, res_text)
    _say(f"wrote {flux.size} x {f.size} phase map")
    return EXIT_OK


# --- bandwidth ----------------------------------------------------------------


def _finite(x):
    x = float(x)
    return x if np.isfinite(x) else None


def cmd_bandwidth(args) -> int:
    if args.sweep is not None:
        sw = _io.read_sweep(args.sweep)
        for lab in (args.reflection, args.transmission):
            if lab not in sw.s:
                raise SchemaError(f"sweep has no column {lab}")
        ms = bandwidth_metrics(sw, args.level, args.reflection, args.transmission, hull=args.hull).as_list()
        report = {
            "schema_version": _io.SCHEMA_VERSION,
            "kind": "bandwidth_report",
            "source": {"sweep": str(args.sweep), "level_db": args.level, "reflection": args.reflection,
                       "transmission": args.transmission, "hull": args.hull, "meta": sw.meta},
            "metrics": [m.as_dict() for m in ms],
        }
        for m in ms:
            bw = "undefined" if not m.defined else f"{m.bandwidth / 1e6:.2f} MHz"
            _say(f"{m.name} (threshold {m.threshold_db:.3g} dB): {bw}")
        undefined = [m.name for m in ms if not m.defined and args.metric in ("all", m.name)]
        if undefined:
            raise MetricUndefined(f"undefined metrics: {', '.join(undefined)}")
    else:
        need = ("fa", "fb", "gamma_a", "gamma_b")
        if any(getattr(args, k) is None for k in need):
            raise SchemaError("give --sweep, or all of --fa --fb --gamma-a --gamma-b")
        try:
            lw = ModeLinewidths.from_hz(args.fa, args.fb, args.gamma_a, args.gamma_b)
            rho = np.linspace(args.rho_min, args.rho_max, args.rho_points)
            ps = pump_sweep(lw, rho, level_db=args.level)
        except DomainError as exc:
            raise SchemaError(str(exc)) from exc
        names = METRIC_NAMES
        report = {
            "schema_version": _io.SCHEMA_VERSION,
            "kind": "bandwidth_pump_sweep",
            "source": {"f_a_hz": args.fa, "f_b_hz": args.fb, "gamma_a_hz": args.gamma_a,
                       "gamma_b_hz": args.gamma_b, "level_db": args.level},
            "rho": ps.rho,
            "max_transmission_db": ps.max_transmission_db,
            "min_reflection_db": ps.min_reflection_db,
            "bandwidth_hz": {n: [_finite(v) for v in ps.bandwidths[:, j]] for j, n in enumerate(names)},
        }
        if np.all(np.isnan(ps.bandwidths)):
            raise MetricUndefined("no bandwidth metric is defined anywhere on the pump grid")
        _say(f"{rho.size} pump settings; metrics at rho={rho[-1]:.3g}: "
             + ", ".join("undefined" if np.isnan(v) else f"{v / 1e6:.1f} MHz" for v in ps.bandwidths[-1]))
    _io.write_json(args.out, report)
    return EXIT_OK


# --- noise --------------------------------------------------------------------


def cmd_noise(args) -> int:
    G, G_N = _io.read_noise_csv(args.data)
    try:
        fit = _noise.fit_noise(G, G_N, args.freq, restarts=args.restarts, seed=args.seed)
    except DomainError as exc:
        raise SchemaError(str(exc)) from exc
    p = fit.params
    report = {
        "schema_version": _io.SCHEMA_VERSION,
        "kind": "noise_report",
        "source": {"data": str(args.data), "f_mode_hz": args.freq, "restarts": args.restarts, "seed": args.seed},
        "T_N_K": p.T_N,
        "n_add": p.n_add,
        "T_Q_K": p.T_Q,
        "stderr": {"T_N_K": fit.stderr[0], "n_add": fit.stderr[1]},
        "rms_relative_residual": fit.rms_relative_residual,
        "condition": fit.condition,
        "snr_plateau_db": 10 * np.log10(_noise.snr_plateau(p)),
        "unity_rise_gain_db": 10 * np.log10(_noise.unity_rise_gain(p.n_add, p.n_vac)),
    }
    _say(f"T_N = {p.T_N:.4g} K  n_add = {p.n_add:.4g}  plateau = {report['snr_plateau_db']:.3f} dB")
    _io.write_json(args.out, report)
    return EXIT_OK


# --- ripple -------------------------------------------------------------------


def cmd_ripple(args) -> int:
    if args.setup is not None:
        setup = _io.ripple_setup_from_dict(_io.read_json(args.setup))
    else:
        setup = {"typical": _ripple.TYPICAL_SETUP, "ideal": _ripple.IDEAL_SETUP}[args.preset]
    report = {
        "schema_version": _io.SCHEMA_VERSION,
        "kind": "ripple_report",
        "setup": _io.ripple_setup_to_dict(setup),
    }
    try:
        spacing = _ripple.ripple_spacing(setup)
    except DomainError:
        spacing = None
    report["ripple_spacing_hz"] = spacing
    out_csv = None
    if (args.on is None) != (args.off is None):
        raise SchemaError("give both --on and --off sweeps, or neither")
    if args.on is not None:
        on, off = _io.read_sweep(args.on), _io.read_sweep(args.off)
        if on.freq.shape != off.freq.shape or np.any(on.freq != off.freq):
            raise SchemaError("--on and --off sweeps must share a frequency grid")
        if args.label not in on.s or args.label not in off.s:
            raise SchemaError(f"sweeps lack column {args.label}")
        try:
            y = _ripple.normalized_response(setup, on[args.label], off[args.label], on.freq)
        except DivergenceError as exc:
            raise MetricUndefined(str(exc)) from exc
        y_db = 10 * np.log10(y)
        report["normalized"] = {
            "label": args.label,
            "max_spacing_hz": _finite(_ripple.extrema_spacing(on.freq, y_db, "max")),
            "min_spacing_hz": _finite(_ripple.extrema_spacing(on.freq, y_db, "min")),
            "peak_to_peak_db": float(np.ptp(y_db)),
        }
        if args.out_csv:
            rows = ["freq_hz,normalized_db"] + [f"{f!r},{v!r}" for f, v in zip(on.freq.tolist(), y_db.tolist())]
            out_csv = "\n".join(rows) + "\n"
    if spacing is None:
        raise MetricUndefined("ripple spacing needs a positive cable length")
    _say(f"ripple spacing: {spacing / 1e6:.2f} MHz")
    _io.write_json(args.out, report)
    if out_csv is not None:
        _io.atomic_write_text(args.out_csv, out_csv)
    return EXIT_OK


# --- fit ----------------------------------------------------------------------


def _read_fit_data(path, port):
    import csv

    with open(path, encoding="utf-8", newline="") as fh:
        header = next(csv.reader(fh), [])
    if "phase_rad" in header:
        data = _io.read_fluxmap_csv(path, port)
        res = _fitting.pad_resonances(_fitting.extract_resonances(data, port))
        return _fitting.FluxMapData(data.flux_phi0, resonances={port: res})
    return _io.read_resonance_csv(path)


def cmd_fit(args) -> int:
    try:
        data = _read_fit_data(args.data, args.port)
    except OSError as exc:
        raise SchemaError(f"cannot read {args.data}: {exc}") from exc
    device = _io.load_device(args.device)
    nominal = _device_model(device)
    model = _fitting.RESONANT if device.kind == "resonant" else _fitting.COUPLED
    if args.free:
        free = tuple(s.strip() for s in args.free.split(",") if s.strip())
    elif model == _fitting.RESONANT:
        free = _fitting.RESONANT_DEFAULT_FREE
    else:
        free = tuple(_coupled.netlist_param_names())
    try:
        cfg = _fitting.FitConfig(free=free, fraction=args.fraction, restarts=args.restarts, seed=args.seed)
        res = _fitting.fit_flux_map(data, model, cfg, nominal)
    except InfeasibleBoundsError as exc:
        raise SchemaError(str(exc)) from exc
    report = {
        "schema_version": _io.SCHEMA_VERSION,
        "kind": "fit_report",
        "source": {"data": str(args.data), "device": str(args.device), "model": model,
                   "fraction": args.fraction, "restarts": args.restarts, "seed": args.seed},
        "fit": res.report(),
        "values": res.values,
    }
    _say(f"rms residual {res.rms / 1e6:.4g} MHz (start {res.initial_rms / 1e6:.4g} MHz); {res.message}")
    fitted = None
    if args.out_device:
        if model == _fitting.RESONANT:
            p = _fitting.resonant_from_values(res.values, device.Z0)
            dev = _io.DeviceConfig("resonant", p.jrm, p.C_a, p.C_b, p.Z0, name=device.name, provenance="fitted")
        else:
            x = [res.values[n] for n in _coupled.netlist_param_names()]
            net = _coupled.netlist_from_vector(nominal, x)
            dev = _io.DeviceConfig("coupled", net.jrm, net.C_a, net.C_b, net.Z0, netlist=net,
                                   name=device.name, provenance="fitted")
        fitted = _io.dumps_json(dev.to_dict())
    _io.write_json(args.out, report)
    if fitted is not None:
        _io.atomic_write_text(args.out_device, fitted)
    return EXIT_OK


# --- parser -------------------------------------------------------------------


def _add_grid(p):
    p.add_argument("--fmin", type=float, required=True, help="start frequency (Hz)")
    p.add_argument("--fmax", type=float, required=True, help="stop frequency (Hz)")
    p.add_argument("--points", type=int, default=1001)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="jmixer", description="Josephson ring mixer design and analysis")
    ap.add_argument("--version", action="version", version=f"jmixer {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize a coupled-mode matching network")
    p.add_argument("config", help="device JSON with a synthesis block")
    p.add_argument("--out", required=True, help="netlist JSON to write")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--prototype", choices=sorted(PROTOTYPES))
    g.add_argument("--g", type=float, nargs=6, metavar="G", help="g0..g5")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("sparams", help="scattering parameters at a working point")
    p.add_argument("device", help="device or netlist JSON")
    p.add_argument("--flux", type=float, required=True, help="external flux (units of flux quantum)")
    p.add_argument("--pump-freq", type=float, required=True, help="pump frequency (Hz)")
    p.add_argument("--pump-alpha", type=float)
    p.add_argument("--pump-current", type=float, help="pump current (A)")
    p.add_argument("--pump-rho", type=float, help="resonant devices only")
    p.add_argument("--pump-phase", type=float, default=0.0, help="rad")
    p.add_argument("--mode", choices=(AMPLIFICATION, CONVERSION), required=True)
    _add_grid(p)
    p.add_argument("--out", required=True, help=".csv or .json")
    p.set_defaults(func=cmd_sparams)

    p = sub.add_parser("fluxmap", help="reflection phase versus flux and frequency")
    p.add_argument("device")
    p.add_argument("--flux-min", type=float, default=-1.0)
    p.add_argument("--flux-max", type=float, default=1.0)
    p.add_argument("--flux-points", type=int, default=41)
    p.add_argument("--port", choices=("a", "b"), default="a")
    _add_grid(p)
    p.add_argument("--out", required=True)
    p.add_argument("--resonances-out", help="also write model resonances (CSV)")
    p.set_defaults(func=cmd_fluxmap)

    p = sub.add_parser("bandwidth", help="conversion bandwidth figures")
    p.add_argument("--sweep", help="sweep CSV/JSON to analyse")
    p.add_argument("--level", type=float, default=3.0, help="threshold level (dB)")
    p.add_argument("--reflection", default="S_aa")
    p.add_argument("--transmission", default="S_ba")
    p.add_argument("--metric", default="all", choices=("all", *METRIC_NAMES),
                   help="metric whose absence makes the command fail")
    p.add_argument("--hull", action="store_true", help="first-to-last crossing for the reflection span")
    p.add_argument("--fa", type=float)
    p.add_argument("--fb", type=float)
    p.add_argument("--gamma-a", type=float, help="linewidth gamma_a/2pi (Hz)")
    p.add_argument("--gamma-b", type=float, help="linewidth gamma_b/2pi (Hz)")
    p.add_argument("--rho-min", type=float, default=0.0)
    p.add_argument("--rho-max", type=float, default=1.0)
    p.add_argument("--rho-points", type=int, default=21)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bandwidth)

    p = sub.add_parser("noise", help="fit T_N and n_add to noise-rise data")
    p.add_argument("--data", required=True, help="CSV with gain_db, noise_rise_db")
    p.add_argument("--freq", type=float, required=True, help="mode frequency (Hz)")
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("ripple", help="standing-wave ripple of the measurement setup")
    p.add_argument("--setup", help="ripple setup JSON")
    p.add_argument("--preset", choices=("typical", "ideal"), default="typical")
    p.add_argument("--on", help="pump-on sweep")
    p.add_argument("--off", help="pump-off sweep")
    p.add_argument("--label", default="S_aa")
    p.add_argument("--out", required=True)
    p.add_argument("--out-csv", help="normalized response CSV")
    p.set_defaults(func=cmd_ripple)

    p = sub.add_parser("fit", help="fit circuit parameters to flux-sweep data")
    p.add_argument("--data", required=True, help="phase map or resonance CSV")
    p.add_argument("--device", required=True, help="nominal device JSON")
    p.add_argument("--port", choices=("a", "b"), default="a", help="port of a phase map")
    p.add_argument("--free", help="comma-separated parameter names")
    p.add_argument("--fraction", type=float, default=0.10)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--out-device", help="fitted device JSON")
    p.set_defaults(func=cmd_fit)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except SynthesisInfeasibleError as exc:
        print(f"error: synthesis infeasible (mode {exc.mode}, stage {exc.stage}): {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except TooManySingular as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except (MetricUndefined, FitDegenerateError) as exc:
        print(f"error: metric undefined: {exc}", file=sys.stderr)
        return EXIT_UNDEFINED
    except (SchemaError, DomainError, InfeasibleBoundsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
