"""File formats: JSON for devices, netlists and reports; CSV for sweeps and data.

Files carry SI values with the unit in the key (``L_in_H``, ``C_a_F``).
Writes are atomic and output is byte-deterministic for identical inputs.
"""

from __future__ import annotations

import csv
import io as _io
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .coupled import ARM_FIELDS, ModeArm, Netlist, PrototypeCoefficients, SynthesisSpec
from .errors import DomainError, SchemaError
from .jrm import FluxBias, JRMParams
from .resonant import ResonantJMParams
from .ripple import RippleSetup
from .sweep import SweepResult, to_db

SCHEMA_VERSION = 1

_JRM_KEYS = {"I0": "I0_A", "L_s": "L_s_H", "L_in": "L_in_H", "L_out": "L_out_H"}


def atomic_write_text(path, text: str) -> None:
    """Write via a temporary file in the target directory and rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x.tolist()]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if np.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def dumps_json(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, obj) -> None:
    atomic_write_text(path, dumps_json(obj))


def read_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read JSON from {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: top level must be an object")
    return doc


def _req(doc: dict, key: str, where: str):
    if key not in doc:
        raise SchemaError(f"{where}: missing required field '{key}'")
    return doc[key]


def _num(doc: dict, key: str, where: str) -> float:
    v = _req(doc, key, where)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"{where}.{key} must be a number")
    return float(v)


def _check_version(doc: dict, where: str):
    v = doc.get("schema_version")
    if v != SCHEMA_VERSION:
        raise SchemaError(f"{where}: schema_version must be {SCHEMA_VERSION}, got {v!r}")


def jrm_to_dict(j: JRMParams) -> dict:
    return {k: getattr(j, a) for a, k in _JRM_KEYS.items()}


def jrm_from_dict(doc: dict, where: str = "jrm") -> JRMParams:
    try:
        return JRMParams(**{a: _num(doc, k, where) for a, k in _JRM_KEYS.items()})
    except DomainError as exc:
        raise SchemaError(f"{where}: {exc}") from exc


def _arm_to_dict(arm: ModeArm) -> dict:
    return {f"{f}_{'H' if f.startswith('L') else 'F'}": getattr(arm, f) for f in ARM_FIELDS}


def _arm_from_dict(doc: dict, where: str) -> ModeArm:
    try:
        return ModeArm(**{f: _num(doc, f"{f}_{'H' if f.startswith('L') else 'F'}", where) for f in ARM_FIELDS})
    except DomainError as exc:
        raise SchemaError(f"{where}: {exc}") from exc


def netlist_to_dict(n: Netlist) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "netlist",
        "provenance": n.provenance,
        "jrm": jrm_to_dict(n.jrm),
        "C_a_F": n.C_a,
        "C_b_F": n.C_b,
        "Z0_ohm": n.Z0,
        "mode_a": _arm_to_dict(n.a),
        "mode_b": _arm_to_dict(n.b),
        "design": dict(n.design),
    }


def netlist_from_dict(doc: dict, where: str = "netlist") -> Netlist:
    _check_version(doc, where)
    try:
        return Netlist(
            jrm=jrm_from_dict(_req(doc, "jrm", where), f"{where}.jrm"),
            C_a=_num(doc, "C_a_F", where),
            C_b=_num(doc, "C_b_F", where),
            a=_arm_from_dict(_req(doc, "mode_a", where), f"{where}.mode_a"),
            b=_arm_from_dict(_req(doc, "mode_b", where), f"{where}.mode_b"),
            Z0=float(doc.get("Z0_ohm", 50.0)),
            provenance=doc.get("provenance", "fitted"),
            design=dict(doc.get("design", {})),
        )
    except DomainError as exc:
        raise SchemaError(f"{where}: {exc}") from exc


def prototype_to_list(p: PrototypeCoefficients) -> list:
    return list(p.as_tuple())


def prototype_from_list(g, where: str = "prototype") -> PrototypeCoefficients:
    if not isinstance(g, (list, tuple)) or len(g) != 6:
        raise SchemaError(f"{where} must be a list of six coefficients g0..g5")
    try:
        return PrototypeCoefficients.from_sequence(g)
    except (DomainError, TypeError, ValueError) as exc:
        raise SchemaError(f"{where}: {exc}") from exc


@dataclass
class DeviceConfig:
    """A device description: resonant, or coupled with either a synthesis
    spec or an explicit netlist."""

    kind: str
    jrm: JRMParams
    C_a: float
    C_b: float
    Z0: float = 50.0
    synthesis: dict | None = None  # R_a, R_b, Z2_a, Z2_b, design_flux_phi0, mode, prototype
    netlist: Netlist | None = None
    name: str = ""
    provenance: str = ""

    def __post_init__(self):
        if self.kind not in ("resonant", "coupled"):
            raise SchemaError("kind must be 'resonant' or 'coupled'")
        if self.kind == "coupled" and (self.synthesis is None) == (self.netlist is None):
            raise SchemaError("coupled device needs exactly one of 'synthesis' or 'netlist'")

    def resonant_params(self) -> ResonantJMParams:
        if self.kind != "resonant":
            raise SchemaError("device is not resonant")
        try:
            return ResonantJMParams(self.jrm, self.C_a, self.C_b, self.Z0)
        except DomainError as exc:
            raise SchemaError(str(exc)) from exc

    def synthesis_spec(self) -> tuple[SynthesisSpec, PrototypeCoefficients]:
        if self.synthesis is None:
            raise SchemaError("device has no synthesis block")
        s = self.synthesis
        where = "synthesis"
        try:
            spec = SynthesisSpec(
                jrm=self.jrm,
                C_a=self.C_a,
                C_b=self.C_b,
                R_a=_num(s, "R_a_ohm", where),
                R_b=_num(s, "R_b_ohm", where),
                Z2_a=float(s.get("Z2_a_ohm", 50.0)),
                Z2_b=float(s.get("Z2_b_ohm", 50.0)),
                Z0=self.Z0,
                design_flux=FluxBias.from_phi0(float(s.get("design_flux_phi0", 0.6))),
                mode=s.get("mode", "amplifier"),
            )
        except DomainError as exc:
            raise SchemaError(f"{where}: {exc}") from exc
        return spec, prototype_from_list(_req(s, "prototype", where), f"{where}.prototype")

    def to_dict(self) -> dict:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "name": self.name,
            "provenance": self.provenance,
            "jrm": jrm_to_dict(self.jrm),
            "C_a_F": self.C_a,
            "C_b_F": self.C_b,
            "Z0_ohm": self.Z0,
        }
        if self.synthesis is not None:
            doc["synthesis"] = dict(self.synthesis)
        if self.netlist is not None:
            doc["netlist"] = netlist_to_dict(self.netlist)
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "DeviceConfig":
        where = "device"
        _check_version(doc, where)
        kind = _req(doc, "kind", where)
        if kind not in ("resonant", "coupled", "netlist"):
            raise SchemaError(f"{where}: unknown kind {kind!r}")
        if kind == "netlist":
            n = netlist_from_dict(doc)
            return cls("coupled", n.jrm, n.C_a, n.C_b, n.Z0, netlist=n, provenance=n.provenance)
        net = doc.get("netlist")
        return cls(
            kind=kind,
            jrm=jrm_from_dict(_req(doc, "jrm", where)),
            C_a=_num(doc, "C_a_F", where),
            C_b=_num(doc, "C_b_F", where),
            Z0=float(doc.get("Z0_ohm", 50.0)),
            synthesis=doc.get("synthesis"),
            netlist=None if net is None else netlist_from_dict(net, f"{where}.netlist"),
            name=str(doc.get("name", "")),
            provenance=str(doc.get("provenance", "")),
        )


def load_device(path) -> DeviceConfig:
    return DeviceConfig.from_dict(read_json(path))


# --- sweeps -------------------------------------------------------------------


def _r(x: float) -> str:
    return repr(float(x))


def sweep_to_csv(sweep: SweepResult) -> str:
    labels = sorted(sweep.s)
    header = ["freq_hz", "idler_hz", "singular"]
    for lab in labels:
        header += [f"{lab}_re", f"{lab}_im", f"{lab}_mag_db", f"{lab}_phase_rad"]
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    idler = sweep.idler_freq if sweep.idler_freq is not None else np.full(sweep.freq.size, np.nan)
    cols = {lab: (sweep.s[lab], to_db(sweep.s[lab]), np.angle(sweep.s[lab])) for lab in labels}
    for i, f in enumerate(sweep.freq):
        row = [_r(f), _r(idler[i]), str(int(sweep.singular[i]))]
        for lab in labels:
            z, db, ph = cols[lab]
            row += [_r(z[i].real), _r(z[i].imag), _r(db[i]), _r(ph[i])]
        w.writerow(row)
    return buf.getvalue()


def sweep_from_csv(text: str) -> SweepResult:
    rows = list(csv.reader(_io.StringIO(text)))
    if not rows:
        raise SchemaError("empty sweep file")
    header = rows[0]
    if header[:3] != ["freq_hz", "idler_hz", "singular"]:
        raise SchemaError("sweep CSV must start with freq_hz, idler_hz, singular")
    labels = [h[:-3] for h in header[3:] if h.endswith("_re")]
    try:
        data = np.array([[float(x) for x in r] for r in rows[1:]], dtype=float).reshape(len(rows) - 1, len(header))
    except ValueError as exc:
        raise SchemaError(f"non-numeric value in sweep CSV: {exc}") from exc
    col = {h: data[:, i] for i, h in enumerate(header)}
    s = {lab: col[f"{lab}_re"] + 1j * col[f"{lab}_im"] for lab in labels}
    idler = col["idler_hz"]
    return SweepResult(
        col["freq_hz"], s,
        idler_freq=None if np.all(np.isnan(idler)) else idler,
        singular=col["singular"].astype(bool),
    )


def write_sweep(path, sweep: SweepResult) -> None:
    path = Path(path)
    if path.suffix.lower() == ".json":
        write_json(path, sweep_to_json(sweep))
    else:
        atomic_write_text(path, sweep_to_csv(sweep))


def read_sweep(path) -> SweepResult:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read sweep {path}: {exc}") from exc
    if Path(path).suffix.lower() == ".json":
        return sweep_from_json(json.loads(text))
    return sweep_from_csv(text)


def sweep_to_json(sweep: SweepResult) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "sweep",
        "freq_hz": sweep.freq,
        "idler_hz": sweep.idler_freq,
        "singular": sweep.singular,
        "s": {lab: {"re": z.real, "im": z.imag} for lab, z in sorted(sweep.s.items())},
        "meta": sweep.meta,
        "metrics": sweep.metrics,
    }


def sweep_from_json(doc: dict) -> SweepResult:
    _check_version(doc, "sweep")
    s = {lab: np.asarray(v["re"], float) + 1j * np.asarray(v["im"], float) for lab, v in _req(doc, "s", "sweep").items()}
    idler = doc.get("idler_hz")
    return SweepResult(
        np.asarray(_req(doc, "freq_hz", "sweep"), float), s,
        idler_freq=None if idler is None else np.asarray(idler, float),
        singular=np.asarray(doc.get("singular", np.zeros(len(doc["freq_hz"]))), bool),
        meta=dict(doc.get("meta", {})),
        metrics=dict(doc.get("metrics", {})),
    )


# --- measurement data ---------------------------------------------------------


def _read_csv_columns(path, required, text=()) -> dict:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    missing = [c for c in required if c not in rows[0]]
    if missing:
        raise SchemaError(f"{path}: missing columns {missing}")
    out = {}
    for c in rows[0]:
        vals = [r[c] for r in rows]
        try:
            out[c] = np.array([float(v) for v in vals])
        except ValueError:
            out[c] = np.array(vals, dtype=object)
    for c in required:
        if c not in text and out[c].dtype == object:
            raise SchemaError(f"{path}: column {c} must be numeric")
    return out


def read_noise_csv(path):
    """``(G, G_N)`` as power ratios from ``gain_db, noise_rise_db`` columns."""
    c = _read_csv_columns(path, ("gain_db", "noise_rise_db"))
    return 10 ** (c["gain_db"] / 10), 10 ** (c["noise_rise_db"] / 10)


def fluxmap_to_csv(flux_phi0, freq, phase) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["flux_phi0", "freq_hz", "phase_rad"])
    for i, x in enumerate(flux_phi0):
        for j, f in enumerate(freq):
            w.writerow([_r(x), _r(f), _r(phase[i, j])])
    return buf.getvalue()


def read_fluxmap_csv(path, port: str = "a"):
    """Long-format phase map into ``FluxMapData``; the grid must be complete."""
    from .fitting import FluxMapData

    c = _read_csv_columns(path, ("flux_phi0", "freq_hz", "phase_rad"))
    flux = np.unique(c["flux_phi0"])
    freq = np.unique(c["freq_hz"])
    if flux.size * freq.size != c["flux_phi0"].size:
        raise SchemaError(f"{path}: flux map is not a complete rectangular grid")
    phase = np.full((flux.size, freq.size), np.nan)
    phase[np.searchsorted(flux, c["flux_phi0"]), np.searchsorted(freq, c["freq_hz"])] = c["phase_rad"]
    try:
        return FluxMapData(flux, freq, phase={port: phase})
    except DomainError as exc:
        raise SchemaError(f"{path}: {exc}") from exc


def read_resonance_csv(path):
    """Resonances from ``flux_phi0, mode, freq_hz`` rows (several per flux allowed)."""
    from .fitting import FluxMapData, pad_resonances

    c = _read_csv_columns(path, ("flux_phi0", "mode", "freq_hz"), text=("mode",))
    flux = np.unique(c["flux_phi0"])
    modes = sorted({str(m) for m in c["mode"]})
    if not set(modes) <= {"a", "b"}:
        raise SchemaError(f"{path}: mode must be 'a' or 'b'")
    res = {}
    for m in modes:
        sel = np.array([str(v) == m for v in c["mode"]])
        cols = [np.sort(c["freq_hz"][sel & (c["flux_phi0"] == x)]) for x in flux]
        res[m] = pad_resonances(cols)
    try:
        return FluxMapData(flux, resonances=res)
    except DomainError as exc:
        raise SchemaError(f"{path}: {exc}") from exc


def resonances_to_csv(data) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["flux_phi0", "mode", "freq_hz"])
    for mode in sorted(data.resonances):
        for i, x in enumerate(data.flux_phi0):
            for f in data.resonances[mode][i]:
                if np.isfinite(f):
                    w.writerow([_r(x), mode, _r(f)])
    return buf.getvalue()


def ripple_setup_to_dict(s: RippleSetup) -> dict:
    return {"schema_version": SCHEMA_VERSION, "kind": "ripple_setup", "t21": s.t21, "t32": s.t32,
            "t31": s.t31, "tc": s.tc, "r22": s.r22, "l_c_m": s.l_c, "eps": s.eps}


def ripple_setup_from_dict(doc: dict) -> RippleSetup:
    where = "ripple_setup"
    _check_version(doc, where)
    try:
        return RippleSetup(
            t21=_num(doc, "t21", where), t32=_num(doc, "t32", where), t31=_num(doc, "t31", where),
            tc=_num(doc, "tc", where), r22=_num(doc, "r22", where),
            l_c=_num(doc, "l_c_m", where), eps=_num(doc, "eps", where),
        )
    except DomainError as exc:
        raise SchemaError(f"{where}: {exc}") from exc
