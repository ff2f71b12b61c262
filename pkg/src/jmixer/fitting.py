"""Least-squares extraction of circuit parameters from flux-sweep resonance data.

Fits minimize squared resonance-frequency residuals (Hz), both modes weighted
equally. Parameters are searched in coordinates normalized to a nominal
point, within ``+-fraction`` of it: a bounded simplex from seeded starts,
then a trust-region polish of the best start.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares, minimize

from . import coupled as _coupled
from . import resonant as _resonant
from .errors import DomainError, FitDegenerateError, InfeasibleBoundsError, JMixerError
from .jrm import FluxBias
from .parallel import ordered_map

RESONANT = "resonant"
COUPLED = "coupled"
RESONANT_PARAMS = ("I0", "L_s", "L_in", "L_out", "C_a", "C_b")
RESONANT_DEFAULT_FREE = ("L_s", "L_in", "L_out", "C_a", "C_b")


@dataclass
class FluxMapData:
    """Flux sweep data: reflection phase maps and/or extracted resonances.

    ``phase`` maps port label to an ``(n_flux, n_freq)`` array; ``resonances``
    maps mode label to an ``(n_flux, n_res)`` array padded with NaN.
    """

    flux_phi0: np.ndarray
    freq: np.ndarray | None = None
    phase: dict = field(default_factory=dict)
    resonances: dict = field(default_factory=dict)

    def __post_init__(self):
        self.flux_phi0 = np.asarray(self.flux_phi0, dtype=float)
        if self.flux_phi0.ndim != 1 or np.any(np.diff(self.flux_phi0) <= 0):
            raise DomainError("flux grid must be 1-D and strictly increasing")
        if self.freq is not None:
            self.freq = np.asarray(self.freq, dtype=float)
            if np.any(np.diff(self.freq) <= 0):
                raise DomainError("frequency grid must be strictly increasing")
        for port, ph in self.phase.items():
            ph = np.asarray(ph, dtype=float)
            if self.freq is None or ph.shape != (self.flux_phi0.size, self.freq.size):
                raise DomainError(f"phase map for port {port} does not match the grids")
            if np.any(np.abs(ph) > np.pi + 1e-12):
                raise DomainError("phase must lie in (-pi, pi]")
            self.phase[port] = ph
        for mode, res in self.resonances.items():
            res = np.asarray(res, dtype=float)
            if res.ndim == 1:
                res = res[:, None]
            if res.shape[0] != self.flux_phi0.size:
                raise DomainError(f"resonances for mode {mode} do not match the flux grid")
            self.resonances[mode] = res


def zero_phase_crossings(f, phase) -> np.ndarray:
    """Frequencies where the phase passes through zero, linearly interpolated.

    Jumps larger than pi between neighbours are branch wraps, not crossings.
    """
    f = np.asarray(f, dtype=float)
    p = np.asarray(phase, dtype=float)
    out = []
    for i in range(p.size - 1):
        a, b = p[i], p[i + 1]
        if abs(b - a) >= np.pi:
            continue
        if a == 0.0:
            out.append(f[i])
        elif a * b < 0:
            out.append(f[i] + a * (f[i + 1] - f[i]) / (a - b))
    if p.size and p[-1] == 0.0:
        out.append(f[-1])
    return np.array(out)


def extract_resonances(data: FluxMapData, port: str) -> list:
    """Per-flux ascending zero-phase crossings of one port's map (empty if none)."""
    if port not in data.phase:
        raise DomainError(f"no phase map for port {port}")
    return [zero_phase_crossings(data.freq, col) for col in data.phase[port]]


def pad_resonances(columns: list, n: int | None = None) -> np.ndarray:
    n = max((len(c) for c in columns), default=0) if n is None else n
    out = np.full((len(columns), n), np.nan)
    for i, c in enumerate(columns):
        k = min(len(c), n)
        out[i, :k] = c[:k]
    return out


# --- forward models -----------------------------------------------------------


def resonant_model_params(params: _resonant.ResonantJMParams) -> dict:
    j = params.jrm
    return {"I0": j.I0, "L_s": j.L_s, "L_in": j.L_in, "L_out": j.L_out, "C_a": params.C_a, "C_b": params.C_b}


def resonant_from_values(values: dict, Z0: float = 50.0) -> _resonant.ResonantJMParams:
    from .jrm import JRMParams

    jrm = JRMParams(values["I0"], values["L_s"], values["L_in"], values["L_out"])
    return _resonant.ResonantJMParams(jrm, values["C_a"], values["C_b"], Z0)


def resonant_forward(values: dict, flux_phi0) -> dict:
    """Unpumped mode frequencies versus flux, shape ``(n_flux, 1)`` per mode."""
    p = resonant_from_values(values)
    phi = 2 * np.pi * np.asarray(flux_phi0, dtype=float)
    return {k: np.atleast_1d(_resonant.mode_frequency(p, phi, k))[:, None] for k in "ab"}


def coupled_model_params(netlist: _coupled.Netlist) -> dict:
    return dict(zip(_coupled.netlist_param_names(), _coupled.netlist_to_vector(netlist)))


def coupled_forward(values: dict, flux_phi0, template: _coupled.Netlist) -> dict:
    x = np.array([values[n] for n in _coupled.netlist_param_names()])
    net = _coupled.netlist_from_vector(template, x)
    phi = 2 * np.pi * np.asarray(flux_phi0, dtype=float)
    return {k: _coupled.passive_resonances(net, phi, k) for k in "ab"}


# --- configuration and results ------------------------------------------------


@dataclass
class FitConfig:
    """Free parameters, bounds and optimizer settings.

    ``bounds`` overrides the default ``nominal * (1 +- fraction)`` box per
    parameter. ``shared`` names parameters that take one value across all
    datasets of a joint fit. ``start`` optionally gives the initial point
    (defaults to the nominal values).
    """

    free: tuple
    fraction: float = 0.10
    bounds: dict = field(default_factory=dict)
    shared: tuple = ()
    restarts: int = 8
    seed: int = 0
    polish: bool = True
    start: dict | None = None
    maxiter: int | None = None

    def __post_init__(self):
        if len(self.free) == 0:
            raise DomainError("at least one free parameter is required")
        if not 0 < self.fraction < 1:
            raise DomainError("constraint fraction must lie in (0, 1)")
        if self.restarts < 1:
            raise DomainError("restarts must be >= 1")


@dataclass
class FitResult:
    names: list
    values: dict  # all parameters, per dataset when joint
    x: np.ndarray  # free values (SI) in ``names`` order
    residuals: np.ndarray  # Hz, flattened over valid data
    rms: float
    initial_rms: float
    converged: bool
    message: str
    restart_costs: list

    def report(self) -> dict:
        return {
            "names": list(self.names),
            "x": [float(v) for v in self.x],
            "rms_hz": self.rms,
            "initial_rms_hz": self.initial_rms,
            "converged": self.converged,
            "message": self.message,
            "restart_costs": [float(c) for c in self.restart_costs],
        }


@dataclass
class _Problem:
    names: list
    nominal: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    base: list  # per dataset: full parameter dict
    slots: list  # per dataset: {param name: index in vector}
    targets: list
    forwards: list

    def values(self, u):
        x = u * self.nominal
        out = []
        for base, slots in zip(self.base, self.slots):
            v = dict(base)
            for name, i in slots.items():
                v[name] = x[i]
            out.append(v)
        return out

    def residuals(self, u):
        res = []
        for v, target, fwd in zip(self.values(u), self.targets, self.forwards):
            try:
                model = fwd(v)
            except (JMixerError, FloatingPointError):
                return None
            for mode, t in target.items():
                m = model[mode]
                k = min(m.shape[1], t.shape[1])
                d = (m[:, :k] - t[:, :k]).ravel()
                res.append(d[~np.isnan(t[:, :k].ravel())])
        r = np.concatenate(res)
        return r if np.all(np.isfinite(r)) else None


def _build_problem(datasets, config: FitConfig) -> _Problem:
    names, nominal, lo, hi, slots = [], [], [], [], []
    index = {}

    def add(key, nom, name):
        if key not in index:
            b = config.bounds.get(name)
            l, h = (nom * (1 - config.fraction), nom * (1 + config.fraction)) if b is None else b
            if not (l < h) or not (l <= nom <= h) or l <= 0:
                raise InfeasibleBoundsError(f"bounds for {name} are empty, nonpositive or exclude the nominal value")
            index[key] = len(names)
            names.append(key)
            nominal.append(nom)
            lo.append(l)
            hi.append(h)
        return index[key]

    base, targets, forwards = [], [], []
    for d, (data, nominal_values, forward) in enumerate(datasets):
        missing = [n for n in config.free if n not in nominal_values]
        if missing:
            raise DomainError(f"unknown parameters: {missing}")
        s = {}
        for name in config.free:
            key = name if (name in config.shared or len(datasets) == 1) else f"{name}#{d}"
            s[name] = add(key, nominal_values[name], name)
        if data.flux_phi0.size < 5:
            raise DomainError("need at least five flux points")
        if not data.resonances:
            raise DomainError("dataset has no resonances to fit")
        slots.append(s)
        base.append(dict(nominal_values))
        targets.append(data.resonances)
        forwards.append(lambda v, fwd=forward, fl=data.flux_phi0: fwd(v, fl))
    nominal = np.array(nominal)
    return _Problem(names, nominal, np.array(lo) / nominal, np.array(hi) / nominal, base, slots, targets, forwards)


#: Residuals are scaled to GHz inside the optimizer for conditioning.
_SCALE = 1e-9
_PENALTY = 1e6


def _minimize(prob: _Problem, config: FitConfig, u0: np.ndarray):
    def cost(u):
        r = prob.residuals(u)
        return _PENALTY if r is None else float(np.sum((r * _SCALE) ** 2))

    n = len(prob.names)
    rng = np.random.default_rng(config.seed)
    starts = [np.clip(u0, prob.lo, prob.hi)]
    starts += [prob.lo + (prob.hi - prob.lo) * rng.random(n) for _ in range(config.restarts - 1)]
    maxiter = config.maxiter or 200 * n

    def run(x0):
        return minimize(cost, x0, method="Nelder-Mead", bounds=list(zip(prob.lo, prob.hi)),
                        options={"maxiter": maxiter, "xatol": 1e-10, "fatol": 1e-20, "adaptive": n > 4})

    results = ordered_map(run, starts)
    # best by cost, ties by restart index
    best_i = min(range(len(results)), key=lambda i: (results[i].fun, i))
    best = results[best_i]
    u, converged, msg = best.x, bool(best.success), str(best.message)
    if config.polish:

        def rfun(v):
            r = prob.residuals(v)
            return np.full(prob_size, np.sqrt(_PENALTY)) if r is None else r * _SCALE

        r0 = prob.residuals(u)
        prob_size = 1 if r0 is None else r0.size
        pol = least_squares(rfun, np.clip(u, prob.lo, prob.hi), bounds=(prob.lo, prob.hi),
                            method="trf", x_scale="jac", xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=200 * n)
        if cost(pol.x) <= best.fun:
            u, converged, msg = pol.x, bool(pol.success), f"polished: {pol.message}"
    return u, converged, msg, [r.fun for r in results]


def _fit(datasets, config: FitConfig) -> FitResult:
    prob = _build_problem(datasets, config)
    if config.start is not None:
        u0 = np.array([config.start.get(n.split("#")[0], prob.nominal[i]) for i, n in enumerate(prob.names)])
        u0 = u0 / prob.nominal
    else:
        u0 = np.ones(len(prob.names))
    r_init = prob.residuals(np.clip(u0, prob.lo, prob.hi))
    if r_init is None:
        raise FitDegenerateError("forward model is undefined at the starting point")
    u, converged, msg, costs = _minimize(prob, config, u0)
    r = prob.residuals(u)
    if r is None or np.sum(r**2) > np.sum(r_init**2):
        u, r = np.clip(u0, prob.lo, prob.hi), r_init
        msg = "no improvement over the starting point"
    vals = prob.values(u)
    return FitResult(
        names=prob.names,
        values=vals[0] if len(vals) == 1 else vals,
        x=u * prob.nominal,
        residuals=r,
        rms=float(np.sqrt(np.mean(r**2))),
        initial_rms=float(np.sqrt(np.mean(r_init**2))),
        converged=converged,
        message=msg,
        restart_costs=costs,
    )


def fit_flux_map(data: FluxMapData, model: str, config: FitConfig, nominal) -> FitResult:
    """Fit one device.

    ``nominal`` is a ``ResonantJMParams`` (``model="resonant"``) or a coupled
    ``Netlist`` (``model="coupled"``); bounds are centred on it.
    """
    return fit_flux_maps([(data, nominal)], model, config)


def fit_flux_maps(datasets, model: str, config: FitConfig) -> FitResult:
    """Joint fit of several devices; ``config.shared`` ties parameters across them."""
    prepared = []
    for data, nominal in datasets:
        if model == RESONANT:
            prepared.append((data, resonant_model_params(nominal), resonant_forward))
        elif model == COUPLED:
            fwd = lambda v, fl, t=nominal: coupled_forward(v, fl, t)  # noqa: E731
            prepared.append((data, coupled_model_params(nominal), fwd))
        else:
            raise DomainError(f"model must be '{RESONANT}' or '{COUPLED}'")
    return _fit(prepared, config)


def synthetic_resonances(model: str, nominal, flux_phi0) -> FluxMapData:
    """Noiseless resonance data from the forward model."""
    flux_phi0 = np.asarray(flux_phi0, dtype=float)
    if model == RESONANT:
        res = resonant_forward(resonant_model_params(nominal), flux_phi0)
    elif model == COUPLED:
        res = coupled_forward(coupled_model_params(nominal), flux_phi0, nominal)
    else:
        raise DomainError(f"unknown model {model!r}")
    return FluxMapData(flux_phi0, resonances=res)


def identifiability(model: str, nominal, flux_phi0, free, rel_step: float = 1e-6) -> np.ndarray:
    """Singular values of the normalized Jacobian of resonances w.r.t. ``free``.

    Near-zero values flag parameter combinations the data cannot resolve.
    """
    flux_phi0 = np.asarray(flux_phi0, dtype=float)
    if model == RESONANT:
        base = resonant_model_params(nominal)
        fwd = lambda v: resonant_forward(v, flux_phi0)  # noqa: E731
    else:
        base = coupled_model_params(nominal)
        fwd = lambda v: coupled_forward(v, flux_phi0, nominal)  # noqa: E731

    def flat(v):
        m = fwd(v)
        return np.concatenate([m[k].ravel() for k in "ab"])

    f0 = flat(base)
    cols = []
    for name in free:
        v = dict(base)
        v[name] = base[name] * (1 + rel_step)
        cols.append((flat(v) - f0) / (rel_step * f0))
    return np.linalg.svd(np.array(cols).T, compute_uv=False)


def flux_bias(flux_phi0: float) -> FluxBias:
    return FluxBias.from_phi0(flux_phi0)
