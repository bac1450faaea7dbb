"""Batch front end: parse a run configuration, dispatch, emit CSV tables.

Config format: flat ``section.key = value`` lines, ``#`` comments.
Sections and keys are listed in the --help epilog.  Outputs are one or
more CSV tables plus a machine-readable JSON summary; identical configs
produce byte-identical files (floats are written in shortest round-trip
form, tables carry no timestamps, ordering is fixed).

Exit codes: 0 success, 2 config error, 3 numeric or precondition error,
4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import bathsim, dynamics, fieldrep, kernel, observables, transitions
from .errors import DstringError
from .model import CouplingSpec, ReservoirSpec, StringFockState, StringParams

__all__ = ["RunConfig", "ConfigError", "parse_config", "run", "main"]

COMMANDS = ("kernel", "evolve", "energies", "rates", "oracle", "shapes")

_HELP_EPILOG = """\
config keys (section.key = value):
  string.lambda | string.mass_density   mass per unit length      [1.0]
  string.mu     | string.tension        tension                   [1.0]
  string.length                         string length             [1.0]
  string.beta   | string.damping        damping coefficient       [0.1]
  coupling.kind             ohmic | power_law | tabulated | zero  [ohmic]
  coupling.cutoff           UV cutoff (required by most commands)
  coupling.prefactor, coupling.exponent      power_law parameters
  coupling.table            w:p,w:p,... samples of |f|^2 (tabulated)
  reservoir.kind            vacuum | fock | thermal               [vacuum]
  reservoir.kT              temperature (thermal)
  reservoir.quanta          nu:omega,nu:omega,... (fock)
  state.phonons             mode:count,...                        [1:1]
  numerics.n_max            retained modes                        [10]
  numerics.mode             working mode index n                  [1]
  numerics.t_max, numerics.t_points     time grid                 [60, 601]
  numerics.n_bath           oracle bath modes                     [2000]
  numerics.step             oracle integrator step    [0.45/cutoff]
  numerics.window           fit window t0:t1                      [5:40]
  numerics.epsilon          fock delta broadening     [1e-3 * omega_nu]
  numerics.r_max, numerics.r_points     shape grid                [10, 101]

csv columns per command:
  kernel    t,gamma
  evolve    t,re_c_a,im_c_a,abs_c_a,re_d_a,im_d_a
  energies  t,string_energy
  rates     channel,rate,analytic,rel_err
  oracle    t,number,string_energy,reservoir_energy,ccr_defect
  shapes    r,P,Q
"""


class ConfigError(Exception):
    pass


def _parse_pairs(text: str, what: str):
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if ":" not in item:
            raise ConfigError(f"{what}: expected colon-separated pair, got {item!r}")
        a, b = item.split(":", 1)
        out.append((a.strip(), b.strip()))
    if not out:
        raise ConfigError(f"{what}: empty list")
    return out


@dataclass
class RunConfig:
    """Validated run configuration for one CLI command."""

    command: str
    params: StringParams
    coupling: CouplingSpec
    reservoir: ReservoirSpec
    state: StringFockState
    n_max: int = 10
    mode: int = 1
    t_max: float = 60.0
    t_points: int = 601
    n_bath: int = 2000
    step: float | None = None
    window: tuple[float, float] = (5.0, 40.0)
    epsilon: float | None = None
    r_max: float = 10.0
    r_points: int = 101
    threads: int = 1
    out_prefix: str = "dstring"
    raw: dict = field(default_factory=dict)


def parse_config(text: str) -> dict:
    """Flat key=value parser; returns a string-to-string mapping."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, value = stripped.split("=", 1)
        key = key.strip().lower()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def _get(raw: dict, key: str, cast, default=None, aliases=()):
    for k in (key, *aliases):
        if k in raw:
            try:
                return cast(raw[k])
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"{k}: {exc}") from exc
    return default


def build_config(command: str, raw: dict, out_prefix: str, threads: int) -> RunConfig:
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    known_sections = {"string", "coupling", "reservoir", "state", "numerics"}
    for key in raw:
        section = key.split(".", 1)[0]
        if section not in known_sections:
            raise ConfigError(f"unknown config section in {key!r}")

    try:
        params = StringParams(
            mass_density=_get(raw, "string.lambda", float, 1.0, ("string.mass_density",)),
            tension=_get(raw, "string.mu", float, 1.0, ("string.tension",)),
            length=_get(raw, "string.length", float, 1.0),
            damping=_get(raw, "string.beta", float, 0.1, ("string.damping",)),
        )
    except ValueError as exc:
        raise ConfigError(f"string parameters: {exc}") from exc

    kind = _get(raw, "coupling.kind", str, "ohmic")
    cutoff = _get(raw, "coupling.cutoff", float, None)
    try:
        if kind == "ohmic":
            coupling = CouplingSpec.ohmic(params.damping, params.length, cutoff)
        elif kind == "power_law":
            pref = _get(raw, "coupling.prefactor", float, None)
            expo = _get(raw, "coupling.exponent", float, None)
            if pref is None or expo is None:
                raise ConfigError("power_law coupling needs coupling.prefactor and coupling.exponent")
            coupling = CouplingSpec.power_law(pref, expo, cutoff)
        elif kind == "tabulated":
            table = _get(raw, "coupling.table", str, None)
            if table is None:
                raise ConfigError("tabulated coupling needs coupling.table")
            pairs = [(float(a), float(b)) for a, b in _parse_pairs(table, "coupling.table")]
            coupling = CouplingSpec.tabulated([a for a, _ in pairs], [b for _, b in pairs], cutoff)
        elif kind == "zero":
            coupling = CouplingSpec.zero(cutoff)
        else:
            raise ConfigError(f"coupling.kind: unknown kind {kind!r}")
    except ValueError as exc:
        raise ConfigError(f"coupling: {exc}") from exc

    res_kind = _get(raw, "reservoir.kind", str, "vacuum")
    try:
        if res_kind == "vacuum":
            reservoir = ReservoirSpec.vacuum()
        elif res_kind == "thermal":
            kT = _get(raw, "reservoir.kt", float, None)
            if kT is None:
                raise ConfigError("thermal reservoir needs reservoir.kT")
            reservoir = ReservoirSpec.thermal(kT)
        elif res_kind == "fock":
            quanta = _get(raw, "reservoir.quanta", str, None)
            if quanta is None:
                raise ConfigError("fock reservoir needs reservoir.quanta")
            reservoir = ReservoirSpec.fock(
                [(int(a), float(b)) for a, b in _parse_pairs(quanta, "reservoir.quanta")]
            )
        else:
            raise ConfigError(f"reservoir.kind: unknown kind {res_kind!r}")
    except ValueError as exc:
        raise ConfigError(f"reservoir: {exc}") from exc

    phonons = _get(raw, "state.phonons", str, "1:1")
    try:
        state = StringFockState.from_pairs(
            (int(a), int(b)) for a, b in _parse_pairs(phonons, "state.phonons")
        )
    except ValueError as exc:
        raise ConfigError(f"state.phonons: {exc}") from exc

    window_text = _get(raw, "numerics.window", str, "5:40")
    try:
        w0, w1 = window_text.split(":")
        window = (float(w0), float(w1))
    except ValueError as exc:
        raise ConfigError(f"numerics.window: {exc}") from exc

    cfg = RunConfig(
        command=command,
        params=params,
        coupling=coupling,
        reservoir=reservoir,
        state=state,
        n_max=_get(raw, "numerics.n_max", int, 10),
        mode=_get(raw, "numerics.mode", int, 1),
        t_max=_get(raw, "numerics.t_max", float, 60.0),
        t_points=_get(raw, "numerics.t_points", int, 601),
        n_bath=_get(raw, "numerics.n_bath", int, 2000),
        step=_get(raw, "numerics.step", float, None),
        window=window,
        epsilon=_get(raw, "numerics.epsilon", float, None),
        r_max=_get(raw, "numerics.r_max", float, 10.0),
        r_points=_get(raw, "numerics.r_points", int, 101),
        threads=threads,
        out_prefix=out_prefix,
        raw=raw,
    )
    if cfg.n_max < 1 or cfg.mode < 1:
        raise ConfigError("numerics.n_max and numerics.mode must be >= 1")
    if cfg.t_max <= 0 or cfg.t_points < 2:
        raise ConfigError("numerics.t_max must be > 0 and numerics.t_points >= 2")
    if cfg.n_bath < 2:
        raise ConfigError("numerics.n_bath must be >= 2")
    return cfg


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_summary(path: str, summary: dict) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(summary, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _t_grid(cfg: RunConfig) -> np.ndarray:
    return np.linspace(0.0, cfg.t_max, cfg.t_points)


def _cmd_kernel(cfg: RunConfig):
    t = _t_grid(cfg)
    sample = kernel.gamma_kernel(cfg.coupling, t, workers=cfg.threads)
    rows = list(zip(t.tolist(), sample.gamma.tolist()))
    summary = {
        "cutoff": sample.cutoff_used,
        "gamma_integral": kernel.gamma_integral(sample, float(t[-1])),
    }
    if cfg.coupling.kind == "ohmic":
        target = cfg.coupling.damping / 2.0
        summary["markov_half_weight_target"] = target
        if target:
            summary["gamma_integral_rel_err"] = abs(summary["gamma_integral"] - target) / target
    return {"kernel": (["t", "gamma"], rows)}, summary


def _cmd_evolve(cfg: RunConfig):
    cut = cfg.coupling.effective_cutoff
    if cut is None and cfg.coupling.kind != "zero":
        raise ConfigError("evolve needs coupling.cutoff")
    t = _t_grid(cfg)
    if cfg.params.damping > 0 and cfg.coupling.kind != "zero":
        grid = dynamics.resonance_grid(cfg.params, cfg.mode, cut)
    else:
        w_n = cfg.params.mode_frequency(cfg.mode)
        grid = np.linspace(w_n / 64, cut if cut else 4 * w_n, 257)
    sol = dynamics.mode_solution(cfg.params, cfg.coupling, cfg.mode, t, grid)
    rows = [
        (float(ti), ca.real, ca.imag, abs(ca), da.real, da.imag)
        for ti, ca, da in zip(t, sol.c_a, sol.d_a)
    ]
    probe = min(10.0 / sol.omega_n, float(t[-1]))
    summary = {
        "mode": cfg.mode,
        "omega_n": sol.omega_n,
        "omega_damped": sol.omega_damped,
        "envelope_rate": sol.envelope_rate,
        "ccr_defect_probe_t": probe,
        "ccr_defect": dynamics.ccr_defect(sol, probe),
    }
    return {"evolve": (["t", "re_c_a", "im_c_a", "abs_c_a", "re_d_a", "im_d_a"], rows)}, summary


def _cmd_energies(cfg: RunConfig):
    cut = cfg.coupling.effective_cutoff
    if cut is None and cfg.coupling.kind != "zero":
        raise ConfigError("energies needs coupling.cutoff")
    t = _t_grid(cfg)
    sols = {}
    for m, _ in cfg.state.occupation:
        if cfg.params.damping > 0 and cfg.coupling.kind != "zero":
            grid = dynamics.resonance_grid(cfg.params, m, cut)
        else:
            w_m = cfg.params.mode_frequency(m)
            grid = np.linspace(w_m / 64, cut if cut else 4 * w_m, 257)
        sols[m] = dynamics.mode_solution(cfg.params, cfg.coupling, m, t, grid)
    report = observables.string_energy_timeseries(sols, cfg.state)
    rows = list(zip(t.tolist(), report.string_energy.tolist()))
    quad = observables.reservoir_energy_asymptotic(cfg.params, cfg.state, method="quadrature") \
        if cfg.params.damping > 0 else 0.0
    summary = {
        "asymptote_string_closed_form": report.asymptote_string,
        "asymptote_reservoir_closed_form": report.asymptote_reservoir,
        "asymptote_reservoir_quadrature": quad,
        "initial_energy": float(report.string_energy[0]),
        "final_energy": float(report.string_energy[-1]),
    }
    if report.asymptote_reservoir:
        summary["reservoir_quadrature_rel_err"] = abs(
            quad - report.asymptote_reservoir
        ) / report.asymptote_reservoir
    return {"energies": (["t", "string_energy"], rows)}, summary


def _cmd_rates(cfg: RunConfig):
    reports: list[transitions.RateReport] = []
    cut = cfg.coupling.effective_cutoff
    for m in range(1, cfg.n_max + 1):
        if cut is not None and cfg.params.mode_frequency(m) > cut:
            continue
        reports.append(transitions.emission_rate(cfg.params, cfg.coupling, m))
        if cfg.reservoir.kind == "thermal":
            reports.append(
                transitions.absorption_rate_thermal(cfg.params, cfg.coupling, cfg.reservoir.kT, m)
            )
    if cfg.reservoir.kind == "fock":
        for nu in sorted({nu for nu, _ in cfg.reservoir.quanta}):
            reports.append(
                transitions.absorption_rate_fock(
                    cfg.params, cfg.coupling, cfg.reservoir, nu, broadening=cfg.epsilon
                )
            )
    rows = [(r.channel, r.rate, r.analytic, r.rel_err) for r in reports]
    summary: dict = {"channels": len(reports)}
    emission = [r for r in reports if r.channel.startswith("emission")]
    if emission:
        summary["emission_rate"] = emission[0].rate
        summary["emission_rate_analytic"] = emission[0].analytic
    if cfg.reservoir.kind == "thermal" and emission:
        m0 = cfg.mode
        em = transitions.emission_rate(cfg.params, cfg.coupling, m0)
        ab = transitions.absorption_rate_thermal(cfg.params, cfg.coupling, cfg.reservoir.kT, m0)
        summary["detailed_balance_ratio"] = ab.rate / em.rate
        summary["detailed_balance_target"] = math.exp(
            -cfg.params.mode_frequency(m0) / cfg.reservoir.kT
        )
    return {"rates": (["channel", "rate", "analytic", "rel_err"], rows)}, summary


def _cmd_oracle(cfg: RunConfig):
    cut = cfg.coupling.effective_cutoff
    if cut is None:
        raise ConfigError("oracle needs coupling.cutoff")
    bath = bathsim.discretize_bath(cfg.coupling, cfg.n_bath)
    step = cfg.step if cfg.step is not None else 0.45 / cut
    t = _t_grid(cfg)
    # snap the sample spacing to an integer number of steps
    dt = t[1] - t[0]
    k = max(1, round(dt / step))
    step = dt / k
    run_data = bathsim.evolve_coefficients(cfg.params, bath, cfg.mode, t, step)
    fitted = bathsim.fit_decay_rate(run_data, cfg.window)
    analytic = cfg.params.damping / cfg.params.mass_density
    emission = transitions.emission_rate(cfg.params, cfg.coupling, cfg.mode)
    defects = run_data.ccr_defect()
    rows = [
        (float(ti), ni, si, ri, di)
        for ti, ni, si, ri, di in zip(
            t, run_data.number, run_data.string_energy,
            run_data.reservoir_energy, defects,
        )
    ]
    summary = {
        "n_bath": bath.n_modes,
        "cutoff": bath.cutoff,
        "step": run_data.step,
        "recurrence_time": run_data.recurrence_time,
        "fitted_number_decay_rate": fitted,
        "analytic_number_decay_rate": analytic,
        "emission_rate": emission.rate,
        "max_ccr_defect": float(defects.max()),
    }
    if analytic:
        summary["rate_rel_err"] = abs(fitted - analytic) / analytic
    return {
        "oracle": (["t", "number", "string_energy", "reservoir_energy", "ccr_defect"], rows)
    }, summary


def _cmd_shapes(cfg: RunConfig):
    r = np.linspace(0.0, cfg.r_max, cfg.r_points)
    shapes = fieldrep.source_shapes(cfg.coupling, r)
    rows = list(zip(r.tolist(), shapes.p.tolist(), shapes.q.tolist()))
    summary = {
        "P_at_origin": float(shapes.p[0]),
        "max_abs_Q": float(np.max(np.abs(shapes.q))),
    }
    return {"shapes": (["r", "P", "Q"], rows)}, summary


_DISPATCH = {
    "kernel": _cmd_kernel,
    "evolve": _cmd_evolve,
    "energies": _cmd_energies,
    "rates": _cmd_rates,
    "oracle": _cmd_oracle,
    "shapes": _cmd_shapes,
}


def run(config: RunConfig) -> int:
    """Execute one command; writes <prefix>_<table>.csv and <prefix>_summary.json."""
    tables, summary = _DISPATCH[config.command](config)
    summary["command"] = config.command
    for name, (header, rows) in tables.items():
        _write_csv(f"{config.out_prefix}_{name}.csv", header, rows)
    _write_summary(f"{config.out_prefix}_summary.json", summary)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dstring",
        description="Damped vibrating string coupled to a scalar-field reservoir.",
        epilog=_HELP_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="path to key=value config file")
    parser.add_argument("--out", default="dstring", help="output path prefix")
    parser.add_argument("--threads", type=int, default=1, help="worker threads for grid sweeps")
    args = parser.parse_args(argv)

    try:
        with open(args.config) as fh:
            raw = parse_config(fh.read())
        cfg = build_config(args.command, raw, args.out, args.threads)
    except OSError as exc:
        print(f"dstring: config I/O error: {exc}", file=sys.stderr)
        return 4
    except ConfigError as exc:
        print(f"dstring: config error: {exc}", file=sys.stderr)
        return 2

    try:
        return run(cfg)
    except ConfigError as exc:
        print(f"dstring: config error: {exc}", file=sys.stderr)
        return 2
    except DstringError as exc:
        print(f"dstring: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"dstring: invalid value: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"dstring: I/O error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
