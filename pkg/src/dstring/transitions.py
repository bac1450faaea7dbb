"""First-order transition rates and reduced density-matrix diagonals.

Interaction-picture perturbation theory with the rotating-wave
truncation: only channels that move one excitation between string and
bath survive.  Probabilities grow linearly in t in the long-time
(golden-rule) regime; rates are reported as Gamma/t and the raw
probability is available from the report.

The thermal contraction rules follow the model as stated: the
absorption channel is weighted by exp(-w/kT) relative to emission,
which is a Boltzmann factor rather than a Bose-Einstein occupation.
The conventional occupancy variant is available behind an explicit
flag for comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import CutoffExceeded
from .model import CouplingSpec, ReservoirSpec, StringFockState, StringParams, coupling_power

__all__ = [
    "RateReport",
    "emission_rate",
    "absorption_rate_fock",
    "absorption_rate_thermal",
    "reduced_density_diagonal",
]


@dataclass(frozen=True)
class RateReport:
    """One transition channel: its rate Gamma/t, the closed-form value it
    should reduce to (equal to ``rate`` when no reduction applies), and
    the Lorentzian half-width used to regularize discrete resonances."""

    channel: str
    rate: float
    analytic: float
    broadening: float | None = None

    def probability(self, t: float) -> float:
        """Raw first-order transition probability Gamma = rate * t."""
        return self.rate * t

    @property
    def rel_err(self) -> float:
        if self.analytic == 0.0:
            return 0.0 if self.rate == 0.0 else math.inf
        return abs(self.rate - self.analytic) / abs(self.analytic)


def _mode_frequency_checked(params: StringParams, spec: CouplingSpec, m: int) -> float:
    w = params.mode_frequency(m)
    cut = spec.effective_cutoff
    if cut is not None and w > cut:
        raise CutoffExceeded(
            f"omega_{m} = {w:.6g} exceeds the coupling cutoff {cut:.6g}; "
            "no resonant bath modes exist"
        )
    return w


def emission_rate(params: StringParams, spec: CouplingSpec, m: int) -> RateReport:
    """Spontaneous emission rate of mode m into the vacuum reservoir,

        Gamma/t = 2 L pi^2 w_m^3 |f(w_m)|^2 / lambda.

    For the ohmic coupling the frequency dependence cancels and the rate
    is beta/(2 lambda) for every mode below the cutoff.
    """
    w = _mode_frequency_checked(params, spec, m)
    lam, L = params.mass_density, params.length
    power = float(coupling_power(spec, w))
    rate = 2.0 * L * math.pi**2 * w**3 * power / lam
    if spec.kind == "ohmic":
        analytic = spec.damping * L / (2.0 * lam * spec.length)
    else:
        analytic = rate
    return RateReport(channel=f"emission(m={m})", rate=rate, analytic=analytic)


def _lorentzian(x: float, eps: float) -> float:
    """Normalized Lorentzian delta regularization, peak 1/(pi eps)."""
    return eps / (math.pi * (x * x + eps * eps))


def absorption_rate_fock(
    params: StringParams,
    spec: CouplingSpec,
    reservoir: ReservoirSpec,
    nu: int,
    broadening: float | None = None,
) -> RateReport:
    """Absorption of reservoir quanta into string mode nu,

        Gamma/t = (pi L w_nu / 2 lambda) sum_r |f(w_p_r)|^2 delta_eps(w_p_r - w_nu),

    with the delta regularized as a normalized Lorentzian of half-width
    eps (default 1e-3 w_nu, recorded in the report).  Additive over
    quanta; far off-resonance quanta contribute nothing.
    """
    if reservoir.kind != "fock":
        raise ValueError("absorption_rate_fock needs a fock reservoir")
    w_nu = params.mode_frequency(nu)
    eps = 1e-3 * w_nu if broadening is None else float(broadening)
    if eps <= 0:
        raise ValueError("broadening must be positive")
    lam, L = params.mass_density, params.length
    pref = math.pi * L * w_nu / (2.0 * lam)
    rate = 0.0
    for _, w_p in reservoir.quanta:
        rate += pref * float(coupling_power(spec, w_p)) * _lorentzian(w_p - w_nu, eps)
    return RateReport(
        channel=f"absorption(fock->m={nu})", rate=rate, analytic=rate, broadening=eps
    )


def absorption_rate_thermal(
    params: StringParams,
    spec: CouplingSpec,
    kT: float,
    m: int,
    occupation: str = "boltzmann",
) -> RateReport:
    """Thermal absorption into mode m.

    The stated contraction rules give emission_rate(m) * exp(-w_m/kT),
    so absorption/emission is exactly the detailed-balance factor.
    ``occupation="bose_einstein"`` swaps the Boltzmann factor for the
    occupancy 1/(exp(w/kT) - 1); that variant is not part of the model's
    stated rules and is labeled in the channel name.
    """
    if kT <= 0:
        raise ValueError("kT must be positive")
    base = emission_rate(params, spec, m)
    w = params.mode_frequency(m)
    if occupation == "boltzmann":
        factor = math.exp(-w / kT)
        tag = ""
    elif occupation == "bose_einstein":
        factor = 1.0 / math.expm1(w / kT)
        tag = ",bose_einstein"
    else:
        raise ValueError(f"unknown occupation rule {occupation!r}")
    return RateReport(
        channel=f"absorption(thermal->m={m}{tag})",
        rate=base.rate * factor,
        analytic=base.analytic * factor,
    )


def reduced_density_diagonal(
    params: StringParams,
    spec: CouplingSpec,
    initial: StringFockState,
    reservoir: ReservoirSpec,
    t: float,
    n_max: int | None = None,
    broadening: float | None = None,
) -> list[tuple[StringFockState, float]]:
    """Diagonal of the reduced string density matrix after the bath trace.

    First order in the coupling with the long-time delta applied: the
    initial state keeps weight 1 and each reachable state appears with
    its channel probability Gamma = rate * t.  Validity (weights << 1)
    is the caller's responsibility.

    Channels: one emission per occupied mode (count lowered by one, the
    stated weight carries no count factor); for a fock reservoir, one
    absorption per quantum into the string mode matching its field
    index; for a thermal reservoir, one absorption into every mode up to
    ``n_max`` (default: the highest occupied mode) below the cutoff.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    out: list[tuple[StringFockState, float]] = [(initial, 1.0)]
    if t == 0.0:
        return out

    for m, r in initial.occupation:
        rep = emission_rate(params, spec, m)
        out.append((initial.with_count(m, r - 1), rep.rate * t))

    if reservoir.kind == "fock":
        by_mode: dict[int, float] = {}
        for nu, w_p in reservoir.quanta:
            one = ReservoirSpec.fock([(nu, w_p)])
            rep = absorption_rate_fock(params, spec, one, nu, broadening=broadening)
            by_mode[nu] = by_mode.get(nu, 0.0) + rep.rate
        for nu in sorted(by_mode):
            gained = initial.with_count(nu, initial.count(nu) + 1)
            out.append((gained, by_mode[nu] * t))
    elif reservoir.kind == "thermal":
        top = n_max if n_max is not None else max(initial.max_mode(), 1)
        cut = spec.effective_cutoff
        for nu in range(1, top + 1):
            if cut is not None and params.mode_frequency(nu) > cut:
                continue
            rep = absorption_rate_thermal(params, spec, reservoir.kT, nu)
            gained = initial.with_count(nu, initial.count(nu) + 1)
            out.append((gained, rep.rate * t))
    return out
