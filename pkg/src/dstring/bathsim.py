"""Brute-force oracle: a discretized bath evolved as a closed linear system.

The continuum of radial bath modes is replaced by N_b discrete
oscillators with couplings g_j^2 = 4 pi w_j^2 |f(w_j)|^2 dw_j (the bare
radial measure absorbed into the weight).  The Heisenberg equations of
the coupled quadratic Hamiltonian close on the operator family
(A_n, B_n, b_j, b_j^dag); tracking coefficient vectors under the
constant generator G gives every observable by contraction, with no
stochastic sampling.

As everywhere in the dynamics, the generator couples with the
full-friction weight sqrt(2) g_j (model.FULL_FRICTION_FACTOR), so the
reduced string motion carries the stated friction coefficient beta and
the phonon number decays at beta/lambda.

A finite bath refeeds energy at the recurrence time 2 pi / dw; every
fit must finish before it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .envelope import boxcar_average, log_linear_rate
from .errors import (
    CutoffRequired,
    RecurrenceContamination,
    StepTooLarge,
    WindowOutsideRun,
)
from .model import (
    FULL_FRICTION_FACTOR,
    CouplingSpec,
    StringParams,
    spectral_weight,
)
from .quadrature import integrate_adaptive

__all__ = [
    "DiscreteBath",
    "GridPolicy",
    "OracleRun",
    "discretize_bath",
    "moment_defect",
    "evolve_coefficients",
    "fit_decay_rate",
]


@dataclass(frozen=True)
class GridPolicy:
    """How bath frequencies are placed on (0, cutoff].

    ``uniform``: midpoint cells of equal width.  ``resonance``: the same
    plus a refined cluster around each listed mode frequency, where the
    Lorentzian response would otherwise be unresolved.
    """

    kind: str = "uniform"
    params: StringParams | None = None
    modes: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("uniform", "resonance"):
            raise ValueError(f"unknown grid policy {self.kind!r}")
        if self.kind == "resonance" and (self.params is None or not self.modes):
            raise ValueError("resonance policy needs params and mode indices")


@dataclass(frozen=True, eq=False)
class DiscreteBath:
    """Discrete radial bath modes and their cell widths.

    ``g`` holds the bare-measure couplings; the dynamical generator
    applies the full-friction factor on top of them.
    """

    omega: np.ndarray
    g: np.ndarray
    widths: np.ndarray
    cutoff: float

    def __post_init__(self) -> None:
        for name in ("omega", "g", "widths"):
            getattr(self, name).setflags(write=False)

    @property
    def n_modes(self) -> int:
        return int(self.omega.size)

    @property
    def recurrence_time(self) -> float:
        """Earliest spurious energy return, 2 pi over the coarsest spacing."""
        if np.all(self.g == 0.0):
            return math.inf
        return 2.0 * math.pi / float(np.max(self.widths))


def _edges_to_bath(spec: CouplingSpec, edges: np.ndarray) -> DiscreteBath:
    omega = 0.5 * (edges[:-1] + edges[1:])
    widths = np.diff(edges)
    g = np.sqrt(spectral_weight(spec, omega) * widths)
    return DiscreteBath(omega=omega, g=g, widths=widths, cutoff=float(edges[-1]))


def discretize_bath(
    spec: CouplingSpec,
    n_modes: int,
    grid_policy: GridPolicy | str = "uniform",
) -> DiscreteBath:
    """Place n_modes bath oscillators on (0, cutoff] under the policy."""
    if n_modes < 2:
        raise ValueError("need at least two bath modes")
    cut = spec.effective_cutoff
    if cut is None:
        raise CutoffRequired("bath discretization needs a finite cutoff")
    policy = GridPolicy(kind=grid_policy) if isinstance(grid_policy, str) else grid_policy

    if policy.kind == "uniform":
        edges = np.linspace(0.0, cut, n_modes + 1)
        return _edges_to_bath(spec, edges)

    n_res = n_modes // 2
    n_unif = n_modes - n_res
    edges = [np.linspace(0.0, cut, n_unif + 1)]
    per_mode = max(n_res // len(policy.modes), 4)
    width = policy.params.damping / policy.params.mass_density
    for m in policy.modes:
        w_m = policy.params.mode_frequency(m)
        lo = max(w_m - 10 * width, 0.0)
        hi = min(w_m + 10 * width, cut)
        edges.append(np.linspace(lo, hi, per_mode + 1))
    merged = np.unique(np.concatenate(edges))
    return _edges_to_bath(spec, merged)


def moment_defect(
    bath: DiscreteBath, spec: CouplingSpec, power: float, rel_tol: float = 1e-10
) -> float:
    """Relative error of the discrete moment sum_j g_j^2 w_j^power against
    the continuum integral of the radial measure over the bath's support."""
    lo = float(bath.omega[0] - 0.5 * bath.widths[0])
    lo = max(lo, 1e-12 * bath.cutoff)
    target = integrate_adaptive(
        lambda w: spectral_weight(spec, w) * w**power, lo, bath.cutoff,
        rel_tol=rel_tol,
    )
    got = float(np.sum(bath.g**2 * bath.omega**power))
    if target == 0.0:
        return abs(got)
    return abs(got - target) / abs(target)


@dataclass(frozen=True, eq=False)
class OracleRun:
    """Sampled coefficient state and extracted observables of one evolution.

    ``column_a`` holds, per sample time, the coefficient of the initial
    annihilation operator a in every evolved operator, ordered
    (A, B, b_1..b_N, b_1^dag..b_N^dag); the a^dag content follows from
    conjugation symmetry of the hermitian pair.  Scalar series (phonon
    number per initial phonon, energies, commutator) are sampled densely.
    """

    params: StringParams
    mode: int
    omega_n: float
    t_grid: np.ndarray
    number: np.ndarray
    string_energy: np.ndarray
    reservoir_energy: np.ndarray
    ccr: np.ndarray
    column_a: np.ndarray
    bath: DiscreteBath
    step: float

    def __post_init__(self) -> None:
        for name in ("t_grid", "number", "string_energy", "reservoir_energy",
                     "ccr", "column_a"):
            getattr(self, name).setflags(write=False)

    @property
    def recurrence_time(self) -> float:
        return self.bath.recurrence_time

    def ccr_defect(self) -> np.ndarray:
        return np.abs(self.ccr - 2j / self.params.length)


def _generator(params: StringParams, bath: DiscreteBath, omega_n: float):
    lam, L = params.mass_density, params.length
    g = math.sqrt(FULL_FRICTION_FACTOR) * bath.g
    wj = bath.omega
    n = bath.n_modes
    half = 1j * g * (L / 2.0)

    def forward(v):
        vA, vB = v[0], v[1]
        vb = v[2:2 + n]
        vc = v[2 + n:]
        dA = (vB - g @ vb - g @ vc) / lam
        out = np.empty_like(v)
        out[0] = dA
        out[1] = -lam * omega_n**2 * vA
        out[2:2 + n] = -1j * wj[:, None] * vb + half[:, None] * dA
        out[2 + n:] = 1j * wj[:, None] * vc - half[:, None] * dA
        return out

    def adjoint(v):
        vA, vB = v[0], v[1]
        vb = v[2:2 + n]
        vc = v[2 + n:]
        gb = g @ vb
        gc = g @ vc
        out = np.empty_like(v)
        out[0] = -lam * omega_n**2 * vB
        out[1] = vA / lam + (1j * L / (2.0 * lam)) * (gb - gc)
        common = -vA / lam - (1j * L / (2.0 * lam)) * (gb - gc)
        out[2:2 + n] = g[:, None] * common - 1j * wj[:, None] * vb
        out[2 + n:] = g[:, None] * common + 1j * wj[:, None] * vc
        return out

    return forward, adjoint


def _rk4_step(f, y, dt):
    k1 = f(y)
    k2 = f(y + (0.5 * dt) * k1)
    k3 = f(y + (0.5 * dt) * k2)
    k4 = f(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def evolve_coefficients(
    params: StringParams,
    bath: DiscreteBath,
    n: int,
    t_grid: np.ndarray,
    integrator_step: float,
) -> OracleRun:
    """Integrate the closed coefficient ODEs with a fixed-step 4th-order
    scheme and sample observables on t_grid.

    The step must resolve the fastest bath mode (cutoff * step < 0.5).
    The decoupled (g = 0) system is integrated by the same path, so its
    energy is conserved to the integrator order.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 2 or t[0] != 0.0:
        raise ValueError("t_grid must start at 0 with at least two samples")
    dt_samp = np.diff(t)
    if not np.allclose(dt_samp, dt_samp[0], rtol=1e-9, atol=0.0):
        raise ValueError("t_grid must be uniform")
    if bath.cutoff * integrator_step >= 0.5:
        raise StepTooLarge(
            f"cutoff * step = {bath.cutoff * integrator_step:.3g} >= 0.5"
        )
    per = dt_samp[0] / integrator_step
    k_per = int(round(per))
    if k_per < 1 or abs(per - k_per) > 1e-8 * per:
        raise ValueError("sample spacing must be an integer multiple of the step")
    step = dt_samp[0] / k_per

    params.shifted_frequency(n)  # rejects the overdamped regime
    omega_n = params.mode_frequency(n)
    lam, L = params.mass_density, params.length
    forward, adjoint = _generator(params, bath, omega_n)

    dim = 2 + 2 * bath.n_modes
    rows = np.zeros((dim, 2), dtype=complex)
    rows[0, 0] = 1.0   # row of A
    rows[1, 1] = 1.0   # row of B
    col = np.zeros((dim, 1), dtype=complex)
    alpha_a = 1.0 / math.sqrt(L * lam * omega_n)
    col[0, 0] = alpha_a
    col[1, 0] = -1j * math.sqrt(lam * omega_n / L)

    n_b = bath.n_modes
    n_t = t.size
    number = np.empty(n_t)
    e_res = np.empty(n_t)
    ccr = np.empty(n_t, dtype=complex)
    column_a = np.empty((n_t, dim), dtype=complex)

    def sample(i):
        zA, zB = rows[:, 0], rows[:, 1]
        p = col[:, 0]
        c_a, d_a = p[0], p[1]
        number[i] = 0.5 * (L * lam * omega_n * abs(c_a) ** 2
                           + (L / (lam * omega_n)) * abs(d_a) ** 2)
        occ = np.abs(p[2:2 + n_b]) ** 2 + np.abs(p[2 + n_b:]) ** 2
        e_res[i] = float(bath.omega @ occ)
        ccr[i] = (2j / L) * (zA[0] * zB[1] - zA[1] * zB[0]) + np.sum(
            zA[2:2 + n_b] * zB[2 + n_b:] - zA[2 + n_b:] * zB[2:2 + n_b]
        )
        column_a[i] = p

    sample(0)
    for i in range(1, n_t):
        for _ in range(k_per):
            rows = _rk4_step(adjoint, rows, step)
            col = _rk4_step(forward, col, step)
        sample(i)

    return OracleRun(
        params=params,
        mode=n,
        omega_n=omega_n,
        t_grid=t,
        number=number,
        string_energy=omega_n * number,
        reservoir_energy=e_res,
        ccr=ccr,
        column_a=column_a,
        bath=bath,
        step=step,
    )


def fit_decay_rate(run: OracleRun, window: tuple[float, float]) -> float:
    """Exponential decay rate of the phonon-number expectation.

    The number signal is boxcar-averaged over one damped-oscillation
    period (removing the 2 Omega ripple) and fitted log-linearly inside
    the window.  Rejects windows that start inside the initial slip
    (0.1 lambda / beta) or end past the bath recurrence time.  Compare
    against beta/lambda for the number decay (twice the per-channel
    emission rate beta / 2 lambda).
    """
    t0, t1 = window
    t = run.t_grid
    if t0 >= t1 or t0 < t[0] or t1 > t[-1]:
        raise WindowOutsideRun(f"window {window} outside run [{t[0]}, {t[-1]}]")
    coupled = bool(np.any(run.bath.g != 0.0))
    if coupled and run.params.damping > 0:
        slip = 0.1 * run.params.mass_density / run.params.damping
        if t0 < slip:
            raise WindowOutsideRun(
                f"window start {t0} inside the initial slip time {slip:.3g}"
            )
    if t1 > run.recurrence_time:
        raise RecurrenceContamination(
            f"window end {t1} past the recurrence time {run.recurrence_time:.3g}"
        )
    omega_damped = math.sqrt(
        max(run.omega_n**2 - run.params.envelope_rate**2, 1e-300)
    )
    period = math.pi / omega_damped  # the number ripples at 2 Omega
    centers, avg = boxcar_average(t, run.number, period)
    return log_linear_rate(centers, avg, window=(t0, t1))
