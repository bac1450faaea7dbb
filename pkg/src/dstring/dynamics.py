"""Exact per-mode Heisenberg solutions as coefficient functions.

The dynamics is linear, so every Heisenberg operator is a fixed linear
combination of the initial operators.  For string mode n the canonical
pair is

    A_n = (a_n + a_n^dag) / sqrt(L lambda omega_n),
    B_n = i sqrt(lambda omega_n / L) (a_n^dag - a_n),

with [A_n, B_n] = 2i/L, and the bath enters through radial operators
b(omega) with [b(omega), b^dag(omega')] = delta(omega - omega').  A
solution is stored as

    A_n(t) = c_a(t) a + conj(c_a)(t) a^dag
             + int dw [u(w,t) b(w) + conj(u)(w,t) b^dag(w)],

and similarly for the velocity and for B_n(t).  All time dependence is
closed form (damped cosines and drive phases); no ODE is integrated.

The damped mode equation


    A''_n + omega_n^2 A_n + (beta/lambda) A'_n = drive

carries the full friction coefficient beta, which fixes the dynamical
spectral weight to twice the bare radial measure (model.dynamical_weight).
Its driven response is

    A_n(t) = h_A(t) [A_n(0) - M_n(0)] + h_V(t) [A'_n(0) - M'_n(0)] + M_n(t),

where h_A, h_V are the homogeneous damped-oscillator solutions with unit
initial value and unit initial velocity, and M_n is the stationary
response to the bath drive with density

    m(w) = (i / lambda) w g(w) / (omega_n^2 - w^2 - i beta w / lambda),

g(w) the root of the dynamical weight.  B_n(t) follows from
B'_n = -lambda omega_n^2 A_n by analytic time integration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import GridTooCoarse, OverdampedMode
from .model import CouplingSpec, StringParams, dynamical_weight

__all__ = [
    "CoefficientSolution",
    "BathModeSolution",
    "resonance_grid",
    "mode_solution",
    "bath_mode_solution",
    "ccr_defect",
]


def _check_underdamped(params: StringParams, n: int) -> tuple[float, float, float]:
    omega_n = params.mode_frequency(n)
    a = params.envelope_rate
    if omega_n <= a:
        raise OverdampedMode(
            f"mode {n}: omega_n = {omega_n:.6g} <= beta/(2 lambda) = {a:.6g}"
        )
    return omega_n, a, math.sqrt(omega_n**2 - a**2)


def resonance_grid(
    params: StringParams,
    n: int,
    cutoff: float,
    coarse_step: float | None = None,
    points_per_width: int = 24,
    window_widths: float = 12.0,
) -> np.ndarray:
    """Frequency grid on (0, cutoff], locally refined around omega_n.

    The refined window spans ``window_widths`` Lorentzian widths
    beta/lambda on either side of the resonance with at least
    ``points_per_width`` points per width; a uniform grid that fine
    everywhere would waste two orders of magnitude of points.
    """
    omega_n, a, _ = _check_underdamped(params, n)
    if cutoff <= omega_n:
        raise ValueError("cutoff must exceed the resonance frequency")
    if coarse_step is None:
        coarse_step = omega_n / 256.0
    coarse = np.arange(coarse_step, cutoff, coarse_step)
    # infrared tail: bath densities stay finite but non-analytic (half
    # powers of omega) down to 0; geometric points keep the quadrature
    # from dropping the [0, coarse_step] strip
    infrared = np.geomspace(coarse_step * 1e-8, coarse_step, 33)
    parts = [infrared, coarse, np.array([cutoff])]
    width = 2.0 * a  # beta / lambda
    if width > 0:
        lo = max(coarse_step / 4.0, omega_n - window_widths * width)
        hi = min(cutoff, omega_n + window_widths * width)
        fine_step = width / points_per_width
        parts.append(np.arange(lo, hi, fine_step))
    grid = np.unique(np.concatenate(parts))
    return grid[(grid > 0) & (grid <= cutoff)]


@dataclass(frozen=True, eq=False)
class CoefficientSolution:
    """Coefficient representation of A_n(t), its velocity, and B_n(t).

    String-ladder coefficients are stored per time point; bath
    coefficient densities over (omega_grid x t_grid) are materialized on
    demand from their closed-form factors (they can be large).
    Hermiticity of A_n makes the a^dag and b^dag coefficients the
    conjugates of the stored ones.
    """

    mode: int
    omega_n: float
    omega_damped: float
    envelope_rate: float
    length: float
    mass_density: float
    t_grid: np.ndarray
    omega_grid: np.ndarray
    # initial-operator content of A_n(0), dA_n/dt(0), B_n(0)
    alpha_a: float
    alphadot_a: complex
    b0_a: complex
    # homogeneous solutions and their integrals on t_grid
    h_a: np.ndarray
    h_v: np.ndarray
    hdot_a: np.ndarray
    hdot_v: np.ndarray
    int_h_a: np.ndarray
    int_h_v: np.ndarray
    # bath densities on omega_grid
    drive_density: np.ndarray       # m(w)
    velocity_density: np.ndarray    # vtilde(w) = -g/lambda + i w m(w)
    # string-ladder coefficient functions
    c_a: np.ndarray = field(init=False)
    c_a_dot: np.ndarray = field(init=False)
    d_a: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        c_a = self.h_a * self.alpha_a + self.h_v * self.alphadot_a
        c_a_dot = self.hdot_a * self.alpha_a + self.hdot_v * self.alphadot_a
        lw2 = self.mass_density * self.omega_n**2
        d_a = self.b0_a - lw2 * (self.int_h_a * self.alpha_a + self.int_h_v * self.alphadot_a)
        object.__setattr__(self, "c_a", c_a)
        object.__setattr__(self, "c_a_dot", c_a_dot)
        object.__setattr__(self, "d_a", d_a)
        for name in ("t_grid", "omega_grid", "h_a", "h_v", "hdot_a", "hdot_v",
                     "int_h_a", "int_h_v", "drive_density", "velocity_density",
                     "c_a", "c_a_dot", "d_a"):
            getattr(self, name).setflags(write=False)

    @property
    def c_adag(self) -> np.ndarray:
        return np.conj(self.c_a)

    def _bath_parts(self, t):
        """h_A, h_V, int h_A, int h_V and drive phase at arbitrary times t."""
        t = np.asarray(t, dtype=float)
        a, Om, w2 = self.envelope_rate, self.omega_damped, self.omega_n**2
        env = np.exp(-a * t)
        c, s = np.cos(Om * t), np.sin(Om * t)
        h_a = env * (c + (a / Om) * s)
        h_v = env * s / Om
        big_hv = (1.0 - h_a) / w2
        big_ha = h_v + 2.0 * a * big_hv
        return h_a, h_v, big_ha, big_hv

    def bath_coefficient(self, t) -> np.ndarray:
        """u(omega, t), the b(omega) density of A_n(t); shape (n_omega,) + t-shape."""
        h_a, h_v, _, _ = self._bath_parts(t)
        t = np.asarray(t, dtype=float)
        w = self.omega_grid
        phase = np.exp(-1j * np.multiply.outer(w, t))
        m = self.drive_density.reshape((-1,) + (1,) * t.ndim)
        vt = self.velocity_density.reshape((-1,) + (1,) * t.ndim)
        return -h_a * m + h_v * vt + m * phase

    def bath_velocity_coefficient(self, t) -> np.ndarray:
        """Time derivative of u(omega, t)."""
        t = np.asarray(t, dtype=float)
        a, Om, w2 = self.envelope_rate, self.omega_damped, self.omega_n**2
        env = np.exp(-a * t)
        c, s = np.cos(Om * t), np.sin(Om * t)
        hdot_a = -(w2 / Om) * env * s
        hdot_v = env * (c - (a / Om) * s)
        w = self.omega_grid
        phase = np.exp(-1j * np.multiply.outer(w, t))
        m = self.drive_density.reshape((-1,) + (1,) * t.ndim)
        vt = self.velocity_density.reshape((-1,) + (1,) * t.ndim)
        return -hdot_a * m + hdot_v * vt + (-1j * w.reshape(m.shape[:1] + (1,) * t.ndim)) * m * phase

    def momentum_bath_coefficient(self, t) -> np.ndarray:
        """w(omega, t), the b(omega) density of B_n(t)."""
        _, _, big_ha, big_hv = self._bath_parts(t)
        t = np.asarray(t, dtype=float)
        w = self.omega_grid
        wt = np.multiply.outer(w, t)
        wcol = w.reshape((-1,) + (1,) * t.ndim)
        drive_int = (1.0 - np.exp(-1j * wt)) / (1j * wcol)
        m = self.drive_density.reshape(wcol.shape)
        vt = self.velocity_density.reshape(wcol.shape)
        lw2 = self.mass_density * self.omega_n**2
        return -lw2 * (-big_ha * m + big_hv * vt + m * drive_int)

    def momentum_ladder_coefficient(self, t) -> np.ndarray:
        """d_a at arbitrary times (a-coefficient of B_n(t))."""
        _, _, big_ha, big_hv = self._bath_parts(t)
        lw2 = self.mass_density * self.omega_n**2
        return self.b0_a - lw2 * (big_ha * self.alpha_a + big_hv * self.alphadot_a)

    def ladder_coefficient(self, t) -> np.ndarray:
        h_a, h_v, _, _ = self._bath_parts(t)
        return h_a * self.alpha_a + h_v * self.alphadot_a

    @cached_property
    def u(self) -> np.ndarray:
        """Bath density of A_n over (omega_grid x t_grid)."""
        return self.bath_coefficient(self.t_grid)

    @property
    def v(self) -> np.ndarray:
        return np.conj(self.u)

    @cached_property
    def u_dot(self) -> np.ndarray:
        return self.bath_velocity_coefficient(self.t_grid)

    def drive_variance(self) -> float:
        """Vacuum variance of the stationary drive, int dw |m(w)|^2."""
        return float(np.trapezoid(np.abs(self.drive_density) ** 2, self.omega_grid))


def _densities(params: StringParams, spec: CouplingSpec, omega_n: float,
               omega_grid: np.ndarray):
    lam = params.mass_density
    weight = dynamical_weight(spec, omega_grid)
    g = np.sqrt(weight)
    denom = omega_n**2 - omega_grid**2 - 1j * (params.damping / lam) * omega_grid
    # denom only vanishes at the undamped resonance, where g must vanish
    # too (validated by the callers); keep the division well defined
    safe = np.where(denom == 0, 1.0, denom)
    m = np.where(g > 0, 1j * omega_grid * g / (lam * safe), 0.0)
    vtilde = -g / lam + 1j * omega_grid * m
    return g, m, vtilde


def mode_solution(
    params: StringParams,
    spec: CouplingSpec,
    n: int,
    t_grid: np.ndarray,
    omega_grid: np.ndarray,
) -> CoefficientSolution:
    """Full coefficient representation of A_n(t), B_n(t) and the velocity.

    The drive density has a Lorentzian resonance of width beta/lambda at
    omega_n; the frequency grid must resolve it (GridTooCoarse otherwise)
    and should span (0, cutoff].  A zero-damping parameter set is only
    consistent with a coupling of zero weight, in which case the free
    oscillation is returned.
    """
    omega_n, a, Om = _check_underdamped(params, n)
    t = np.asarray(t_grid, dtype=float)
    w = np.asarray(omega_grid, dtype=float)
    if t.ndim != 1 or t.size < 2 or t[0] < 0 or np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be increasing and start at t >= 0")
    if w.ndim != 1 or w.size < 2 or w[0] <= 0 or np.any(np.diff(w) <= 0):
        raise ValueError("omega_grid must be positive and increasing")

    lam, L = params.mass_density, params.length
    g = np.sqrt(dynamical_weight(spec, w))

    if params.damping == 0.0:
        if np.any(g > 0):
            raise ValueError(
                "zero damping with a non-zero coupling weight has no "
                "stationary driven solution; use a matched ohmic spec"
            )
    else:
        cut = spec.effective_cutoff
        if cut is not None and w[-1] < cut * (1.0 - 1e-9) and np.any(g > 0):
            raise ValueError("omega_grid must span (0, cutoff]")
        width = params.damping / lam
        near = (w > omega_n - 2 * width) & (w < omega_n + 2 * width)
        if np.any(g > 0):
            if near.sum() < 2 or np.max(np.diff(w[near])) > width / 2.0:
                raise GridTooCoarse(
                    f"max grid spacing near omega_{n} exceeds the "
                    f"resonance width beta/(2 lambda) = {width / 2.0:.4g}"
                )

    _, m, vtilde = _densities(params, spec, omega_n, w)

    env = np.exp(-a * t)
    c, s = np.cos(Om * t), np.sin(Om * t)
    h_a = env * (c + (a / Om) * s)
    h_v = env * s / Om
    hdot_a = -(omega_n**2 / Om) * env * s
    hdot_v = env * (c - (a / Om) * s)
    int_h_v = (1.0 - h_a) / omega_n**2
    int_h_a = h_v + 2.0 * a * int_h_v

    alpha_a = 1.0 / math.sqrt(L * lam * omega_n)
    alphadot_a = -1j * math.sqrt(omega_n / (lam * L))
    b0_a = -1j * math.sqrt(lam * omega_n / L)

    return CoefficientSolution(
        mode=n,
        omega_n=omega_n,
        omega_damped=Om,
        envelope_rate=a,
        length=L,
        mass_density=lam,
        t_grid=t,
        omega_grid=w,
        alpha_a=alpha_a,
        alphadot_a=alphadot_a,
        b0_a=b0_a,
        h_a=h_a,
        h_v=h_v,
        hdot_a=hdot_a,
        hdot_v=hdot_v,
        int_h_a=int_h_a,
        int_h_v=int_h_v,
        drive_density=m,
        velocity_density=vtilde,
    )


@dataclass(frozen=True, eq=False)
class BathModeSolution:
    """Long-time stable representation of one bath operator b(omega_k, t).

        b(omega_k, t) = self_phase(t) b(omega_k, 0)
                        + c_a(t) a + c_adag(t) a^dag
                        + int dw' [eta(w', t) b(w', 0) + theta(w', t) b^dag(w', 0)]

    ``denominator`` is the resonant factor omega_n^2 - omega_k^2
    - i beta omega_k / lambda; eta and theta carry the sinc-shaped
    memory of the drive at difference and sum frequencies.
    """

    mode: int
    omega_k: float
    denominator: complex
    t_grid: np.ndarray
    omega_grid: np.ndarray
    self_phase: np.ndarray
    c_a: np.ndarray
    c_adag: np.ndarray
    eta: np.ndarray
    theta: np.ndarray

    def __post_init__(self) -> None:
        for name in ("t_grid", "omega_grid", "self_phase", "c_a", "c_adag",
                     "eta", "theta"):
            getattr(self, name).setflags(write=False)


def _phased_sinc(delta: np.ndarray, t: np.ndarray) -> np.ndarray:
    """int_0^t exp(i delta s) ds = exp(i delta t / 2) sin(delta t/2)/(delta/2)."""
    dt = np.multiply.outer(delta, t)
    half = 0.5 * dt
    core = np.where(np.abs(half) < 1e-8, 1.0 - half * half / 6.0, np.sin(half) / np.where(half == 0, 1.0, half))
    return np.exp(1j * half) * core * t


def bath_mode_solution(
    params: StringParams,
    spec: CouplingSpec,
    n: int,
    omega_k: float,
    t_grid: np.ndarray,
    omega_grid: np.ndarray | None = None,
) -> BathModeSolution:
    """Stable (post-transient) solution for the bath operator at omega_k.

    Valid once the string's homogeneous ring-down has been absorbed: the
    scattering coefficients carry the pure phase exp(-i omega_k t) with
    converged amplitudes, while the drive-memory terms keep their finite
    time sinc shape.
    """
    omega_n, a, Om = _check_underdamped(params, n)
    if omega_k <= 0:
        raise ValueError("omega_k must be positive")
    t = np.asarray(t_grid, dtype=float)
    lam, L = params.mass_density, params.length
    if omega_grid is None:
        cut = spec.effective_cutoff or 4.0 * omega_n
        omega_grid = resonance_grid(params, n, cut) if params.damping > 0 else np.linspace(
            omega_n / 64, cut, 257)
    w = np.asarray(omega_grid, dtype=float)

    gk = float(np.sqrt(dynamical_weight(spec, omega_k)))
    Dk = complex(omega_n**2 - omega_k**2 - 1j * (params.damping / lam) * omega_k)
    g, m, vtilde = _densities(params, spec, omega_n, w)

    phase = np.exp(-1j * omega_k * t)
    q = gk * L / 2.0

    alpha_a = 1.0 / math.sqrt(L * lam * omega_n)
    alphadot_a = -1j * math.sqrt(omega_n / (lam * L))

    c_a = -1j * q * phase * (omega_n**2 * alpha_a + 1j * omega_k * alphadot_a) / Dk
    c_adag = -1j * q * phase * (omega_n**2 * alpha_a - 1j * omega_k * alphadot_a) / Dk

    mcol = m[:, None]
    vcol = vtilde[:, None]
    sinc_minus = _phased_sinc(omega_k - w, t)
    sinc_plus = _phased_sinc(omega_k + w, t)
    eta = 1j * q * phase * (
        (omega_n**2 * mcol - 1j * omega_k * vcol) / Dk
        - 1j * w[:, None] * mcol * sinc_minus
    )
    theta = 1j * q * phase * (
        (omega_n**2 * np.conj(mcol) - 1j * omega_k * np.conj(vcol)) / Dk
        + 1j * w[:, None] * np.conj(mcol) * sinc_plus
    )

    return BathModeSolution(
        mode=n,
        omega_k=omega_k,
        denominator=Dk,
        t_grid=t,
        omega_grid=w,
        self_phase=phase,
        c_a=c_a,
        c_adag=c_adag,
        eta=eta,
        theta=theta,
    )


def ccr_defect(sol: CoefficientSolution, t: float) -> float:
    """|[A_n(t), B_n(t)] - 2i/L| from the coefficient representation.

    The commutator is a c-number: the ladder pair contributes
    2i Im(c_a conj(d_a)) and the bath pairs an omega integral of
    2i Im(u conj(w)), evaluated by trapezoid on the stored grid.  Exact
    dynamics preserves 2i/L; the residual measures grid and cutoff error.
    """
    if t < 0 or t > sol.t_grid[-1]:
        raise ValueError("t outside the solution's time range")
    c_a = complex(sol.ladder_coefficient(t))
    d_a = complex(sol.momentum_ladder_coefficient(t))
    u_t = sol.bath_coefficient(t)
    w_t = sol.momentum_bath_coefficient(t)
    bath = np.trapezoid(2.0 * np.imag(u_t * np.conj(w_t)), sol.omega_grid)
    value = 2.0 * (c_a * np.conj(d_a)).imag + bath
    return abs(value - 2.0 / sol.length)
