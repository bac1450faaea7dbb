"""Normal-ordered energy expectation values of the string and reservoir.

Normal ordering is applied at the level of contraction rules: vacuum
contractions <a a^dag> and <b b^dag> are dropped, so for a product state
(string phonons) x (bath vacuum) only the string-ladder coefficients of
a solution enter the string energy,

    <:H_s:>(t) = sum_modes 2 r [ (L lam w^2 / 4) |c_a|^2 + (L/(4 lam)) |d_a|^2 ].

The asymptotic closed forms reproduce the model's stated limits.  Note
the bookkeeping they imply is loose: the reservoir asymptote is w/2 per
phonon while the phonon carried energy w, and the string asymptote
beta^2/(8 lam^2 w) is one quarter of the late-time limit of the exact
contraction series (whose residual momentum coefficient is
-beta/sqrt(L lam w)).  Both closed forms are reported as stated, side by
side with the series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .dynamics import CoefficientSolution
from .errors import QuadratureDivergence
from .model import ReservoirSpec, StringFockState, StringParams
from .quadrature import integrate_tangent

__all__ = [
    "EnergyReport",
    "string_energy_asymptotic",
    "reservoir_energy_asymptotic",
    "string_energy_timeseries",
    "lorentzian_moment_integrals",
]


@dataclass(frozen=True, eq=False)
class EnergyReport:
    t_grid: np.ndarray
    string_energy: np.ndarray
    asymptote_string: float
    asymptote_reservoir: float
    method: str

    def __post_init__(self) -> None:
        self.t_grid.setflags(write=False)
        self.string_energy.setflags(write=False)


def _occupied_frequencies(params: StringParams, state: StringFockState):
    for m, r in state.occupation:
        w = params.mode_frequency(m)
        if w <= params.envelope_rate:
            # surfaces OverdampedMode with the right message
            params.shifted_frequency(m)
        yield m, r, w


def string_energy_asymptotic(params: StringParams, state: StringFockState) -> float:
    """Late-time normal-ordered string energy, (beta^2 / 8 lam^2) sum r/w."""
    lam = params.mass_density
    pref = params.damping**2 / (8.0 * lam * lam)
    return pref * sum(r / w for _, r, w in _occupied_frequencies(params, state))


def lorentzian_moment_integrals(
    params: StringParams, omega: float, method: str = "closed_form",
    rel_tol: float = 1e-10,
) -> tuple[float, float]:
    """The two reservoir moment integrals

        I1 = int_0^inf dx / ((w^2 - x^2)^2 + beta^2 x^2 / lam^2),
        I2 = int_0^inf x^2 dx / (same),

    equal to pi lam / (2 beta w^2) and pi lam / (2 beta).  Both converge
    without a cutoff (x^-4 and x^-2 tails).  The quadrature branch uses
    a tangent substitution with a panel edge pinned at the resonance.
    """
    beta, lam = params.damping, params.mass_density
    if beta <= 0:
        raise ValueError("the moment integrals need damping > 0")
    if method == "closed_form":
        return (math.pi * lam / (2.0 * beta * omega**2),
                math.pi * lam / (2.0 * beta))
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")

    gam2 = (beta / lam) ** 2

    def base(x):
        return 1.0 / ((omega**2 - x * x) ** 2 + gam2 * x * x)

    try:
        i1 = integrate_tangent(base, 0.0, rel_tol=rel_tol, scale=omega,
                               breakpoints=[omega])
        i2 = integrate_tangent(lambda x: x * x * base(x), 0.0, rel_tol=rel_tol,
                               scale=omega, breakpoints=[omega])
    except QuadratureDivergence:
        raise
    return float(i1), float(i2)


def reservoir_energy_asymptotic(
    params: StringParams,
    state: StringFockState,
    method: str = "closed_form",
) -> float:
    """Late-time normal-ordered reservoir energy,

        (beta / 2 pi lam) sum_phonons [ w^3 I1(w) + w I2(w) ],

    which collapses to w/2 per phonon with the closed-form integrals.
    Additive over phonons.
    """
    beta, lam = params.damping, params.mass_density
    if not state.occupation:
        return 0.0
    if beta == 0:
        return 0.0
    pref = beta / (2.0 * math.pi * lam)
    total = 0.0
    for _, r, w in _occupied_frequencies(params, state):
        i1, i2 = lorentzian_moment_integrals(params, w, method=method)
        total += r * pref * (w**3 * i1 + w * i2)
    return total


def string_energy_timeseries(
    solutions: Mapping[int, CoefficientSolution],
    state: StringFockState,
    reservoir: ReservoirSpec | None = None,
) -> EnergyReport:
    """Normal-ordered string energy from coefficient contraction.

    Needs one solution per occupied mode, all on the same time grid, and
    a vacuum reservoir (the only contraction rule the energy series
    implements).  At t = 0 this is sum r w; it decays at beta/lambda
    toward the stated asymptote (see the module note on its
    normalization).
    """
    if reservoir is not None and reservoir.kind != "vacuum":
        raise ValueError("the energy series is defined for a vacuum reservoir")
    if not state.occupation:
        raise ValueError("state has no phonons; the series is identically zero")
    t_grid = None
    energy = None
    params_like = None
    for m, r in state.occupation:
        if m not in solutions:
            raise ValueError(f"no coefficient solution supplied for mode {m}")
        sol = solutions[m]
        if t_grid is None:
            t_grid = sol.t_grid
            energy = np.zeros_like(t_grid)
            params_like = sol
        elif sol.t_grid.shape != t_grid.shape or not np.allclose(sol.t_grid, t_grid):
            raise ValueError("all solutions must share one time grid")
        lam, L, w = sol.mass_density, sol.length, sol.omega_n
        energy = energy + 2.0 * r * (
            (L * lam * w * w / 4.0) * np.abs(sol.c_a) ** 2
            + (L / (4.0 * lam)) * np.abs(sol.d_a) ** 2
        )

    params = StringParams(
        mass_density=params_like.mass_density,
        tension=params_like.mass_density * (params_like.omega_n * params_like.length
                                            / (params_like.mode * math.pi)) ** 2,
        length=params_like.length,
        damping=2.0 * params_like.mass_density * params_like.envelope_rate,
    )
    return EnergyReport(
        t_grid=t_grid,
        string_energy=energy,
        asymptote_string=string_energy_asymptotic(params, state),
        asymptote_reservoir=reservoir_energy_asymptotic(params, state),
        method="contraction",
    )
