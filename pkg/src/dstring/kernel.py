"""Memory kernel and vacuum noise correlator of the coupling.

The velocity convolution kernel is

    gamma(t) = 4 pi L int_0^Lam dw |f(w)|^2 w^3 cos(w t),

with L the mode normalization length carried by the coupling spec.  For
the ohmic coupling and finite cutoff this is (beta/pi) sin(Lam t)/t, a
nascent delta function: its one-sided time integral converges to beta/2
(the delta sits at the endpoint of the convolution range), while the
equation of motion uses the full weight beta.  See
model.FULL_FRICTION_FACTOR for where the dynamics accounts for the
difference; everything in this module reports the literal integrals.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import CutoffRequired
from .model import CouplingSpec, coupling_power
from .quadrature import integrate_adaptive

__all__ = ["KernelSample", "gamma_kernel", "gamma_integral", "noise_correlator"]


@dataclass(frozen=True, eq=False)
class KernelSample:
    """gamma(t) sampled on a uniform grid, with the cutoff that produced it."""

    t_grid: np.ndarray
    gamma: np.ndarray
    cutoff_used: float

    def __post_init__(self) -> None:
        self.t_grid.setflags(write=False)
        self.gamma.setflags(write=False)


def _require_cutoff(spec: CouplingSpec, what: str) -> float:
    cut = spec.effective_cutoff
    if cut is None:
        if spec.kernel_integrand_decays():
            # integrable tail; a generous finite bound is accurate enough
            return 1e6
        raise CutoffRequired(f"{what} diverges without an ultraviolet cutoff")
    return cut


def _kernel_length(spec: CouplingSpec) -> float:
    # the 4 pi L prefactor uses the mode normalization length; couplings
    # that do not carry one default to unit length
    return spec.length if spec.length is not None else 1.0


def _gamma_at(spec: CouplingSpec, cut: float, pref: float, t: float, rel_tol: float) -> float:
    width = cut / 8.0 if t == 0.0 else min(cut / 8.0, math.pi / (4.0 * t))

    def integrand(w):
        return coupling_power(spec, w) * w**3 * np.cos(w * t)

    val = integrate_adaptive(integrand, 0.0, cut, rel_tol=rel_tol, max_width=width)
    return pref * val


def gamma_kernel(
    spec: CouplingSpec,
    t_grid: np.ndarray,
    rel_tol: float = 1e-10,
    workers: int = 1,
) -> KernelSample:
    """Evaluate gamma on a uniform time grid by adaptive panel quadrature.

    Panels are capped at pi/(4 t) so no panel spans more than an eighth
    of a cosine period; grid points are independent and may be computed
    on ``workers`` threads.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise ValueError("t_grid must be a 1-d grid with at least two points")
    dt = np.diff(t)
    if np.any(dt <= 0) or not np.allclose(dt, dt[0], rtol=1e-9, atol=0.0):
        raise ValueError("t_grid must be uniform and increasing")
    if t[0] < 0:
        raise ValueError("t_grid must start at t >= 0")

    if spec.kind == "zero":
        cut = spec.effective_cutoff or 1.0
        return KernelSample(t_grid=t, gamma=np.zeros_like(t), cutoff_used=cut)

    cut = _require_cutoff(spec, "the memory kernel")
    pref = 4.0 * math.pi * _kernel_length(spec)

    def batch(idx):
        return [(i, _gamma_at(spec, cut, pref, float(t[i]), rel_tol)) for i in idx]

    gamma = np.empty_like(t)
    if workers > 1:
        chunks = np.array_split(np.arange(t.size), workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(batch, chunks):
                for i, v in part:
                    gamma[i] = v
    else:
        for i, v in batch(np.arange(t.size)):
            gamma[i] = v
    return KernelSample(t_grid=t, gamma=gamma, cutoff_used=cut)


def gamma_integral(sample: KernelSample, T: float) -> float:
    """Trapezoid integral of the sampled kernel from 0 to T.

    For the ohmic coupling this converges to beta/2 as Lam*T grows (the
    half-weight endpoint convention; the dynamics uses the full beta).
    """
    t = sample.t_grid
    if T < t[0] or T > t[-1]:
        raise ValueError(f"T = {T} outside the sampled range [{t[0]}, {t[-1]}]")
    idx = int(np.searchsorted(t, T, side="right")) - 1
    val = float(np.trapezoid(sample.gamma[: idx + 1], t[: idx + 1]))
    if idx + 1 < t.size and T > t[idx]:
        # partial trapezoid to exactly T
        frac = (T - t[idx]) / (t[idx + 1] - t[idx])
        g_T = sample.gamma[idx] + frac * (sample.gamma[idx + 1] - sample.gamma[idx])
        val += 0.5 * (sample.gamma[idx] + g_T) * (T - t[idx])
    return val


def noise_correlator(spec: CouplingSpec, tau: float, rel_tol: float = 1e-10) -> complex:
    """Per-mode vacuum two-time correlator of the noise operator,

        C(tau) = 4 pi int_0^Lam dw w^4 |f(w)|^2 exp(-i w tau),

    with tau = t - t'.  Hermitian: C(-tau) = conj(C(tau)).  Requires a
    finite cutoff; the integrand grows like w for the ohmic coupling.
    """
    cut = spec.effective_cutoff
    if spec.kind == "zero":
        return 0.0 + 0.0j
    if cut is None:
        raise CutoffRequired("the noise correlator needs a finite cutoff")
    at = abs(tau)
    width = cut / 8.0 if at == 0.0 else min(cut / 8.0, math.pi / (4.0 * at))

    def integrand(w):
        return coupling_power(spec, w) * w**4 * np.exp(-1j * w * tau)

    val = integrate_adaptive(integrand, 0.0, cut, rel_tol=rel_tol, max_width=width)
    return 4.0 * math.pi * complex(val)
