"""Reservoir-field representation: radial source shapes and the bath
Hamiltonian identity.

The reservoir is a collection of sourced massless scalar fields; the
string drives each one through two radial shape functions,

    P(r) = Re int_0^Lam dw 4 pi w^2 sqrt(w / (2 (2 pi)^3)) f(w) sinc(w r),
    Q(r) = Im int_0^Lam dw 4 pi w^2 f(w) / sqrt(2 (2 pi)^3 w) sinc(w r),

with the angular integration already done (exp(-i k.x) -> 4 pi sinc(w r)
under the radial measure).  Q vanishes identically for real coupling
amplitudes.

The quadratic identity H_B = Pi^2/2 + |grad Y|^2/2 = sum_k w_k (mode
occupancy) is checked on band-limited lattice field samples via unitary
FFT mode maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CutoffRequired
from .model import CouplingSpec, coupling_power
from .quadrature import integrate_adaptive

__all__ = [
    "SourceShapes",
    "source_shapes",
    "Lattice",
    "FieldSample",
    "plane_wave_sample",
    "random_band_limited_sample",
    "bath_hamiltonian_identity",
]


def sinc_stable(x: np.ndarray) -> np.ndarray:
    """sin(x)/x with a series branch below |x| < 1e-4 against cancellation."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    safe = np.where(small, 1.0, x)
    out = np.sin(safe) / safe
    x2 = x * x
    return np.where(small, 1.0 - x2 / 6.0 + x2 * x2 / 120.0, out)


@dataclass(frozen=True, eq=False)
class SourceShapes:
    r_grid: np.ndarray
    p: np.ndarray
    q: np.ndarray

    def __post_init__(self) -> None:
        for name in ("r_grid", "p", "q"):
            getattr(self, name).setflags(write=False)


def source_shapes(spec: CouplingSpec, r_grid: np.ndarray, rel_tol: float = 1e-10) -> SourceShapes:
    """Radial source shapes P and Q on r_grid."""
    r = np.asarray(r_grid, dtype=float)
    if np.any(r < 0):
        raise ValueError("radial distances must be non-negative")
    if spec.kind == "zero":
        return SourceShapes(r_grid=r, p=np.zeros_like(r), q=np.zeros_like(r))
    cut = spec.effective_cutoff
    if cut is None:
        raise CutoffRequired("source shapes need a finite cutoff")

    norm = 1.0 / math.sqrt(2.0 * (2.0 * math.pi) ** 3)
    p = np.empty_like(r)
    q = np.empty_like(r)
    for i, ri in enumerate(r):
        width = cut / 8.0 if ri == 0.0 else min(cut / 8.0, math.pi / (4.0 * ri))

        def amp(w):
            return np.sqrt(coupling_power(spec, w))

        def integrand_p(w):
            return 4.0 * math.pi * w**2 * np.sqrt(w) * norm * amp(w) * sinc_stable(w * ri)

        def integrand_q(w):
            return 4.0 * math.pi * w**2 * norm / np.sqrt(w) * amp(w) * sinc_stable(w * ri)

        vp = integrate_adaptive(integrand_p, 0.0, cut, rel_tol=rel_tol, max_width=width)
        vq = integrate_adaptive(integrand_q, 0.0, cut, rel_tol=rel_tol, max_width=width)
        p[i] = np.real(vp)
        q[i] = np.imag(vq)  # identically zero for the real amplitudes used here
    return SourceShapes(r_grid=r, p=p, q=q)


class Lattice:
    """Cubic periodic lattice with unitary FFT mode maps.

    Wavenumbers are 2 pi fftfreq(n, d) per axis; the zero mode carries
    no oscillator and must stay empty.
    """

    def __init__(self, n_side: int, box: float):
        if n_side < 2 or box <= 0:
            raise ValueError("need n_side >= 2 and box > 0")
        self.n_side = n_side
        self.box = box
        self.spacing = box / n_side
        k1 = 2.0 * math.pi * np.fft.fftfreq(n_side, d=self.spacing)
        kx, ky, kz = np.meshgrid(k1, k1, k1, indexing="ij")
        self.k = (kx, ky, kz)
        self.omega = np.sqrt(kx**2 + ky**2 + kz**2)
        self.omega_max = float(self.omega.max())

    def fields_from_modes(self, c: np.ndarray):
        """Mode amplitudes -> real fields (Y, Pi) on the lattice.

        Y_hat(k) = (c_k + conj(c_{-k})) / sqrt(2 w_k),
        Pi_hat(k) = -i sqrt(w_k / 2) (c_k - conj(c_{-k})).
        """
        if np.abs(c.reshape(-1)[0]) != 0.0:
            raise ValueError("the zero mode must be empty")
        c_rev = self._reverse(c)
        w = self.omega
        safe = np.where(w == 0.0, 1.0, w)
        y_hat = (c + np.conj(c_rev)) / np.sqrt(2.0 * safe)
        y_hat = np.where(w == 0.0, 0.0, y_hat)
        pi_hat = -1j * np.sqrt(safe / 2.0) * (c - np.conj(c_rev))
        pi_hat = np.where(w == 0.0, 0.0, pi_hat)
        y = np.fft.ifftn(y_hat, norm="ortho")
        pi = np.fft.ifftn(pi_hat, norm="ortho")
        return y.real, pi.real

    def modes_from_fields(self, y: np.ndarray, pi: np.ndarray) -> np.ndarray:
        """Inverse mode map: c_k = (sqrt(w/2) Y_hat + i Pi_hat / sqrt(2w))."""
        y_hat = np.fft.fftn(y, norm="ortho")
        pi_hat = np.fft.fftn(pi, norm="ortho")
        w = self.omega
        safe = np.where(w == 0.0, 1.0, w)
        c = np.sqrt(safe / 2.0) * y_hat + 1j * pi_hat / np.sqrt(2.0 * safe)
        return np.where(w == 0.0, 0.0, c)

    def gradient_squared(self, y: np.ndarray) -> np.ndarray:
        y_hat = np.fft.fftn(y, norm="ortho")
        total = np.zeros_like(y)
        for k_axis in self.k:
            g = np.fft.ifftn(1j * k_axis * y_hat, norm="ortho")
            total = total + g.real**2
        return total

    def _reverse(self, arr: np.ndarray) -> np.ndarray:
        # map k -> -k on the fft grid
        out = arr[::-1, ::-1, ::-1]
        return np.roll(out, 1, axis=(0, 1, 2))

    def orthonormality_defect(self, rng=None) -> float:
        """Round-trip error of the transform pair on a random field."""
        rng = np.random.default_rng(0) if rng is None else rng
        f = rng.standard_normal((self.n_side,) * 3)
        back = np.fft.ifftn(np.fft.fftn(f, norm="ortho"), norm="ortho")
        return float(np.max(np.abs(back - f)))


@dataclass(frozen=True, eq=False)
class FieldSample:
    lattice: Lattice
    amplitudes: np.ndarray  # complex c_k on the fft grid, zero mode empty


def plane_wave_sample(lattice: Lattice, k_index: tuple[int, int, int], amplitude: complex) -> FieldSample:
    c = np.zeros((lattice.n_side,) * 3, dtype=complex)
    if k_index == (0, 0, 0):
        raise ValueError("the zero mode carries no oscillator")
    c[k_index] = amplitude
    return FieldSample(lattice=lattice, amplitudes=c)


def random_band_limited_sample(lattice: Lattice, omega_max: float, rng) -> FieldSample:
    c = rng.standard_normal((lattice.n_side,) * 3) + 1j * rng.standard_normal(
        (lattice.n_side,) * 3
    )
    c[lattice.omega > omega_max] = 0.0
    c[0, 0, 0] = 0.0
    return FieldSample(lattice=lattice, amplitudes=c)


def bath_hamiltonian_identity(
    spec: CouplingSpec,
    omega_grid: np.ndarray,
    test_field_samples,
) -> float:
    """Maximum relative defect of H_B = Pi^2/2 + |grad Y|^2/2 against the
    mode-occupancy sum, over the supplied band-limited samples.

    Samples must be band-limited below the coupling cutoff (that is the
    regime in which the mode maps represent reservoir states the string
    can talk to).
    """
    cut = spec.effective_cutoff
    band = float(np.asarray(omega_grid, dtype=float).max())
    worst = 0.0
    for sample in test_field_samples:
        lat = sample.lattice
        c = sample.amplitudes
        active = lat.omega[np.abs(c) > 0]
        if active.size and cut is not None and active.max() > cut:
            raise ValueError("sample is not band-limited below the cutoff")
        if active.size and active.max() > band + 1e-12:
            raise ValueError("sample exceeds the declared frequency band")
        lhs = float(np.sum(lat.omega * np.abs(c) ** 2))
        y, pi = lat.fields_from_modes(c)
        rhs = float(np.sum(0.5 * pi**2 + 0.5 * lat.gradient_squared(y)))
        scale = max(abs(lhs), abs(rhs))
        defect = 0.0 if scale == 0.0 else abs(lhs - rhs) / scale
        worst = max(worst, defect)
    return worst
