"""Physical parameters, mode spectra, coupling functions and state descriptors.

Units: hbar = c = 1 throughout, so bath frequencies equal wavenumbers
(omega_k = |k|) and all energies are frequencies.

The string has mass density ``mass_density``, tension ``tension`` and
length ``length``; its transverse displacement is expanded over the
fixed-end modes sin(n pi x / L) with frequencies

    omega_n = sqrt(tension / mass_density) * n * pi / length.

Damping enters through a frequency-dependent coupling amplitude f(omega)
to an isotropic continuum of scalar-field modes, one independent field
per string mode.  |f|^2 plays the role of a spectral density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NonIntegrableCoupling, OverdampedMode

__all__ = [
    "StringParams",
    "ModeSpectrum",
    "CouplingSpec",
    "ReservoirSpec",
    "StringFockState",
    "build_spectrum",
    "eval_coupling",
    "coupling_power",
    "spectral_weight",
    "dynamical_weight",
    "FULL_FRICTION_FACTOR",
]

# The radial measure of the isotropic bath contributes the one-sided
# memory kernel whose time integral is half the friction coefficient
# (the delta function sits at the endpoint of the convolution range).
# The model's equation of motion is stated with the *full* friction
# coefficient beta multiplying the velocity, so the spectral weight
# entering the dynamics must carry twice the radial measure.  Every
# dynamical quantity (mode solutions, discretized-bath evolution) uses
# this factor; the kernel module reports the bare radial measure.
FULL_FRICTION_FACTOR = 2.0


@dataclass(frozen=True)
class StringParams:
    """Physical constants of the string and its damping.

    mass_density > 0, tension > 0, length > 0, damping >= 0.
    ``damping`` is the friction coefficient beta of the velocity term
    in the equation of motion, units mass / (length * time).
    """

    mass_density: float
    tension: float
    length: float
    damping: float = 0.0

    def __post_init__(self) -> None:
        if self.mass_density <= 0:
            raise ValueError("mass_density must be positive")
        if self.tension <= 0:
            raise ValueError("tension must be positive")
        if self.length <= 0:
            raise ValueError("length must be positive")
        if self.damping < 0:
            raise ValueError("damping must be non-negative")

    @property
    def wave_speed(self) -> float:
        return math.sqrt(self.tension / self.mass_density)

    def mode_frequency(self, n: int) -> float:
        """Undamped frequency omega_n of mode n >= 1."""
        if n < 1:
            raise ValueError("mode index must be >= 1")
        return self.wave_speed * n * math.pi / self.length

    @property
    def envelope_rate(self) -> float:
        """Amplitude decay rate beta / (2 lambda) of every mode."""
        return self.damping / (2.0 * self.mass_density)

    def shifted_frequency(self, n: int) -> float:
        """Damped frequency Omega_n = sqrt(omega_n^2 - beta^2/(4 lambda^2)).

        Raises OverdampedMode when the argument of the root is not positive.
        """
        w = self.mode_frequency(n)
        a = self.envelope_rate
        if w <= a:
            raise OverdampedMode(
                f"mode {n}: omega_n = {w:.6g} <= beta/(2 lambda) = {a:.6g}"
            )
        return math.sqrt(w * w - a * a)


@dataclass(frozen=True, eq=False)
class ModeSpectrum:
    """Retained mode frequencies of one string.

    ``omega[i]`` is omega_{i+1}; ``omega_shifted[i]`` the damped
    frequency Omega_{i+1}.  Both arrays are immutable views.
    """

    n_max: int
    omega: np.ndarray
    omega_shifted: np.ndarray

    def __post_init__(self) -> None:
        for arr in (self.omega, self.omega_shifted):
            arr.setflags(write=False)

    def frequency(self, n: int) -> float:
        return float(self.omega[n - 1])

    def shifted(self, n: int) -> float:
        return float(self.omega_shifted[n - 1])


def build_spectrum(params: StringParams, n_max: int) -> ModeSpectrum:
    """Mode frequencies omega_n and Omega_n for n = 1..n_max.

    Every retained mode must be underdamped (omega_n > beta/(2 lambda)).
    Since omega_n grows with n, only the fundamental can violate this;
    it is still checked for all retained modes.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    n = np.arange(1, n_max + 1)
    omega = params.wave_speed * n * math.pi / params.length
    a = params.envelope_rate
    if omega[0] <= a:
        raise OverdampedMode(
            f"mode 1: omega_1 = {omega[0]:.6g} <= beta/(2 lambda) = {a:.6g}"
        )
    omega_shifted = np.sqrt(omega * omega - a * a)
    return ModeSpectrum(n_max=n_max, omega=omega, omega_shifted=omega_shifted)


@dataclass(frozen=True, eq=False)
class CouplingSpec:
    """Coupling amplitude f(omega) with an ultraviolet cutoff policy.

    Three kinds are supported:

    ``ohmic``      |f|^2 = damping / (4 pi^2 length omega^3), the choice
                   that makes the memory kernel a delta function and the
                   friction force frequency independent.
    ``power_law``  |f|^2 = prefactor * omega**exponent.
    ``tabulated``  |f|^2 linearly interpolated from (omega, power) samples,
                   zero outside the sampled range.

    ``cutoff`` is the UV frequency beyond which f is treated as zero.
    It may be None (no cutoff); operations whose integrals then diverge
    raise CutoffRequired.
    """

    kind: str
    cutoff: float | None = None
    damping: float | None = None
    length: float | None = None
    prefactor: float | None = None
    exponent: float | None = None
    omega_samples: np.ndarray | None = None
    power_samples: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("ohmic", "power_law", "tabulated", "zero"):
            raise ValueError(f"unknown coupling kind {self.kind!r}")
        if self.cutoff is not None and self.cutoff <= 0:
            raise ValueError("cutoff must be positive when given")
        if self.kind == "ohmic":
            if self.damping is None or self.length is None:
                raise ValueError("ohmic coupling needs damping and length")
            if self.damping < 0 or self.length <= 0:
                raise ValueError("ohmic coupling needs damping >= 0, length > 0")
        if self.kind == "power_law":
            if self.prefactor is None or self.exponent is None:
                raise ValueError("power_law coupling needs prefactor and exponent")
            if self.prefactor < 0:
                raise ValueError("power_law prefactor must be >= 0")
        if self.kind == "tabulated":
            if self.omega_samples is None or self.power_samples is None:
                raise ValueError("tabulated coupling needs omega and power samples")
            w = np.asarray(self.omega_samples, dtype=float)
            if w.ndim != 1 or w.size < 2 or np.any(np.diff(w) <= 0) or w[0] <= 0:
                raise ValueError("tabulated omega samples must be positive increasing")
            object.__setattr__(self, "omega_samples", w)
            p = np.asarray(self.power_samples, dtype=float)
            if p.shape != w.shape:
                raise ValueError("power samples must match omega samples")
            object.__setattr__(self, "power_samples", p)
            w.setflags(write=False)
            p.setflags(write=False)

    @classmethod
    def ohmic(cls, damping: float, length: float, cutoff: float | None = None) -> "CouplingSpec":
        return cls(kind="ohmic", damping=damping, length=length, cutoff=cutoff)

    @classmethod
    def power_law(cls, prefactor: float, exponent: float, cutoff: float | None = None) -> "CouplingSpec":
        return cls(kind="power_law", prefactor=prefactor, exponent=exponent, cutoff=cutoff)

    @classmethod
    def tabulated(cls, omega, power, cutoff: float | None = None) -> "CouplingSpec":
        return cls(kind="tabulated", omega_samples=np.asarray(omega, dtype=float),
                   power_samples=np.asarray(power, dtype=float), cutoff=cutoff)

    @classmethod
    def zero(cls, cutoff: float | None = None) -> "CouplingSpec":
        """Decoupled bath, f identically zero."""
        return cls(kind="zero", cutoff=cutoff)

    @classmethod
    def for_params(cls, params: StringParams, cutoff: float | None = None) -> "CouplingSpec":
        """Ohmic coupling matched to a parameter set (same beta and L)."""
        return cls.ohmic(params.damping, params.length, cutoff)

    @property
    def effective_cutoff(self) -> float | None:
        """Declared cutoff, narrowed by the support of tabulated samples."""
        if self.kind == "tabulated":
            top = float(self.omega_samples[-1])
            return top if self.cutoff is None else min(self.cutoff, top)
        return self.cutoff

    def kernel_integrand_decays(self) -> bool:
        """True when |f|^2 omega^3 is integrable up to infinity on its own."""
        if self.kind == "zero":
            return True
        if self.kind == "tabulated":
            return True  # compact support
        if self.kind == "power_law":
            return self.exponent < -4.0
        return False  # ohmic: |f|^2 omega^3 is constant


def coupling_power(spec: CouplingSpec, omega) -> np.ndarray:
    """|f(omega)|^2, elementwise, zero above the cutoff.

    Raises NonIntegrableCoupling when a tabulated spec carries negative
    |f|^2 entries.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise ValueError("coupling is defined for omega > 0 only")
    if spec.kind == "zero":
        out = np.zeros_like(w)
    elif spec.kind == "ohmic":
        out = spec.damping / (4.0 * math.pi**2 * spec.length * w**3)
    elif spec.kind == "power_law":
        out = spec.prefactor * w**spec.exponent
    else:
        if np.any(spec.power_samples < 0):
            raise NonIntegrableCoupling("tabulated |f|^2 has negative entries")
        out = np.interp(w, spec.omega_samples, spec.power_samples, left=0.0, right=0.0)
    cut = spec.effective_cutoff
    if cut is not None:
        out = np.where(w > cut, 0.0, out)
    return out


def eval_coupling(spec: CouplingSpec, omega: float) -> float:
    """Coupling amplitude f(omega), the real positive root of |f|^2."""
    return float(np.sqrt(coupling_power(spec, omega)))


def spectral_weight(spec: CouplingSpec, omega) -> np.ndarray:
    """Bare radial measure 4 pi omega^2 |f(omega)|^2 of the isotropic bath."""
    w = np.asarray(omega, dtype=float)
    return 4.0 * math.pi * w * w * coupling_power(spec, w)


def dynamical_weight(spec: CouplingSpec, omega) -> np.ndarray:
    """Spectral weight entering the string dynamics.

    Twice the radial measure: the one-sided memory kernel built from the
    bare measure integrates to half the friction coefficient, while the
    equation of motion carries the whole of it.  See
    FULL_FRICTION_FACTOR.
    """
    return FULL_FRICTION_FACTOR * spectral_weight(spec, omega)


@dataclass(frozen=True)
class ReservoirSpec:
    """Initial reservoir state, fixing the contraction rules used for
    expectation values.

    kind ``vacuum``   no quanta.
    kind ``fock``     a list of (field index nu >= 1, frequency) quanta.
    kind ``thermal``  Boltzmann-weighted contractions at temperature kT.
    """

    kind: str
    quanta: tuple[tuple[int, float], ...] = ()
    kT: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("vacuum", "fock", "thermal"):
            raise ValueError(f"unknown reservoir kind {self.kind!r}")
        if self.kind == "vacuum" and (self.quanta or self.kT is not None):
            raise ValueError("vacuum reservoir carries no data")
        if self.kind == "fock":
            if not self.quanta:
                raise ValueError("fock reservoir needs at least one quantum")
            for nu, w in self.quanta:
                if nu < 1 or w <= 0:
                    raise ValueError("fock quanta need nu >= 1 and omega > 0")
        if self.kind == "thermal" and (self.kT is None or self.kT <= 0):
            raise ValueError("thermal reservoir needs kT > 0")

    @classmethod
    def vacuum(cls) -> "ReservoirSpec":
        return cls(kind="vacuum")

    @classmethod
    def fock(cls, quanta) -> "ReservoirSpec":
        return cls(kind="fock", quanta=tuple((int(n), float(w)) for n, w in quanta))

    @classmethod
    def thermal(cls, kT: float) -> "ReservoirSpec":
        return cls(kind="thermal", kT=float(kT))


@dataclass(frozen=True)
class StringFockState:
    """Phonon content of the string: ((mode, count), ...) with counts >= 1.

    States exist only to select contraction rules; there is no ladder
    algebra behind them.
    """

    occupation: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        seen = set()
        for m, r in self.occupation:
            if m < 1 or r < 1:
                raise ValueError("occupation needs mode >= 1 and count >= 1")
            if m in seen:
                raise ValueError(f"mode {m} listed twice")
            seen.add(m)

    @classmethod
    def from_pairs(cls, pairs) -> "StringFockState":
        return cls(occupation=tuple(sorted((int(m), int(r)) for m, r in pairs)))

    @classmethod
    def vacuum(cls) -> "StringFockState":
        return cls(occupation=())

    @classmethod
    def single(cls, mode: int, count: int = 1) -> "StringFockState":
        return cls(occupation=((mode, count),))

    @property
    def modes(self) -> tuple[int, ...]:
        return tuple(m for m, _ in self.occupation)

    def count(self, mode: int) -> int:
        for m, r in self.occupation:
            if m == mode:
                return r
        return 0

    def max_mode(self) -> int:
        return max((m for m, _ in self.occupation), default=0)

    def with_count(self, mode: int, count: int) -> "StringFockState":
        pairs = [(m, r) for m, r in self.occupation if m != mode]
        if count > 0:
            pairs.append((mode, count))
        return StringFockState.from_pairs(pairs)

    def label(self) -> str:
        if not self.occupation:
            return "|vac>"
        inner = ",".join(f"{r}xm{m}" for m, r in self.occupation)
        return f"|{inner}>"
