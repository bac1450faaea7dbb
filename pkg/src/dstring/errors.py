"""Exception types raised by the library.

Every error signals a violated precondition or a numerical failure that
the caller can act on; none of them is recoverable by retrying with the
same inputs.
"""


class DstringError(Exception):
    """Base class for all library errors."""


class OverdampedMode(DstringError):
    """A retained string mode satisfies omega_n <= beta/(2 lambda).

    The oscillatory (underdamped) solution branch is the only one
    implemented; overdamped modes are rejected rather than extended.
    """


class NonIntegrableCoupling(DstringError):
    """A tabulated coupling contains negative |f|^2 entries."""


class CutoffRequired(DstringError):
    """An integral over the coupling does not converge without an
    ultraviolet cutoff, and none was supplied."""


class CutoffExceeded(DstringError):
    """A resonance frequency lies above the coupling cutoff, so no
    bath modes exist to absorb or emit at that frequency."""


class GridTooCoarse(DstringError):
    """A frequency or time grid cannot resolve the structure it is
    asked to integrate (typically the resonance Lorentzian)."""


class QuadratureDivergence(DstringError):
    """The adaptive integrator failed to reach the requested tolerance."""


class StepTooLarge(DstringError):
    """The fixed integrator step does not resolve the fastest bath mode."""


class WindowOutsideRun(DstringError):
    """A fit window extends outside the simulated time range or into
    the initial transient."""


class RecurrenceContamination(DstringError):
    """A fit window extends past the Poincare recurrence time of the
    discretized bath, where energy spuriously returns to the string."""
