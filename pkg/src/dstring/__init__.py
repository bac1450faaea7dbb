"""Quantum dynamics of a damped vibrating string coupled to a continuum
scalar-field reservoir: memory kernels, exact linear operator solutions,
asymptotic energies, transition rates, and a discretized-bath oracle
that cross-validates the analytic paths.
"""

from .bathsim import (
    DiscreteBath,
    GridPolicy,
    OracleRun,
    discretize_bath,
    evolve_coefficients,
    fit_decay_rate,
    moment_defect,
)
from .dynamics import (
    BathModeSolution,
    CoefficientSolution,
    bath_mode_solution,
    ccr_defect,
    mode_solution,
    resonance_grid,
)
from .errors import (
    CutoffExceeded,
    CutoffRequired,
    DstringError,
    GridTooCoarse,
    NonIntegrableCoupling,
    OverdampedMode,
    QuadratureDivergence,
    RecurrenceContamination,
    StepTooLarge,
    WindowOutsideRun,
)
from .fieldrep import (
    FieldSample,
    Lattice,
    SourceShapes,
    bath_hamiltonian_identity,
    plane_wave_sample,
    random_band_limited_sample,
    source_shapes,
)
from .kernel import KernelSample, gamma_integral, gamma_kernel, noise_correlator
from .model import (
    FULL_FRICTION_FACTOR,
    CouplingSpec,
    ModeSpectrum,
    ReservoirSpec,
    StringFockState,
    StringParams,
    build_spectrum,
    coupling_power,
    dynamical_weight,
    eval_coupling,
    spectral_weight,
)
from .observables import (
    EnergyReport,
    lorentzian_moment_integrals,
    reservoir_energy_asymptotic,
    string_energy_asymptotic,
    string_energy_timeseries,
)
from .transitions import (
    RateReport,
    absorption_rate_fock,
    absorption_rate_thermal,
    emission_rate,
    reduced_density_diagonal,
)

__version__ = "0.1.0"
