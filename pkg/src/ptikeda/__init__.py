"""Ikeda map with balanced gain and loss: simulation and analysis tools."""
from .core import (
    DivergenceError,
    FieldState,
    IntermediateFields,
    MapParams,
    intermediate_fields,
    jacobian,
    psi,
    psi_pm,
    step,
)
from .extremes import (
    crisis_report,
    ee_report,
    is_bimodal,
    probability_histogram,
    state_plane_dump,
)
from .orbits import (
    Orbit,
    OrbitSpec,
    PeriodClass,
    PeriodLabel,
    bifurcation_scan,
    classify,
    detect_period,
    iterate_orbit,
    lle,
    lle_scan,
    parameter_basin,
)
from .spectrum import (
    Regime,
    SpectralResult,
    eigenspectrum_sweep,
    eigenvalues,
    exceptional_point,
    linear_instability_threshold,
    transfer_matrix,
)

__version__ = "0.1.0"
