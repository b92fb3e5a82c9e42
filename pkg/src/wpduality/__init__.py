"""Wave-particle duality as a witness of contextuality in generalized probabilistic theories."""
from .duality import (
    DualityPoint, TradeoffCurve, duality_point, fringe_visibility, max_visibility,
    nc_bound_satisfied, optimal_reflectivity, path_distinguishability,
    quantum_bound_satisfied, tradeoff_sweep,
)
from .errors import SolverFailure, ValidationError
from .gpt import BinaryMeasurement, GptVector, StateSpaceModel, expectation, mix, probability
from .interferometer import (
    CountsTable, NoiseModel, PrepSettings, apply_noise, orbit_preparations, prepare,
    sample_counts, which_phase, which_way,
)
from .ontic import (
    FarkasCertificate, FeasibilityResult, OnticModel, feasibility_boundary, nc_model_feasibility,
)
from .orbit import OrbitQuadruple, OrbitReport, check_orbit, complete_orbit, symmetry_scan
from .pipeline import ideal_report, run_pipeline
from .secondary import SecondaryQuadruple, WitnessReport, find_secondary_quadruple, quadruple_report
from .tomography import TomographyFit, fit_frequencies, fit_gpt, gauge_align

__version__ = "0.1.0"
