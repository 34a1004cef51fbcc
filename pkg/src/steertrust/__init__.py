"""Steering bounds under imperfect trust in the characterized party."""
from .bd_family import bd_alice_operators, bd_bounds, bd_curve, bd_trust_threshold
from .kernels import BACKEND
from .operators import (
    ClockShiftPair,
    DensityMatrix,
    HermitianUnitTrace,
    UnitaryBasis,
    build_basis,
    build_clock_shift,
    frobenius_norm,
    hs_norm_sq,
    max_eigenvalue,
)
from .steering import (
    Assemblage,
    SteeringFunctional,
    SteeringScenario,
    corrected_local_bound,
    empirical_corrected_bound,
    evaluate,
    fact2_correction,
    lhs_bound,
)
from .tomography import decompose, fact1_deviation_bound, imprecise_tomography, run_fact1_experiment
from .trust import (
    PerturbedBasis,
    TrustReport,
    perturb_basis,
    perturb_unitary,
    trust_from_deviations,
    trust_from_fidelity,
)

__version__ = "0.1.0"
