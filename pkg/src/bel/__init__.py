"""Barcode entropy lab.

Persistence barcodes and their counting functions, finite-range entropy
estimators, radial Hamiltonian profiles, symbolic suspension flows and a
model-level comparison of barcode and topological entropy.
"""
from .estimators import (
    EntropyEstimate,
    EstimatorError,
    EvaluationSchedule,
    barcode_entropy,
    dyn_bar_count,
    dyn_barcode_entropy,
    dyn_entropy,
    eps_entropy,
    log_plus,
    planted_barcode,
)
from .kernels import BACKEND
from .lab import (
    ComparisonReport,
    CrossingEnergyModel,
    corollary_c_report,
    synth_floer_barcode,
    theorem_b_check,
)
from .persistence import (
    Bar,
    Barcode,
    Cell,
    FilteredComplex,
    Reparametrization,
    count_bars,
    direct_sum,
    rank_invariant,
    reduce_filtration,
    reparametrize,
    truncate,
)
from .profiles import (
    Profile,
    ProfileError,
    action_of_radius,
    contact_to_hamiltonian,
    hf_barcode,
    radius_of_period,
    scale_profile,
    standard_profile,
)
from .symbolic import (
    PeriodicOrbit,
    SFTFlow,
    ShadowingError,
    TorusFlow,
    band_count,
    count_orbits,
    htop_estimate,
    pseudo_orbit_defect,
    shadow,
)

__version__ = "0.1.0"
