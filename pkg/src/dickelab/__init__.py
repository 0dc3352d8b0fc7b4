"""Numerical laboratory for an extended Dicke model with collective atom-atom coupling.

H = omega a^dag a + g (a^dag + a) Sz - v Sx^2 on the maximal-spin sector
S = N/2, with exact diagonalization, a displaced-frame spin reference
model, semiclassical landscape analysis, a circuit parameter map, and a
sweep CLI.
"""

from .circuit import (
    CircuitParams,
    DerivedSingleAtom,
    RegimeReport,
    derive_model_params,
    flux_radians_from_weber,
    parse_device_text,
    read_device_file,
    validate_regime,
)
from .diagnostics import (
    CatOverlap,
    ConvergenceReport,
    DegeneracyReport,
    OracleEquivalence,
    SplittingGap,
    cat_overlap,
    converge_cutoff,
    degeneracy_classes,
    oracle_spectrum_equivalence,
    splitting_and_gap,
    spin_model_spectrum,
    symmetry_commutator_norm,
)
from .errors import (
    ConfigError,
    DescentError,
    DickeLabError,
    ResourceError,
    SweepAborted,
    ValidationError,
)
from .model import (
    BasisIndex,
    ModelParams,
    ParityOperator,
    SparseOperator,
    SpinOperatorSet,
    build_full_hamiltonian,
    collective_spin_matrices,
    polaron_spin_hamiltonian,
    symmetry_operator,
)
from .semiclassics import (
    PhasePoint,
    ScalingFit,
    StationaryPoint,
    energy_surface,
    find_minima,
    interference_factor,
    reduced_surface,
    splitting_scaling_fit,
    surface_gradient,
)
from .solvers import (
    SolverOptions,
    SpectrumResult,
    dense_spectrum,
    lanczos_lowest,
    solve_lowest,
)
from .sweep import (
    CSV_HEADER,
    SweepConfig,
    SweepRow,
    emit_results,
    parse_config,
    run_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "BasisIndex",
    "CSV_HEADER",
    "CatOverlap",
    "CircuitParams",
    "ConfigError",
    "ConvergenceReport",
    "DegeneracyReport",
    "DerivedSingleAtom",
    "DescentError",
    "DickeLabError",
    "ModelParams",
    "OracleEquivalence",
    "ParityOperator",
    "PhasePoint",
    "RegimeReport",
    "ResourceError",
    "ScalingFit",
    "SolverOptions",
    "SparseOperator",
    "SpectrumResult",
    "SpinOperatorSet",
    "SplittingGap",
    "StationaryPoint",
    "SweepAborted",
    "SweepConfig",
    "SweepRow",
    "ValidationError",
    "build_full_hamiltonian",
    "cat_overlap",
    "collective_spin_matrices",
    "converge_cutoff",
    "degeneracy_classes",
    "dense_spectrum",
    "derive_model_params",
    "emit_results",
    "energy_surface",
    "find_minima",
    "flux_radians_from_weber",
    "interference_factor",
    "lanczos_lowest",
    "oracle_spectrum_equivalence",
    "parse_config",
    "parse_device_text",
    "polaron_spin_hamiltonian",
    "read_device_file",
    "reduced_surface",
    "run_sweep",
    "solve_lowest",
    "spin_model_spectrum",
    "splitting_and_gap",
    "splitting_scaling_fit",
    "surface_gradient",
    "symmetry_commutator_norm",
    "symmetry_operator",
    "validate_regime",
]
