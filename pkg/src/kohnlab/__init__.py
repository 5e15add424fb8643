"""Numerical laboratory for the generalized Kohn variational method on
a model radial potential, with an independent ODE oracle.

The package computes s-wave elastic phase shifts two ways: by direct
integration of the radial equation (the oracle) and variationally from
a trial function with rotatable boundary conditions.  On top of the
variational engine sit the singularity diagnostics: determinant
quadratic form over the boundary phase, anomaly-free vs spurious
(Schwartz) classification of its zeros, conditioning measures, two
boundary-phase optimization schemes, and the complex (outgoing-wave)
variant whose determinant traces a circle.
"""

from .basis import BasisSpec, RotatedPair, eval_C, eval_S, eval_chi, eval_chi0, rotate_pair
from .complexkohn import (
    ComplexKohnSolution,
    DScan,
    assemble_complex,
    complex_phase_shift,
    det_complex_exact,
    scan_D,
    solve_complex_at_tau,
)
from .engine import (
    ElementTable,
    KohnSolution,
    assemble_elements,
    kato_normalization,
    kohn_cotangent,
    phase_shift,
    rotate_table,
    solve_at_tau,
    solve_kohn,
    stationary_values,
)
from .errors import (
    ConfigError,
    DegenerateLimit,
    DegenerateSystem,
    InsufficientData,
    KohnError,
    NoAnomalyFreeRoot,
    NonConvergence,
    QuadratureNotConverged,
    SingularMatrix,
)
from .potentials import (
    PotentialKind,
    PotentialSpec,
    RadialGrid,
    build_grid,
    evaluate_potential,
    oracle_phase_shift,
    wrap_half_pi,
)
from .singularities import (
    MeasureResult,
    QuadraticCoeffs,
    RootClass,
    SingularityReport,
    TauRoots,
    analyze_table,
    anomaly_measure,
    classify_root,
    conditioning,
    extract_coeffs,
    form_max,
    form_value,
    optimize_tau,
    singular_taus,
)

__version__ = "0.1.0"
