"""Hamiltonian toolkit for cohomogeneity-one gradient Ricci solitons."""

from .errors import (
    BadDimension,
    BadParams,
    DimensionMismatch,
    DuplicateWeight,
    GrsError,
    InconsistentSystem,
    OverflowGuard,
    RecursionObstructed,
    StepUnderflow,
    ZeroCoefficient,
)
from .laurent import E_SYMBOLIC, LaurentScalar, parse_laurent
from .mompoly import MomPoly
from .orbit_model import (
    ExtVector,
    LorentzForm,
    OrbitData,
    build_orbit,
    is_null,
    shifted_bilinear_check,
    lorentz_bilinear,
    lorentz_quadratic,
    make_orbit,
)
from .phase_dynamics import (
    CurveSample,
    Params,
    PhasePoint,
    VelocityPoint,
    ambient_scalar_curvature,
    canonical_second_derivatives,
    conservation_quantities,
    grs_residuals,
    hamiltonian_gradient,
    hamiltonian_steady_value,
    hamiltonian_value,
    legendre_forward,
    legendre_inverse,
    ricci_eigenvalues,
    s_gradient,
    scalar_curvature,
)
from .superpotential import (
    Candidate,
    ExpSum,
    SubsystemField,
    SuperpotentialCertificate,
    candidate_set,
    first_order_subsystem,
    nonexistence_certificate,
    solve_superpotential,
    superpotential_residual,
)
from .first_integrals import (
    ExpPolySum,
    IntegralCertificate,
    Seed,
    bryant_planar_system,
    darboux_verify,
    default_seed,
    factorization_seed,
    integral_drift,
    integrating_factor_check,
    poisson_bracket,
    recursion_solve,
    steady_hamiltonian,
)
from .catalog import (
    SolutionCurve,
    bbc_orbit,
    beta_quadrature,
    catalog_ids,
    circle_orbit,
    closed_form,
    posmu_t0_root,
    sphere_orbit,
    warped_orbit,
)
from .flows import (
    ScanReport,
    SmoothnessReport,
    Trajectory,
    integrate_canonical,
    integrate_first_order,
    residual_scan,
    smoothness_check,
)

__version__ = "0.1.0"
