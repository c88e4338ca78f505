"""perwave: periodic traveling waves of gKdV/gBBM and their transverse
spectral instability, via geometric Jacobian indices and the periodic Evans
function."""

from .errors import (
    DegenerateRoot,
    IntegrationFailure,
    MethodDisagreement,
    NoiseFloor,
    NotInOmega,
    NoWell,
    PeriodMismatch,
    PerwaveError,
    QuadratureNonconvergence,
    ResidualTooLarge,
    StencilLeftOmega,
    VerdictConflict,
    WindingMismatch,
)
from .models import (
    EquationFamily,
    Nonlinearity,
    PotentialWell,
    WaveParams,
    effective_mass,
    find_turning_points,
    in_omega,
    make_bbm_quadratic,
    make_kdv,
    make_mkdv,
    make_power_law,
    potential,
    potential_derivative,
    potential_second_derivative,
)
from .profile import WaveProfile, period_quadrature, solve_profile
from .functionals import (
    Functionals,
    JacobianIndices,
    StepPolicy,
    TransverseVerdict,
    Verdict1D,
    classify,
    compute_functionals,
    functionals_at,
    gradients,
    indices_at,
    indices_from,
    jacobian2,
    jacobian3,
)
# NOTE: the scalar Evans-function op `evans.evans` is deliberately not
# re-exported: a top-level name `evans` would shadow the submodule.
from .evans import (
    BranchReport,
    BranchVerdict,
    EvansSample,
    MonodromyMatrix,
    coefficient_matrix,
    evans_batch,
    extract_normal_form,
    monodromy,
    monodromy_batch,
    track_roots,
    transverse_verdict,
)
from .oracles import (
    bbm_jacobian2_closed,
    cubic_discriminant,
    elliptic_E,
    elliptic_K,
    jacobi_cn,
    jacobi_dn,
    jacobi_sn,
    kdv_cnoidal_profile,
    kdv_jacobian3_closed,
    mkdv_cn_profile,
    mkdv_dn_profile,
)

__version__ = "0.1.0"
