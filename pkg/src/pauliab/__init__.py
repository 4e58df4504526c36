"""Zero modes of the two-dimensional Pauli operator with Aharonov-Bohm
solenoids: exact counting, explicit bases, numerical verification and
boundary-condition classification."""

from .field import (
    Bump,
    ExtensionKind,
    FieldConfig,
    FieldError,
    ModeCount,
    Solenoid,
    count_zero_modes,
    curly_bracket,
    gauge_shift,
    negate_field,
    normalize_to_unit_interval,
    reduce_to_ev_interval,
    total_flux,
)
from .potential import PotentialEvaluator, SingularPointError, bump_profile
from .modes import (
    FactoredMode,
    NotSquareIntegrableError,
    UnrepresentableModeError,
    ZeroMode,
    ZeroModeBasis,
    basis_for_config,
    build_basis,
    evaluate_mode,
    gauge_transform_mode,
    leading_order,
    mode_local_exponent,
    mode_tail_exponent,
    smallest_l,
    spin_down_monomial_mode,
    vandermonde_null_space,
)
from .numerics import (
    L2Result,
    QuadratureSpec,
    VerificationReport,
    form_value_annulus,
    gauge_modulus_defect,
    gram_matrix,
    integrate_region,
    kernel_residual,
    l2_norm_with_tail,
    wirtinger_fd,
)
from .boundary import (
    AsymptoticCoeffs,
    NuParams,
    angular_moment,
    classify_approximable,
    extension_reference_params,
    extract_coeffs,
    nu_params,
    probe_extension,
)

__version__ = "0.1.0"
