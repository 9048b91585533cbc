"""Essential norms of composition, multiplication and inclusion operators on
Hardy, Lebesgue and Dirichlet-Hardy spaces, computed from their closed-form
expressions and checked against finite witnesses."""

from .boundary_maps import (
    BlaschkeProduct,
    Composition,
    TaylorSeries,
    boundary_speed_blaschke,
    boundary_trace,
    essnorm_composition,
    parse_map,
    pushforward_density,
    pushforward_density_blaschke,
    pushforward_density_mc,
)
from .bounds import BoundEstimate
from .dirichlet import (
    DirichletPolynomial,
    bohr_lift,
    bohr_transform,
    essnorm_lower_infty2,
    hp_norm_dirichlet,
    multiplier_essnorm_dirichlet,
    range_closure_test,
    restrict_PN,
)
from .exponents import ExponentQuad, derive_exponents, holder_identity_check
from .hardy import (
    FrequencyPolynomial,
    analytic_shift_witness,
    fejer_approx,
    holder_extremizer,
    hp_norm,
    outer_with_modulus,
    peaking_sequence,
    superinner_sup_realize,
)
from .measure_model import (
    DyadicAlgebra,
    GridFunction,
    MeasureSpace,
    conditional_expectation,
    halving_split,
    lp_norm,
    sign_witness,
)
from .operators import (
    CarlesonMeasure,
    DiscreteMap,
    ProjectionSequence,
    bound_engine_lower,
    bound_engine_upper,
    carleson_hat,
    change_of_variables_check,
    inclusion_essnorm,
    me_cphi_norm,
    multiplier_essnorm,
    multiplier_essnorm_smallp,
    multiplier_norm_exact,
    operator_norm_ascent,
    wco_essnorm,
    weighted_pushforward_lebesgue,
)

__version__ = "0.1.0"
