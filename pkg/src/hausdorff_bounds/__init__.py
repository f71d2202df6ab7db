"""Numerical toolkit for weighted norm bounds of multilinear Hausdorff operators."""

from .constants import (
    THEOREM_IDS,
    TheoremParams,
    classical_exponents,
    compute_constant,
    compute_muckenhoupt_constant,
    require_valid,
    validate_hypotheses,
)
from .errors import (
    DIVERGENT,
    UNBOUNDED,
    BranchAmbiguity,
    ConfigError,
    DivergentIntegral,
    DivergentMass,
    DivergentNorm,
    DivergentNumerator,
    HausdorffBoundsError,
    HypothesisViolation,
    IoError,
    OutOfRangeWarning,
    QuadratureFailure,
    SingularMatrix,
    TruncationWarning,
    ZeroDenominator,
    is_divergent,
    is_unbounded,
)
from .operators import (
    KernelSpec,
    MatrixFamily,
    OperatorSpec,
    apply_hardy_1d,
    apply_hausdorff_1d,
    apply_operator,
    operator_output,
    rho_bound,
)
from .powerlaw import RadialPower
from .quadrature import DEFAULT_QUAD, QuadratureSpec
from .spaces import DEFAULT_RANGE, DyadicRange, SpaceSpec, TestFunction, annulus_norm, space_norm
from .verify import (
    RatioReport,
    SweepResult,
    build_extremal,
    empirical_ratio,
    sharpness_sweep,
    two_sided_check,
)
from .weights import (
    BallGrid,
    MuckenhouptParams,
    Weight,
    ap_characteristic,
    ball_mass,
    critical_index_estimate,
    power_weight_in_ap,
    rh_constant,
)

__version__ = "0.1.0"
