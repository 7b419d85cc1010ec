"""Numerical toolkit for the matrix Schur interpolation problem and its
system-theoretic companions (unitary colligations, spectral factors,
Darlington embeddings)."""

from .errors import *  # noqa: F401,F403
from .linalg import DEFAULT_TOL, Tolerances
from .schur import (
    SchurParameters,
    SchurSequence,
    TruncatedSeries,
    associate,
    block_toeplitz,
    classify,
    evaluate,
    schur_parameters,
    schwarz_pick_matrix,
    taylor_from_parameters,
)
from .resolvent import (
    ResolventMatrix,
    binomial_factor,
    information_matrix,
    jform_defect,
    lft_apply,
    lft_apply_left,
    lft_invert,
    lft_series,
    product_check,
    resolvent_B,
    resolvent_Btilde,
)
from .weyl import (
    WeylBall,
    WeylLimit,
    ball_from_resolvent_blocks,
    det_check,
    duality_check,
    membership,
    weyl_ball,
    weyl_limit,
    weyl_matrix,
)
from .colligation import (
    UnitaryColligation,
    char_function,
    embed_contraction,
    factor_colligation,
    product,
    random_colligation,
    simulate,
    subspace_analysis,
    taylor_coeffs,
)
from .boundary import (
    BoundaryGrid,
    BoundarySamples,
    OuterFactor,
    defect_function,
    defect_pointwise,
    inner_check,
    iterated_defect,
    outer_factor,
    sample,
    star_outer_factor,
)
from .darlington import (
    darlington_feasibility,
    internal_scattering,
    loss_metric,
    pseudocontinuation_check,
    regular_extension,
    scalar_multiple,
)

__version__ = "0.1.0"
