"""Principal eigenvalues of drift-diffusion operators and a numerical
Faber-Krahn inequality with bounded drift."""

from .eigensolve import EigenResult, collatz_bracket, principal_eigenpair
from .errors import (
    BracketError,
    DriftFKError,
    IllConditionedError,
    NonConvergenceError,
    PositivityError,
    PreconditionError,
    ProfileValidityError,
    ResolutionError,
)
from .geometry import (
    Disk,
    Ellipse,
    GridMask,
    Interval,
    Polygon,
    Rectangle,
    Star,
    domain_from_dict,
    equal_measure_radius,
    is_connected,
    measure,
    rasterize,
    unit_ball_volume,
)
from .harness import (
    Report,
    random_domain,
    rearrange_report,
    slab_bound,
    sweep_tau,
    verify_divfree,
    verify_fk,
    verify_shift,
)
from .operator import DriftSpec, assemble, is_m_matrix
from .optimal_drift import OptimalDriftResult, lambda_max, lambda_min
from .radial import (
    RadialProfile,
    fk_bound,
    interval_closed_form,
    log_decay_rates,
    radial_eigen,
)
from .rearrange import (
    RearrangementProfile,
    check_bound,
    level_perimeter,
    level_table,
    symmetrize,
)

__version__ = "0.1.0"
