"""Exact proximity and sparsity certificates for integer programs.

Public entry points are re-exported here; submodules hold the details.
"""

from .bounds import (
    BoundLedger,
    Comparison,
    bound_cook,
    bound_cor6,
    bound_cor7,
    bound_ew,
    bound_hnf_known,
    bound_lemma3,
    bound_thm1,
    bound_thm2,
    compare,
    det_approx_factor,
    sparsity_bounds,
    sparsity_check,
)
from .errors import (
    CertificationError,
    DimensionError,
    InfeasibleConeError,
    InstanceParseError,
    PreconditionError,
    ProxcertError,
    RankError,
    ResourceLimitError,
    SingularMatrixError,
    ValidationError,
)
from .generators import frontier_search, gen_general, gen_mip, gen_nonvertex_demo, gen_random
from .instances import GeneralInstance, dump, load, parse, serialize
from .linalg import det, hnf_row_style, integer_solutions, nullspace_dir, rank, solve_square
from .minors import (
    cauchy_binet_check,
    delta_general,
    delta_k_exact,
    delta_report,
    maxdet_local_search,
)
from .pipeline import certify_general, certify_instance, certify_mip
from .proximity import (
    build_cone,
    decompose,
    enumerate_rays,
    measure_true_proximity,
    repair,
    repair_general,
    uip_pipeline,
)
from .solvers import (
    IpSolution,
    Limits,
    LpVertex,
    MipInstance,
    SolveStatus,
    StandardInstance,
    check_assumptions,
    ip_solve,
    ip_solve_oracle,
    lp_solve,
    min_support,
    mip_solve,
)

__version__ = "0.1.0"
