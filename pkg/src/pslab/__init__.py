"""Certified experiments on floor-power sequences PS(alpha) = {floor(n^alpha)}.

Layers: certified interval/rational arithmetic (`certified`), the sequence
itself (`sequence`), the linear-equation window reduction (`linear`),
twisted inequality systems and continued fractions (`systems`),
equidistribution diagnostics (`equidist`), interval-set measure
experiments (`measure`), and the batch CLI (`cli`).
"""

from .certified import (
    CertifiedValue,
    Exponent,
    NAMED_CONSTANTS,
    PrecisionPolicy,
    DEFAULT_POLICY,
    dist_nearest_int,
    floor_pow,
    frac_pow,
    phi,
    pow_certified,
    root_ceil,
)
from .errors import (
    AmbiguousRounding,
    DomainError,
    EmptyInput,
    InsufficientData,
    NotSolvableInN,
    PrecisionExhausted,
    PslabError,
    TooFewMembers,
)
from .sequence import (
    APRecord,
    FS3Witness,
    GapStats,
    PSWindow,
    find_ap,
    find_fs3,
    gap_stats,
    is_member,
    member_witness,
    ps_window,
)
from .linear import (
    CountFit,
    LinearEq,
    SolutionRecord,
    check_equivalence,
    count_fit,
    count_solutions,
    make_eq,
    residue_test,
    solve_linear,
    solve_xyz,
    window,
    window_hits_integer,
)
from .systems import (
    Certificate,
    ContinuedFraction,
    DiophSystem,
    SolveReport,
    SystemSolution,
    cf_expand,
    solve_system_one,
    solve_system_two,
    verify_solution,
)
from .equidist import (
    BandReport,
    BoundParams,
    GFuncs,
    SamplePoints,
    equid_sample,
    equid_table,
    g_funcs,
    star_discrepancy,
    third_derivative_band,
    weyl_sum,
)
from .measure import (
    BCStats,
    DichotomyReport,
    HSumReport,
    Interval,
    IntervalSet,
    IndexSets,
    MetricalParams,
    bc_statistics,
    bound_check_triples,
    count_triples,
    dichotomy_scan,
    index_sets,
    interval_around,
    psi,
    set_E,
    set_F,
    set_G,
    set_H_sum,
    window_share_threshold,
)

__version__ = "1.0.0"
