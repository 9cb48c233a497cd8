"""Ungarian Markov chains on finite lattices.

Exact absorption-time solvers and seeded Monte Carlo for the weak order
on S_n, the Tamari lattice (as 312-avoiding permutations and as ordered
forests), and order-ideal lattices J(P); the last-passage-percolation
coupling with geometric weights and the multicorner growth process on
grids; and the skyline/summary diagnostics with the multi-stream
simulator.
"""

from .engine import (
    ChainLattice,
    ChainRun,
    GeometricSampler,
    IdealLattice,
    McResult,
    SnLattice,
    TamariAvLattice,
    TamariForestLattice,
    exact_expected_absorption,
    expected_absorption_time,
    first_passage_counts,
    geometric_tail_bound,
    monte_carlo_expectation,
    run_chain,
    sn_absorption_samples,
    step,
    walk_hitting_time,
)
from .errors import (
    BoundViolation,
    CapExceeded,
    ChainExplosion,
    ConfigError,
    CouplingViolation,
    CycleDetected,
    DomainError,
    InvalidSelection,
    InvariantViolation,
    NotALattice,
    Not312Avoiding,
    NotReached,
    RedundantCover,
    SeriesTruncationError,
    SingularSystem,
    SizeMismatch,
    StateExplosion,
    UngarLabError,
)
from .percolation import (
    CoupledIdealRun,
    LppSample,
    coupled_ideal_run,
    ideal_complement_rows,
    lpp_grid_samples,
    lpp_sample,
    max_chain_weight,
    rescaling_constants,
    sn_linear_coefficient,
    tamari_linear_coefficient,
    tasep_absorption_samples,
    tasep_run,
    tasep_trajectory,
    tracy_widom_tail,
    upsilon,
    zeta_estimate,
    zeta_liminf_lower_bound,
    zeta_limsup_estimate,
)
from .perms import (
    Permutation,
    all_permutations,
    descents,
    maximal_ungar_move,
    project_pi_k,
    sorted_prefix_time,
    ungar_move,
    weak_leq,
    weak_meet,
)
from .poset import (
    FinitePoset,
    GridPoset,
    IdealLatticePoset,
    OrderIdeal,
    build_poset,
    grid_poset,
    maximal_chains,
    meet,
    order_ideals,
)
from .rng import StreamBank, replica_generator, replica_random
from .skyline import (
    Algorithm1Result,
    TwoRowedArray,
    algorithm1_run,
    event_array,
    event_interval,
    good_array_length_bounds,
    good_frequency,
    is_childlike,
    is_good,
    lower_bound_f,
    naive_tamari_run,
    skyline,
    summarize,
    summary_columns,
    summary_length_bounds,
)
from .tamari import (
    OrderedForest,
    SimForest,
    av312_permutations,
    catalan,
    covers_av312,
    forest_ungar_move,
    ordered_forests,
    phi,
    phi_inverse,
    project_down,
    restrict,
)

__version__ = "0.1.0"
