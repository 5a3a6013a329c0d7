"""Interval exchange transformations: renormalization, cocycles,
Diophantine certification and cohomological equations."""

from .combinatorics import (
    PermutationPair, IntersectionForm, SingularityStructure,
    check_irreducible, omega_matrix, singularity_cycles,
)
from .iet_core import Iet, ConnectionWitness, birkhoff_sum, detect_connection
from .rauzy_veech import (
    CocyclePath, KzMatrix, StepType, elementary_step, iterate, visit_count_check,
)
from .cocycle_analysis import (
    DiophantineReport, LyapunovReport, StableSpace,
    cf_crosscheck, dc_test, lyapunov_spectrum, stable_space,
)
from .function_spaces import PiecewiseFunction, boundary, bv_seminorm, poly_space_dims
from .cohomology_solver import (
    CohomologySolution, CorrectionOperator, SolveOptions,
    birkhoff_bound_check, build_correction, decay_log, solve, solve_higher,
    special_sum,
)
from .self_similar import (
    CodimensionInput, RauzyLoop, build_self_similar, codimension,
    equation_count_check, ew_instance, ew_loop, find_loops,
)

__version__ = "0.1.0"
