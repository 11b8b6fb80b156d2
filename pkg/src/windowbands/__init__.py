"""Leading-order band structure of a Schrodinger operator on a 2D periodic
domain whose cells communicate through small boundary windows.

Closed-form band coefficients from junction trace data, the adapted-basis
rotation, boundary-layer matching, and direct finite-difference validation
solvers (Neumann cell + quasi-periodic windowed cell).
"""

__version__ = "0.1.0"

from .bands import (
    BandCoefficients,
    BandInterval,
    band_edges_at_epsilon,
    band_intervals,
    lambda_01,
    lambda_10,
    lambda_10_diff,
    sample_bands,
)
from .cells import (
    CellSpec,
    EigenpairSet,
    assemble_neumann,
    extract_traces,
    make_potential,
    solve_lowest,
    tune_degeneracy,
)
from .eigendata import (
    CellEigenData,
    FunctionalVectors,
    TraceData,
    dump_eigendata,
    functional_vectors,
    l_theta,
    l_theta_prime,
    l_theta_prime_diff,
    load_eigendata,
    require_nondegenerate,
)
from .errors import WindowBandsError
from .fixtures import figure_case
from .floquet import (
    FloquetResult,
    WindowedSpec,
    assemble_windowed,
    eigen_near,
    k1_cases,
    k2_cases,
    rate_sweep,
)
from .inner import (
    InnerPoint,
    MatchingCoefficients,
    X0,
    X1,
    inner_field_leading,
    matching_coefficients_order1,
    matching_coefficients_order2,
    solvability_check,
)
from .rotation import (
    GramData,
    RotationResult,
    first_row,
    gram,
    rotate_basis,
    tilde_vectors,
    verify_identities,
)
