"""Error-correcting codes for the mean king's problem."""

from .clique import BACKEND as CLIQUE_BACKEND
from .codes import (
    KLReport,
    QuantumCode,
    apply_channel,
    build_bipartite_code,
    build_multipartite_code,
    build_recovery,
    code_fidelity,
    discrimination_pvm,
    embed_errors,
    ghz_state,
    kl_check,
    select_orthogonal_set,
    shifts_disagree,
)
from .errors import DecompositionError, DimensionError, KingcodeError
from .model import (
    ErrorModel,
    IndexSets,
    MeasurementFamily,
    SchmidtState,
    born,
    embed_on_slot,
    example_error_model,
    example_index_sets,
    standard_qubit_measurements,
)
from .numerics import (
    DEFAULT_TOL,
    StateVector,
    Tolerance,
    adjoint,
    orthonormalize,
    projector,
    psd_defect,
    tensor,
)
from .protocol import GameConfig, guess, run_exhaustive, run_montecarlo
from .solution import (
    SolutionPair,
    derive_error_operators,
    derive_index_sets,
    gram_check,
    pvm_from_error_model,
    verify_solution,
)

__version__ = "0.1.0"
