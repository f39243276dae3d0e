"""Heralded entanglement by boson subtraction.

Sparse Fock states, sculpting operators and their bigraph form, a catalog of
schemes, entanglement classification, a polarization-optics simulator and a
search for sculpting operators that produce a given target.
"""

from .bigraph import (
    BLACK,
    BLUE,
    DOTTED,
    RED,
    Dot,
    Edge,
    EdgeColor,
    SculptingBigraph,
    enumerate_perfect_matchings,
    export_dot,
    from_sculpting_operator,
    is_epm,
    permute_circle_labels,
    pm_sum_state,
    to_sculpting_operator,
)
from .engine import (
    SculptingOperator,
    SubtractionOperator,
    SubtractionTerm,
    apply_sculpting,
    check_no_bunching,
    maximally_symmetric_state,
    success_probability,
    sum_over_paths,
)
from .entanglement import (
    EntanglementClass,
    EntanglementKind,
    LogicalState,
    classify,
    fidelity_up_to_phase,
    ghz_target,
    to_logical_state,
    type5_target,
    w_target,
)
from .errors import ContractError, NoBunchingError, NormalizationError, ResourceError, SculptingError
from .fock import FockState, apply_annihilation, apply_creation, basis_state, vacuum
from .optics import Circuit, OpticalState, bell_circuit, run_bell_circuit, run_circuit
from .schemes import SCHEMES, SchemeDescriptor, build_scheme, run_scheme
from .search import SearchResult, TargetSpec, search, solve_weights, verify_candidate

__version__ = "0.1.0"

__all__ = [
    "BLACK",
    "BLUE",
    "Circuit",
    "ContractError",
    "DOTTED",
    "Dot",
    "Edge",
    "EdgeColor",
    "EntanglementClass",
    "EntanglementKind",
    "FockState",
    "LogicalState",
    "NoBunchingError",
    "NormalizationError",
    "OpticalState",
    "RED",
    "ResourceError",
    "SCHEMES",
    "SchemeDescriptor",
    "SculptingBigraph",
    "SculptingError",
    "SculptingOperator",
    "SearchResult",
    "SubtractionOperator",
    "SubtractionTerm",
    "TargetSpec",
    "apply_annihilation",
    "apply_creation",
    "apply_sculpting",
    "basis_state",
    "bell_circuit",
    "build_scheme",
    "check_no_bunching",
    "classify",
    "enumerate_perfect_matchings",
    "export_dot",
    "fidelity_up_to_phase",
    "from_sculpting_operator",
    "ghz_target",
    "is_epm",
    "maximally_symmetric_state",
    "permute_circle_labels",
    "pm_sum_state",
    "run_bell_circuit",
    "run_circuit",
    "run_scheme",
    "search",
    "solve_weights",
    "success_probability",
    "sum_over_paths",
    "to_logical_state",
    "to_sculpting_operator",
    "type5_target",
    "vacuum",
    "verify_candidate",
    "w_target",
]
