"""derivekit: equation reconstruction for step-wise symbolic derivations.

The package represents a derivation as a sequence of (LHS, RHS) equation
states connected by typed algebraic actions, and reconstructs hidden
intermediate states with a string-similarity-guided two-hop search over a
knowledge base of equations and symbols.
"""

from .actions import Action, apply, builtin_action_set
from .expr import Expression, subexpressions, symbols_of
from .kb import KnowledgeBase, build, nsa_candidates
from .metrics import Measure
from .parser import ParseError, parse
from .search import (
    CandidatePath,
    DerivationUnit,
    HeuristicParams,
    heuristic,
    heuristic_components,
    reconstruct,
)
from .states import ActionType, EquationState, NSA, StateType

__version__ = "0.1.0"

__all__ = [
    "Action",
    "ActionType",
    "CandidatePath",
    "DerivationUnit",
    "EquationState",
    "Expression",
    "HeuristicParams",
    "KnowledgeBase",
    "Measure",
    "NSA",
    "ParseError",
    "StateType",
    "apply",
    "build",
    "builtin_action_set",
    "heuristic",
    "heuristic_components",
    "nsa_candidates",
    "parse",
    "reconstruct",
    "subexpressions",
    "symbols_of",
]
