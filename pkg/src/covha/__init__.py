"""Covariant functions of subgroup characters on finite groups.

The averaging operator of a character, covariant subspaces and kernels,
quotient norms and annihilator duality, with numerical checks of the
operator identities they satisfy.
"""

__version__ = "0.1.0"

from .characters import Character, abelianization, enumerate_characters, is_character
from .covariant import (
    CovariantContext,
    SubspaceBasis,
    apply_T,
    covariant_basis,
    is_covariant,
    kernel_basis,
    operator_matrix,
)
from .duality import DualFunctional, annihilator, verify_duality
from .funcspace import GroupFunction, convolve, involution, lp_norm, pairing, sup_norm
from .groups import Group, GroupError, Subgroup, build_group, haar, left_cosets, subgroup_closure, weil_sum
from .quotient import QuotientProblem, quotient_norm

__all__ = [
    "Character", "abelianization", "enumerate_characters", "is_character",
    "CovariantContext", "SubspaceBasis", "apply_T", "covariant_basis", "is_covariant",
    "kernel_basis", "operator_matrix", "DualFunctional", "annihilator", "verify_duality",
    "GroupFunction", "convolve", "involution", "lp_norm", "pairing", "sup_norm",
    "Group", "GroupError", "Subgroup", "build_group", "haar", "left_cosets",
    "subgroup_closure", "weil_sum", "QuotientProblem", "quotient_norm",
]
