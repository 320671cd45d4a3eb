"""Rank kernel, graded quotients of C[K], and the split Koszul spaces W(f; n0)."""
from .quotient import RankAudit, quotient_data, quotient_graded_dims, rank
from .sparse import SparseMatrix
from .wspace import (
    BigradedDims,
    ha_on_w_space,
    in_shifted_dual_cone,
    is_nondegenerate,
    level_set,
    probe_strong_nondegeneracy,
    semicontinuity_check,
    split_generators,
    w_space_dims,
)

__all__ = [
    "BigradedDims",
    "RankAudit",
    "SparseMatrix",
    "ha_on_w_space",
    "in_shifted_dual_cone",
    "is_nondegenerate",
    "level_set",
    "probe_strong_nondegeneracy",
    "quotient_data",
    "quotient_graded_dims",
    "rank",
    "semicontinuity_check",
    "split_generators",
    "w_space_dims",
]
