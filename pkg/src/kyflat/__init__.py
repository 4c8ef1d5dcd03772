"""Overcomplete third-order tensor decomposition with Koszul-Young flattenings.

The main entry points are :func:`decompose` (recover a rank-``r``
decomposition), :func:`detect_rank` (rank detection and certified lower
bounds), :func:`certify_uniqueness` (checkable uniqueness conditions) and
:func:`solve_commuting_extension`.
"""

from .certificate import UniquenessCertificate, build_N, build_P, certify_uniqueness
from .combinat import SubsetIndexer, sigma
from .commuting_ext import (CommExtInstance, ExtensionReport, block_extension, generate_instance,
                            lemma13_extend, solve_commuting_extension, verify_extension)
from .decompose import (DecompositionPlan, SparsityPattern, UnsupportedPlanError, decompose,
                        extract_side, make_plan, pair_sides, phi)
from .errors import AlgorithmFailure, DiagonalizationError, FormatError
from .flattening import (FlatteningMatrix, best_trivial_split, build_A, build_koszul,
                         build_trivial, default_p)
from .linalg import DEFAULT_TOL, SubspaceBasis, TolerancePolicy, intersect, numerical_rank
from .rank1_extract import MatrixSubspace, find_rank1_elements
from .rank_detect import RankReport, certify_lower_bound, detect_rank
from .tensor_core import (CPDecomposition, RecoveryReport, Tensor3, assemble, match_and_score,
                          random_generic_decomposition, slice_tensor)

__version__ = "0.1.0"

__all__ = [
    "AlgorithmFailure", "CPDecomposition", "CommExtInstance", "DEFAULT_TOL", "DecompositionPlan",
    "DiagonalizationError", "ExtensionReport", "FlatteningMatrix", "FormatError", "MatrixSubspace",
    "RankReport", "RecoveryReport", "SparsityPattern", "SubsetIndexer", "SubspaceBasis", "Tensor3",
    "TolerancePolicy", "UniquenessCertificate", "UnsupportedPlanError", "assemble",
    "best_trivial_split", "block_extension", "build_A", "build_N", "build_P", "build_koszul",
    "build_trivial", "certify_lower_bound", "certify_uniqueness", "decompose", "default_p",
    "detect_rank", "extract_side", "find_rank1_elements", "generate_instance", "intersect",
    "lemma13_extend", "make_plan", "match_and_score", "numerical_rank", "pair_sides", "phi",
    "random_generic_decomposition", "sigma", "slice_tensor", "solve_commuting_extension",
    "verify_extension",
]
