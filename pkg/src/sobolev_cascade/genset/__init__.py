"""Exact construction and verification of resonant generation sets."""
from .construct import circle_points, construct_paper, construct_search, within_tube
from .geometry import (ExplosionRatio, GenerationSet, defect, norm_explosion_ratio, project,
                       scale, tree_for, weight_sum, weight_sum_float)
from .tree import (Family, GenealogicalTree, PrototypeEmbedding, ResonanceVector,
                   build_prototype, genealogical_tree, span_decompose, span_elements)
from .verify import VerificationReport, check_acceptable, defect_zeros, linear_relations

__all__ = [
    "ExplosionRatio", "Family", "GenealogicalTree", "GenerationSet", "PrototypeEmbedding",
    "ResonanceVector", "VerificationReport", "build_prototype", "check_acceptable",
    "circle_points", "construct_paper", "construct_search", "defect", "defect_zeros",
    "genealogical_tree", "linear_relations", "norm_explosion_ratio", "project", "scale",
    "span_decompose", "span_elements", "tree_for", "weight_sum", "weight_sum_float",
    "within_tube",
]
