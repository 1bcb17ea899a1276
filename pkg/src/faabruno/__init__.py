"""Higher-order chain rule via set partitions, checked three independent ways.

The engine (:mod:`faabruno.chain_rule`) sums over set partitions of the
direction indices. Its results are cross-checked against alternating
difference sums of a black box (:mod:`faabruno.strict_diff`), exact
substitution of truncated power series (:mod:`faabruno.germ_algebra`), and
the cover/partition identity in a free commutative group algebra
(:mod:`faabruno.free_algebra`).
"""

from .chain_rule import compose_chain, compose_eval, compose_towers
from .errors import (BasePointError, DimensionError, EvaluationError, OrderError,
                     RingMismatchError)
from .multilinear import (FLOAT, RATIONAL, DerivativeTower, Polynomial, SymMap, tower_exp,
                          tower_from_dict, tower_linear, tower_polynomial, tower_to_dict)
from .partitions import Cover, Partition, bell, covers_of, partitions_of, subsets_of

__version__ = "0.1.0"

__all__ = [
    "BasePointError", "Cover", "DerivativeTower", "DimensionError", "EvaluationError", "FLOAT",
    "OrderError", "Partition", "Polynomial", "RATIONAL", "RingMismatchError", "SymMap", "bell",
    "compose_chain", "compose_eval", "compose_towers", "covers_of", "partitions_of",
    "subsets_of", "tower_exp", "tower_from_dict", "tower_linear", "tower_polynomial",
    "tower_to_dict",
]
