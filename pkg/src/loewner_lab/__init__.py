"""Numerical laboratory for generalized Choi-Davis-Jensen operator inequalities."""

from .cdj import CdjScales, classical_cdj_check, corollary_majorization, theorem1_sandwich
from .entropy import (
    EntropyParams,
    lemma4_bounds,
    relative_operator_entropy,
    theorem2_sandwich,
    tsallis_relative_entropy,
)
from .funcspec import catalog, from_expression, parse_expression
from .kantorovich import kantorovich_f, kantorovich_r
from .linalg import Relation, loewner_compare, spectral_decompose
from .phimap import PhiMap, random_isometry
from .sandwich import Polynomial, SandwichPair, build_sandwich

__version__ = "0.1.0"
