"""Semiclassical Weyl calculus: truncated star products, quantization on the
discrete torus, propagators, and recovery of the canonical map and conjugating
symbol behind an order-preserving algebra morphism.

Conventions (pinned; see also `phasespace` and `star`):

* {f, g} = sum_j (d_xi_j f d_x_j g - d_x_j f d_xi_j g), so {x, xi} = -1.
* H_q = {q, .} gives the standard Hamilton equations x' = d_xi q,
  xi' = -d_x q.
* x # xi = x xi + i h / 2, and i/h (a#b - b#a) = {a, b} + O(h^2).
"""

from .errors import (
    CalcError,
    ConfigError,
    ConventionError,
    DimensionMismatchError,
    EllipticityError,
    IdealClassificationError,
    NotADerivationError,
    OracleError,
    PartitionError,
    RegionError,
    TruncationError,
)
from .hexpansion import HExpansion, lift
from .phasespace import (
    Cutoff,
    PhaseSpace,
    PolySymbol,
    Region,
    hamiltonian_field_apply,
    hamiltonian_vector_field,
    poisson_bracket,
)
from .sampled import SampledSymbol, SampleGrid, apply_cutoff, sample
from .star import (
    StarContext,
    conjugate_by_exp_generator,
    conjugate_symbol,
    star,
    star_commutator_scaled,
    star_exp,
    star_inverse,
)

__all__ = [
    "CalcError",
    "ConfigError",
    "ConventionError",
    "Cutoff",
    "DimensionMismatchError",
    "EllipticityError",
    "HExpansion",
    "IdealClassificationError",
    "NotADerivationError",
    "OracleError",
    "PartitionError",
    "PhaseSpace",
    "PolySymbol",
    "Region",
    "RegionError",
    "SampleGrid",
    "SampledSymbol",
    "StarContext",
    "TruncationError",
    "apply_cutoff",
    "conjugate_by_exp_generator",
    "conjugate_symbol",
    "hamiltonian_field_apply",
    "hamiltonian_vector_field",
    "lift",
    "poisson_bracket",
    "sample",
    "star",
    "star_commutator_scaled",
    "star_exp",
    "star_inverse",
]
