"""Linearization of non-resonant germs by decorated-forest expansions."""

from .armould import (
    ResonanceError,
    Spectrum,
    S_diffeo,
    S_field,
    elementary_armoulds,
    geometric_armould,
    tree_expand,
)
from .bruno import (
    alpha_epsilon,
    armould_bound_check,
    bruno_partial,
    counting_check,
    gamma_constant,
    kappa,
    max_modulus_check,
    omega,
    radius_lower_bound,
)
from .coarmould import (
    D_closed,
    D_recursive,
    HomogeneousOperator,
    apply,
    is_universally_vanishing,
    product_rule_multiplicities,
    verify_coseparativity,
    verify_product_rule,
)
from .forests import (
    Forest,
    Tree,
    admissible_cuts,
    enumerate_forests,
    forest_stats,
    graft,
    is_Fplus,
    parse_forest,
    symmetry_factor,
    to_text,
)
from .linearizer import (
    LinearizationResult,
    ProblemSpec,
    conjugacy_residual,
    linearize_recursive,
    linearize_tree,
    majorant_bound,
    psi_closed_form,
    rescale,
)
from .series import (
    SeriesTuple,
    TruncatedSeries,
    compose,
    derive,
    invert_tangent_identity,
    majorizes,
    mul,
)

__version__ = "0.1.0"
