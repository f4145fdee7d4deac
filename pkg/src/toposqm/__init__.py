"""Contexts, daseinisation and presheaf computations for finite-dimensional quantum systems."""
from .contexts import (Character, Context, ContextUniverse, build_universe, characters, make_context,
                       restrict_character, trivial_context)
from .daseinisation import das_proj, das_sa, das_unitary, groote_table, observable_fn, antonymous_fn
from .errors import ToposError
from .presheaf import (check_natural, global_elements, inner_presheaf, outer_presheaf, spectral_presheaf,
                       pullback_subobject)
from .quantity import (KValue, PairFunction, PoFunction, bv_decompose, dispersion, k_class,
                       pair_quotient_iso, quantity_arrow)
from .covariance import covariance_check, sandwich, separating_context, truth_value, twist_universe
from .tolerance import DEFAULT as DEFAULT_TOLERANCES, TolerancePolicy

__version__ = "0.1.0"
