"""Finite non-deterministic matrices (Nmatrices) as models of
multiple-conclusion logics: entailment, rule soundness, morphisms,
quotients, products, ultraproducts, and bounded logic comparison."""

from .compare import (
    ComparisonReport,
    bounded_equivalent,
    bounded_leq,
    distinguishing_sequent,
    witness_chain,
)
from .constructions import (
    Partition,
    RestrictionError,
    Ultrafilter,
    enumerate_compatible_partitions,
    is_compatible,
    is_subnmatrix,
    product,
    quotient,
    restriction,
    sound_compatible_quotients,
    ultrafilters,
    ultraproduct,
)
from .core import (
    CapExceeded,
    Formula,
    Nmatrix,
    NmatrixError,
    ParseError,
    Sequent,
    Signature,
    Substitution,
    app,
    apply_substitution,
    builtin_family,
    depth,
    format_formula,
    formulas_up_to,
    is_deterministic,
    parse_formula,
    subformula_closure,
    validate_nmatrix,
    var,
    variables,
)
from .morphisms import (
    HomMap,
    compose,
    find_isomorphism,
    find_strict_hom,
    identity_hom,
    image,
    is_covering,
    is_embedding,
    is_hom,
    is_strict,
    kernel_partition,
    strict_homs,
)
from .semantics import (
    Assignment,
    Constraint,
    PatternFamily,
    RulesetReport,
    SubstitutionReport,
    Verdict,
    check_rule_under_all_substitutions,
    entails,
    entails_class,
    enumerate_assignments,
    realized_patterns,
    rule_sound,
    ruleset_sound,
)

__version__ = "0.1.0"
