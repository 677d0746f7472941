"""zetacalc: a compiler and evaluator for a linear lambda calculus with
basis-indexed binders, translated to ZX string diagrams."""

from .syntax import (
    Abs,
    App,
    Basis,
    Gen,
    Let,
    ParseError,
    Phase,
    Term,
    Tup,
    Unit,
    Var,
    ZetaError,
    alpha_eq,
    compose,
    free_vars,
    hadamard_term,
    lam,
    occurrences,
    parse,
    print_term,
    rotation,
    substitute,
)
from .types import (
    TOP,
    AmbiguousTypeError,
    Context,
    ContractionBasisError,
    Derivation,
    Dual,
    Entry,
    Fn,
    LinearityError,
    Numeral,
    Tensor,
    Type,
    UnboundVariableError,
    ZetaTypeError,
    check,
    context_of,
    derivation_summary,
    infer,
    labels,
    parse_context,
    parse_type,
    print_context,
    print_type,
    size,
    validate_derivation,
)
from .diagram import (
    Cap,
    Cup,
    Diagram,
    Had,
    Id,
    Par,
    Scalar,
    Seq,
    Spider,
    Swap,
    arity,
    cup_many,
    discard,
    from_json,
    max_width,
    par,
    permutation,
    seq,
    to_dot,
    to_json,
    upsilon,
)
from .semantics import JudgementDiagram, eval_as_map, share_context, translate
from .evaluator import (
    BOTH_ZERO,
    WireBudgetError,
    denote,
    equal_up_to_scalar,
    matrix_from_json,
    matrix_to_json,
    max_deviation,
    oracle_contract,
    phase_exp,
    spider_matrix,
)
from .theory import (
    EquationRule,
    RuleVerdict,
    beta_step,
    check_rule_instance,
    commutes_with_sharing,
    denotational_equal,
    normalize,
    rules,
    run_suite,
    standard_instances,
)

__version__ = "0.1.0"
