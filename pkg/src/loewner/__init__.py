"""Herglotz vector fields, evolution families and Loewner chains on the unit disc."""

from .chains import LoewnerChainHandle, affine_chain
from .errors import (
    CertificationError,
    ConfigError,
    ConvergenceError,
    DomainError,
    EvaluationError,
    ExprNameError,
    ExprSyntaxError,
    LoewnerError,
    PreconditionError,
)
from .evolution import EvolutionFamilyHandle, IntegratorSettings, evolve, family, from_semigroup
from .expr import HoloFunction, parse_expr
from .fields import HerglotzField, make_field, splitting_residual
from .generators import (
    GeneratorSpec,
    bp_compose,
    bp_decompose,
    classify,
    denjoy_wolff,
    generator_spec,
    is_generator,
    koenigs,
    semigroup_map,
)
from .holo import derivative, invert_at, path_integral, poincare_distance

__version__ = "0.1.0"
