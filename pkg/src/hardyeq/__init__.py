"""Weighted Hardy and Copson inequalities: characterization functionals,
best-constant estimation and numerical checks of reduction theorems."""

from types import ModuleType as _ModuleType

from .discrete import (
    GridFunction,
    InequalitySpec,
    LogGrid,
    OperatorKind,
    SampledWeight,
    apply_operator,
    ratio,
    weighted_norm,
)
from .errors import (
    BudgetExceeded,
    ConditionViolated,
    DegenerateInstance,
    HardyError,
    HypothesisViolated,
    NotApplicable,
    OutOfDomain,
    RegimeMismatch,
    WeightParseError,
    ZeroWitness,
)
from .functionals import (
    FunctionalValue,
    bradley_l1_copson,
    bradley_l1_hardy,
    copson_constant,
    hardy_constant,
    iterated_copson_copson,
    iterated_copson_copson_l1,
    iterated_hardy_copson,
    iterated_hardy_copson_l1,
)
from .kernels import BACKEND
from .solver import (
    BestConstantEstimate,
    atom_search,
    best_constant,
    k_atom_search,
    multistart_ascent,
    power_iteration,
)
from .transforms import conjugate, make_reduction_pair, reduce_down, reduce_up
from .verify import (
    EquivalenceReport,
    random_spec,
    reduce_spec,
    verify_characterization,
    verify_equivalence,
)
from .weights import PiecewisePowerWeight, parse_weight

__version__ = "0.1.0"

__all__ = sorted(name for name, obj in globals().items()
                 if not name.startswith("_") and not isinstance(obj, _ModuleType))
