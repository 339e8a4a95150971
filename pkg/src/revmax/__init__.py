"""Revenue-optimal truthful auctions over correlated discrete value
distributions: exact LP solving, brute-force enumeration, verification,
oracle access, and a multi-item extension."""

from .brute import EnumLimits, critical_payment, enumerate_deterministic_optimal
from .errors import (
    BudgetError,
    DimensionMismatchError,
    InvalidInputError,
    NonRepresentableError,
    SizeLimitError,
    UndefinedConditionalError,
    UndefinedRatioError,
)
from .lp import LinearProgram, LPSolution, solve
from .mechanisms import (
    first_price,
    posted_price,
    second_price,
    vickrey,
    zero_mechanism,
)
from .model import (
    EXACT,
    FLOAT,
    DeterministicMechanism,
    ExPostMechanism,
    ExplicitDistribution,
    FeasibilitySystem,
    InterimMechanism,
    ValueGrid,
    approximation_ratio,
    canonical_expost,
    execute,
    expected_revenue,
    interim_of,
)
from .multi import (
    MultiItemInstance,
    MultiMechanism,
    Valuation,
    build_multi_lp,
    check_multi,
    enumerate_assignments,
    max_welfare,
    multi_expost,
    single_item_equivalent,
    solve_multi,
)
from .optimal import (
    HullDecomposition,
    OptimalResult,
    SolveOptions,
    build_optimal_lp,
    decompose_allocation,
    solve_optimal,
)
from .oracle import (
    DistributionOracle,
    ExplicitOracle,
    QueryLedger,
    default_budget,
    materialize,
    with_budget,
)
from .verify import (
    VerifyReport,
    Witness,
    check_expost_ir,
    check_extension,
    check_feasible,
    check_ir,
    check_truthful,
    check_universal,
)

__all__ = [
    "EXACT",
    "FLOAT",
    "BudgetError",
    "DeterministicMechanism",
    "DimensionMismatchError",
    "DistributionOracle",
    "EnumLimits",
    "ExPostMechanism",
    "ExplicitDistribution",
    "ExplicitOracle",
    "FeasibilitySystem",
    "HullDecomposition",
    "InterimMechanism",
    "InvalidInputError",
    "LPSolution",
    "LinearProgram",
    "MultiItemInstance",
    "MultiMechanism",
    "NonRepresentableError",
    "OptimalResult",
    "QueryLedger",
    "SizeLimitError",
    "SolveOptions",
    "UndefinedConditionalError",
    "UndefinedRatioError",
    "Valuation",
    "ValueGrid",
    "VerifyReport",
    "Witness",
    "approximation_ratio",
    "build_multi_lp",
    "build_optimal_lp",
    "canonical_expost",
    "check_expost_ir",
    "check_extension",
    "check_feasible",
    "check_ir",
    "check_multi",
    "check_truthful",
    "check_universal",
    "critical_payment",
    "decompose_allocation",
    "default_budget",
    "enumerate_assignments",
    "enumerate_deterministic_optimal",
    "execute",
    "expected_revenue",
    "first_price",
    "interim_of",
    "materialize",
    "max_welfare",
    "multi_expost",
    "posted_price",
    "second_price",
    "single_item_equivalent",
    "solve",
    "solve_multi",
    "solve_optimal",
    "vickrey",
    "with_budget",
    "zero_mechanism",
]

__version__ = "0.1.0"
