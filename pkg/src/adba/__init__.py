"""Query-efficient hard-label adversarial attacks via approximate decision boundaries."""

from .baseline import attack_exact, exact_boundary
from .compare import ComparisonOutcome, ccm_compare, compare_directions
from .distribution import (
    DEFAULT_RHO,
    FitResult,
    RhoParams,
    conditional_median,
    fit_rho,
    rho_density,
    rho_mass,
    sample_boundary,
)
from .exceptions import (
    AttackError,
    BudgetExhaustedError,
    DatasetFormatError,
    DimensionMismatchError,
    EmptyDatasetError,
    HandshakeMismatchError,
    InitFailedError,
    RemoteProtocolError,
)
from .harness import (
    AggregateReport,
    ExperimentConfig,
    emit_reports,
    load_images,
    run_experiment,
    write_images,
)
from .oracle import (
    Oracle,
    QueryLedger,
    RemoteOracle,
    ToyLinearOracle,
    ToyMeanThresholdOracle,
    make_remote_oracle,
    perturbed_image,
    query,
    query_perturbed,
    true_boundary,
)
from .search import (
    AttackConfig,
    AttackReport,
    BlockSchedule,
    attack,
    flip_block,
    init_direction,
    partition_blocks,
)

__version__ = "0.1.0"

__all__ = [
    "AttackConfig",
    "AttackReport",
    "AggregateReport",
    "AttackError",
    "BlockSchedule",
    "BudgetExhaustedError",
    "ComparisonOutcome",
    "DEFAULT_RHO",
    "DatasetFormatError",
    "DimensionMismatchError",
    "EmptyDatasetError",
    "ExperimentConfig",
    "FitResult",
    "HandshakeMismatchError",
    "InitFailedError",
    "Oracle",
    "QueryLedger",
    "RemoteOracle",
    "RemoteProtocolError",
    "RhoParams",
    "ToyLinearOracle",
    "ToyMeanThresholdOracle",
    "attack",
    "attack_exact",
    "ccm_compare",
    "compare_directions",
    "conditional_median",
    "emit_reports",
    "exact_boundary",
    "fit_rho",
    "flip_block",
    "init_direction",
    "load_images",
    "make_remote_oracle",
    "partition_blocks",
    "perturbed_image",
    "query",
    "query_perturbed",
    "rho_density",
    "rho_mass",
    "run_experiment",
    "sample_boundary",
    "true_boundary",
    "write_images",
]
