"""Error bounds and strategy evaluation for differentially private linear
counting queries: workload constructors, the noise mechanisms, the spectral
lower bound with its projected variants and tightness certificate, and the
strategy library that achieves the bound where it is achievable."""

from .algebra import conjunction, crossproduct, stack, union
from .bounds import (
    BoundReport,
    bound_report,
    exhaustive_projection_family,
    greedy_projected_svdb,
    l1_reference,
    looseness_upper_bound,
    range_projection_family,
    range_subrange_eigvals,
    range_subrange_svdb,
    range_trim_projected_svdb,
    svdb,
    svdb_log,
    svdb_projected,
    tightness_certificate,
    variable_agnostic_svdb,
)
from .exceptions import (
    DimensionMismatch,
    DimOutOfRange,
    EmptyCuboidList,
    ExplicitRequired,
    FamilyTooLarge,
    GramOnlyL1,
    IndexOutOfRange,
    NonFinite,
    NonSymmetric,
    NotPowerOfTwo,
    NotPredicate,
    NotPSD,
    NotVariableAgnostic,
    QueryBoundError,
    SubsetTooLarge,
    SupportViolation,
)
from .mechanism import (
    GaussianNoise,
    StrategyErrorReport,
    ZeroNoise,
    analytic_total_error,
    empirical_error,
    equalize_columns,
    gaussian_mechanism,
    matrix_mechanism,
    sensitivity,
)
from .numkernel import as_sym_matrix, pinv_trace, pseudoinverse, psd_sqrt, sym_eig
from .privacy import PrivacyParams
from .strategies import (
    Strategy,
    evaluate_strategy,
    haar_strategy,
    hierarchical_strategy,
    identity_strategy,
    kron_strategy,
    load_strategy_csv,
    save_strategy_csv,
    sqrt_strategy,
    workload_strategy,
)
from .workloads import (
    UniformGram,
    Workload,
    all_predicate_gram,
    all_range,
    column_project,
    contained_in,
    data_cube,
    equivalent,
    load_data_vector,
    load_gram_csv,
    load_workload_csv,
    range_gram_1d,
    save_gram_csv,
    save_workload_csv,
)

__version__ = "1.0.0"

__all__ = [
    "BoundReport",
    "DimOutOfRange",
    "DimensionMismatch",
    "EmptyCuboidList",
    "ExplicitRequired",
    "FamilyTooLarge",
    "GaussianNoise",
    "GramOnlyL1",
    "IndexOutOfRange",
    "NonFinite",
    "NonSymmetric",
    "NotPSD",
    "NotPowerOfTwo",
    "NotPredicate",
    "NotVariableAgnostic",
    "PrivacyParams",
    "QueryBoundError",
    "Strategy",
    "StrategyErrorReport",
    "SubsetTooLarge",
    "SupportViolation",
    "UniformGram",
    "Workload",
    "ZeroNoise",
    "all_predicate_gram",
    "all_range",
    "analytic_total_error",
    "as_sym_matrix",
    "bound_report",
    "column_project",
    "conjunction",
    "contained_in",
    "crossproduct",
    "data_cube",
    "empirical_error",
    "equalize_columns",
    "equivalent",
    "evaluate_strategy",
    "exhaustive_projection_family",
    "gaussian_mechanism",
    "greedy_projected_svdb",
    "haar_strategy",
    "hierarchical_strategy",
    "identity_strategy",
    "kron_strategy",
    "l1_reference",
    "load_data_vector",
    "load_gram_csv",
    "load_strategy_csv",
    "load_workload_csv",
    "looseness_upper_bound",
    "matrix_mechanism",
    "pinv_trace",
    "psd_sqrt",
    "pseudoinverse",
    "range_gram_1d",
    "range_projection_family",
    "range_subrange_eigvals",
    "range_subrange_svdb",
    "range_trim_projected_svdb",
    "save_gram_csv",
    "save_strategy_csv",
    "save_workload_csv",
    "sensitivity",
    "sqrt_strategy",
    "stack",
    "svdb",
    "svdb_log",
    "svdb_projected",
    "sym_eig",
    "tightness_certificate",
    "union",
    "variable_agnostic_svdb",
    "workload_strategy",
]
